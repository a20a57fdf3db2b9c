#pragma once

// Atoms of the two Hardy spaces on (0,1), their validation, the splittings
// used to pass between local and global atoms, the partition-of-unity atomic
// decomposition, and H^1 norm reports.
//
//   Bessel family:      measure mu, cover I_j, maximal function of P (mu)
//   Schrodinger family: Lebesgue measure, cover J_j, maximal function of P (dx)

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbh/dyadic.hpp"
#include "fbh/maximal.hpp"
#include "fbh/spectral.hpp"

namespace fbh {

enum class AtomFamily { Bessel, Schrodinger };

/// "calL" and "L".
std::string_view family_name(AtomFamily f) noexcept;
/// Accepts calL / Lcal / mu and L / lebesgue.
AtomFamily parse_family(std::string_view s);
Measure family_measure(AtomFamily f) noexcept;
CoverFamily family_cover(AtomFamily f) noexcept;
Semigroup family_semigroup(AtomFamily f) noexcept;

// ---------------------------------------------------------------- local piecewise cubics

/// Cubic on each (edges[k], edges[k+1]] in the local variable
/// u = (x - edges[k]) / (edges[k+1] - edges[k]): f = sum_i coeffs[4k + i] u^i.
/// Zero elsewhere. Stays accurate on panels of width ~1e-12 next to x = 1,
/// where global monomials lose all digits.
class LocalPiecewise {
 public:
  LocalPiecewise() = default;
  LocalPiecewise(std::vector<double> edges, std::vector<double> coeffs);
  /// values[k] on (edges[k], edges[k+1]].
  static LocalPiecewise steps(std::vector<double> edges, std::span<const double> values);
  static LocalPiecewise from_global(const PiecewisePolynomial& f);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t panels() const noexcept { return edges_.empty() ? 0 : edges_.size() - 1; }
  bool empty() const noexcept { return panels() == 0; }

  double operator()(double x) const;
  /// int f dmeasure (exact up to rounding).
  double integral(Measure m, Order order) const;
  /// int |f| dmeasure over [lo, hi] (Gauss rules between sign changes).
  double l1_norm(Measure m, Order order, double lo = 0.0, double hi = 1.0) const;
  /// max |f| (panel ends and critical points).
  double sup_norm() const;
  /// Smallest interval outside which f vanishes; {0, 0} for f = 0.
  Interval support() const;
  /// f on (lo, hi], zero elsewhere.
  LocalPiecewise restricted(double lo, double hi) const;
  LocalPiecewise scaled(double factor) const;
  /// Global-monomial form; loses accuracy on tiny panels far from 0.
  PiecewisePolynomial to_global() const;

 private:
  std::vector<double> edges_;
  std::vector<double> coeffs_;
};

/// int_a^b u^i dmeasure, u = (x - a)/(b - a), i = 0..3, to rounding.
std::array<double, 4> local_moments(Measure m, Order order, double a, double b);

// ---------------------------------------------------------------- atoms

/// Cancellative: supported in `interval`, |a| <= sigma(interval)^{-1}, mean zero.
/// Special: sigma(I_j)^{-1} chi_{I_j} (resp. J_j), `j` set.
/// Constant: sigma(X)^{-1} chi_X for a local space X = `interval`.
enum class AtomKind { Cancellative, Special, Constant };

std::string_view atom_kind_name(AtomKind k) noexcept;

struct Atom {
  AtomKind kind = AtomKind::Cancellative;
  AtomFamily family = AtomFamily::Bessel;
  Interval interval;
  int j = 0;
  LocalPiecewise profile;

  double operator()(double x) const { return profile(x); }
};

Atom special_atom(AtomFamily family, Order order, int j);
Atom constant_atom(AtomFamily family, Order order, const Interval& space);
/// +-sigma(I)^{-1} on the two halves of I split at its measure median.
Atom haar_atom(AtomFamily family, Order order, const Interval& interval);
/// Tent on I minus its mean, scaled to sup norm sigma(I)^{-1}.
Atom tent_atom(AtomFamily family, Order order, const Interval& interval);
/// Two bars split at lo + fraction |I| with opposite signs and mean zero; the
/// taller bar has height sigma(I)^{-1}.
Atom two_bar_atom(AtomFamily family, Order order, const Interval& interval, double fraction, int sign);

struct AtomCheck {
  bool support = false;
  bool size = false;
  bool cancellation = true;  // not required for special and constant atoms
  bool shape = true;         // special and constant atoms: exact normalized indicator
  bool valid = false;
  /// Constant atoms are atoms of a local space only.
  bool global = true;
  double sup_norm = 0.0;
  double bound = 0.0;                // constant * sigma(I)^{-1}
  double cancellation_defect = 0.0;  // |int a| / ||a||_1
  double support_excess = 0.0;       // distance of the support beyond I
  double constant = 1.0;
};

AtomCheck validate_atom(const Atom& a, Order order, double constant = 1.0, double cancel_tolerance = 1e-10);

/// sigma(I_j)^{-1} chi_{I_j} = lambda1 a1 + a2 with a2 = sigma(I_j**)^{-1} chi_{I_j**}
/// and a1 a cancellative atom on I_j** (sup norm sigma(I_j**)^{-1}).
struct TwoAtomSplit {
  int j = 0;
  double lambda1 = 0.0;
  Atom special;
  Atom a1;
  Atom a2;
};

TwoAtomSplit two_atom_split(AtomFamily family, Order order, int j);

/// An atom on I not inside any single I_j* written as sum_{j=N}^M 2^{N-j} b_j,
/// b_j = 2^{j-N} a on I_j (the parts of I left of I_N and right of I_M are
/// carried by b_N and b_M, inside I_N* and I_M*). N is the last index whose
/// star reaches I.lo, M the first index after it whose star reaches I.hi. For
/// the J-family, j - N counts steps along the cover.
struct Case3Piece {
  int j = 0;
  double coefficient = 0.0;
  LocalPiecewise b;
  double sup_norm = 0.0;
  Interval support;
};

struct Case3Split {
  int n = 0;
  int m = 0;
  std::vector<Case3Piece> pieces;
};

Case3Split case3_split(const Atom& a, Order order);

// ---------------------------------------------------------------- random atoms

enum class AtomProfile { Haar, Tent, TwoBar };

std::string_view profile_name(AtomProfile p) noexcept;

struct GeneratedAtom {
  Atom atom;
  int scale = 0;  // |I| in [2^{-k-1}, 2^{-k}]
  AtomProfile profile = AtomProfile::Haar;
};

/// Intervals of length 2^{-k} U (k uniform in 0..max_scale, U uniform in
/// [1/2, 1]) placed uniformly in (0,1); profiles cycle Haar, tent, two-bar.
std::vector<GeneratedAtom> random_atoms(AtomFamily family, Order order, std::size_t count, std::uint64_t seed,
                                        int max_scale = 8);

// ---------------------------------------------------------------- decomposition

struct DecompositionOptions {
  /// Per-piece L^1 budget relative to the piece's norm; a cell is refined
  /// while its linear-fit error exceeds tolerance * ||g|| * sigma(Q) / sigma(X).
  double tolerance = 1e-8;
  /// Measure-median splits below the root (breakpoint splits are not counted).
  int max_depth = 16;
  /// Gauss nodes per cell.
  int cell_nodes = 10;
  /// Pieces eta_j f are dropped once the mass of f beyond them is below
  /// tail_fraction * tolerance * ||f||.
  double tail_fraction = 1e-2;
};

struct LocalDecomposition {
  Interval space;
  std::vector<Atom> atoms;  // local atoms, one Constant atom first if the mean is nonzero
  std::vector<double> coefficients;
  double sum_abs_coeff = 0.0;
  /// Sum over leaves of the quadrature estimate of int |g - fit| dsigma.
  double estimated_residual = 0.0;
  /// Deepest median split used.
  int depth = 0;
  std::size_t leaves = 0;
  /// Edges of the leaf cells, ascending.
  std::vector<double> leaf_edges;
};

/// Mean part as the local constant atom; the rest by a measure-median Haar
/// cascade on X whose leaves also carry their mean-zero linear part. Cells are
/// split at breakpoints of g (`features`) before any median split.
LocalDecomposition local_atomic_decompose(const std::function<double(double)>& g, const Interval& space, Measure m,
                                          Order order, std::span<const double> features,
                                          const DecompositionOptions& options = {});

struct Decomposition {
  AtomFamily family = AtomFamily::Bessel;
  std::vector<Atom> atoms;
  std::vector<double> coefficients;
  /// Partition index of every atom.
  std::vector<int> pieces;
  SampledFunction residual{QuadratureRule{}, {}, Measure::Lebesgue};
  double sum_abs_coeff = 0.0;
  double input_l1 = 0.0;
  double reconstruction_l1_error = 0.0;  // int |f - sum lambda a| on the residual rule
  double estimated_residual = 0.0;       // leaf estimates plus the dropped tail
  int first_piece = 0;
  int last_piece = 0;

  double relative_error() const { return input_l1 > 0.0 ? reconstruction_l1_error / input_l1 : 0.0; }
  /// sum lambda a at the points.
  std::vector<double> evaluate(std::span<const double> points) const;
};

/// f = sum_j eta_j f, every piece decomposed on I_j** (J_j**); local constant
/// atoms are rewritten with two_atom_split so that every output is a global atom.
Decomposition atomic_decompose(const PiecewisePolynomial& f, AtomFamily family, Order order,
                               const DecompositionOptions& options = {});

// ---------------------------------------------------------------- norm reports

/// Named inputs: "phi1" (first eigenfunction of the family: phi_1 for calL,
/// psi_1 for L, cubic interpolant graded towards 0), "x(1-x)", and "bump"
/// (cubic B-spline of width 2^-5 centred at 0.3, unit height).
PiecewisePolynomial named_function(std::string_view name, const EigenBasis& basis, AtomFamily family);

struct H1Report {
  std::string family;
  double maximal_norm = 0.0;
  double atomic_norm_upper = 0.0;
  double ratio = 0.0;  // atomic / maximal; 0 when both vanish
  double input_l1 = 0.0;
  double reconstruction_l1_error = 0.0;
  std::size_t atoms = 0;
  std::string grid;
};

/// Rule on (0,1) graded towards `breakpoints`, with the family measure.
QuadratureRule norm_rule(std::span<const double> breakpoints, AtomFamily family, Order order,
                         double finest = 1.0 / 512.0);

H1Report h1_norm_report(const EigenBasis& basis, const PiecewisePolynomial& f, AtomFamily family,
                        const TimeGrid& grid = TimeGrid::geometric(), const DecompositionOptions& options = {});

/// ||maximal function of a||_{L^1} on a rule graded towards the panels of a.
double atom_maximal_norm(const EigenBasis& basis, const Atom& a, const TimeGrid& grid = TimeGrid::geometric());

struct AtomBatchEntry {
  int scale = 0;
  AtomProfile profile = AtomProfile::Haar;
  Interval interval;
  double maximal_norm = 0.0;
  bool valid = false;
};

struct AtomBatchReport {
  std::string family;
  std::uint64_t seed = 0;
  std::vector<AtomBatchEntry> entries;
  double max_norm = 0.0;
  /// Least-squares slope of log(maximal_norm) against the scale.
  double slope = 0.0;
  std::string grid;
};

/// maximal norms of random_atoms(family, count, seed, max_scale).
AtomBatchReport atom_batch(const EigenBasis& basis, AtomFamily family, std::size_t count, std::uint64_t seed,
                           int max_scale = 8, const TimeGrid& grid = TimeGrid::geometric());

}  // namespace fbh
