#pragma once

// Poisson and heat kernels of the Bessel operators on (0,1) (eigenfunction
// series with certified truncation) and on (0, inf) (closed forms), their
// derivatives, and numerical audits of the two-sided and one-sided kernel
// bounds.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbh/basis.hpp"
#include "fbh/spectral.hpp"

namespace fbh {

/// Absolute truncation tolerance of every series kernel.
inline constexpr double kSeriesTolerance = 1e-10;
/// Largest number of series terms a single evaluation may use.
inline constexpr std::size_t kSeriesTermCap = 200000;

struct KernelEval {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  std::size_t terms = 0;
  double tail_bound = 0.0;
};

/// Series kernels on (0,1)^2.
///   PoissonMu       sum e^{-t lam} phi_n(x) phi_n(y)
///   PoissonLebesgue sum e^{-t lam} psi_n(x) psi_n(y) = (xy)^{nu+1/2} PoissonMu
///   HeatMu          sum e^{-t lam^2} phi_n(x) phi_n(y)
///   HeatLebesgue    sum e^{-t lam^2} psi_n(x) psi_n(y)
///   DeltaPoisson    delta_L acting on x of PoissonLebesgue, delta_L = -d/dx + (nu+1/2)/x
///   DxPoissonMu     d/dx PoissonMu = -DeltaPoisson / (xy)^{nu+1/2}
///   DyPoissonLebesgue d/dy PoissonLebesgue
enum class SeriesKernel { PoissonMu, PoissonLebesgue, HeatMu, HeatLebesgue, DeltaPoisson, DxPoissonMu, DyPoissonLebesgue };

std::string_view kernel_name(SeriesKernel k) noexcept;

/// One kernel value with the shortest certified prefix. Throws
/// ConvergenceError when the zero table (or kSeriesTermCap) is too short.
KernelEval evaluate_kernel(const EigenBasis& basis, SeriesKernel kind, double t, double x, double y,
                           double tolerance = kSeriesTolerance);

KernelEval poisson_kernel_L(const EigenBasis& basis, double t, double x, double y);
KernelEval poisson_kernel_Lsq(const EigenBasis& basis, double t, double x, double y);
KernelEval heat_kernel_L(const EigenBasis& basis, double t, double x, double y);
KernelEval delta_L_poisson_kernel(const EigenBasis& basis, double t, double x, double y);
KernelEval dx_poisson_kernel_L(const EigenBasis& basis, double t, double x, double y);
KernelEval dy_poisson_kernel_Lsq(const EigenBasis& basis, double t, double x, double y);
/// heat_kernel_L inside (0,1)^2, zero when x >= 1 or y >= 1.
double heat_kernel_tilde(const EigenBasis& basis, double t, double x, double y);

/// Values on a tensor grid, values[(k * xs.size() + i) * ys.size() + j] at
/// (ts[k], xs[i], ys[j]). Rows are shared across the grid.
struct KernelGrid {
  SeriesKernel kind = SeriesKernel::PoissonMu;
  std::vector<double> ts;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;
  std::size_t max_terms = 0;
  double tail_bound = 0.0;

  double at(std::size_t k, std::size_t i, std::size_t j) const { return values[(k * xs.size() + i) * ys.size() + j]; }
};

KernelGrid kernel_grid(const EigenBasis& basis, SeriesKernel kind, std::span<const double> ts,
                       std::span<const double> xs, std::span<const double> ys, double tolerance = kSeriesTolerance);

// ---------------------------------------------------------------- half-line

/// (2t)^{-1} exp(-(x^2+y^2)/4t) I_nu(xy/2t) (xy)^{-nu}, exponentially scaled.
double heat_kernel_halfline(Order order, double t, double x, double y);
/// d/dy of heat_kernel_halfline.
double dy_heat_kernel_halfline(Order order, double t, double x, double y);

/// pi^{-1/2} int_0^inf e^{-u} u^{-1/2} T_{t^2/(4u)}(x,y) du with u = v^2 and
/// Gauss-Legendre panels in v (64 nodes each).
double poisson_kernel_halfline(Order order, double t, double x, double y);
/// Same kernel from
///   (2 (nu+1/2) t / pi) int_0^pi sin^{2nu} th (x^2+y^2+t^2-2xy cos th)^{-nu-3/2} d th.
double poisson_kernel_halfline_closed(Order order, double t, double x, double y);

// ---------------------------------------------------------------- estimates

struct Witness {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double ratio = 0.0;
};

struct EstimateGrid {
  std::size_t points = 10;  // per axis
  double t_min = 0.01;
  double t_max = 1.0;
  double x_min = 0.02;
  double x_max = 0.98;
  /// Inserts midpoints `refinement` times (nested grids).
  int refinement = 0;

  std::vector<double> t_values() const;
  std::vector<double> x_values() const;
  std::string describe() const;
};

struct EstimateReport {
  std::string lemma_id;
  std::string grid;
  bool two_sided = true;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::vector<Witness> witnesses;  // argmin, argmax
};

/// Identifiers accepted by check_sharp_estimates.
std::vector<std::string> estimate_lemmas();
/// Default grid of a lemma (large-time bounds use t in [1.5, 5]).
EstimateGrid default_estimate_grid(const std::string& lemma_id);
/// kernel / comparand over the grid. Two-sided bounds report the range of the
/// ratio; one-sided bounds report the range of |kernel| / bound.
EstimateReport check_sharp_estimates(const EigenBasis& basis, const std::string& lemma_id, const EstimateGrid& grid);
/// Recomputes the ratio at a single point (used to replay witnesses).
double estimate_ratio(const EigenBasis& basis, const std::string& lemma_id, double t, double x, double y);

}  // namespace fbh
