#pragma once

// Dyadic covers of (0,1), the enlargement I -> I*, and smooth partitions of
// unity subordinate to the enlarged intervals.
//
//   I-family: I_j = (1 - 2^-j, 1 - 2^-j-1],  j >= 0
//   J-family: J_j = I_j for j >= 1,  J_j = (2^{j-1}, 2^j] for j <= -1

#include <string>
#include <utility>
#include <vector>

#include "fbh/quadrature.hpp"
#include "fbh/specfun.hpp"

namespace fbh {

inline constexpr double kZeta = 1.0 / 50.0;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  double center() const noexcept { return 0.5 * (lo + hi); }
  /// Half-open membership (lo, hi].
  bool contains(double x) const noexcept { return x > lo && x <= hi; }
  bool contains(const Interval& other) const noexcept { return other.lo >= lo && other.hi <= hi; }
  double measure(Measure m, Order order) const { return measure_of(m, order, lo, hi); }
};

/// (1 + zeta) I intersected with (0, 1), applied `times` times (I*, I**, I***).
Interval enlarge(const Interval& interval, int times = 1, double zeta = kZeta);

enum class CoverFamily { I, J };

std::string cover_name(CoverFamily family);

/// Index arithmetic on a dyadic family. Indices are unbounded (j >= 0 for I,
/// j != 0 for J); only their neighbours are ever materialized.
class DyadicCover {
 public:
  explicit DyadicCover(CoverFamily family) : family_(family) {}

  CoverFamily family() const noexcept { return family_; }
  bool valid(int j) const noexcept { return family_ == CoverFamily::I ? j >= 0 : j != 0; }
  Interval interval(int j) const;
  /// `times`-fold enlargement of interval(j).
  Interval star(int j, int times = 1) const { return enlarge(interval(j), times); }
  /// The index whose interval contains x in (0, 1).
  int index_of(double x) const;
  /// Neighbouring indices in the order of the intervals along (0, 1).
  int next(int j) const;
  int previous(int j) const;
  /// Valid indices in [lo, hi].
  std::vector<int> range(int lo, int hi) const;

 private:
  CoverFamily family_;
  void check(int j) const;
};

/// Quintic smoothstep 10u^3 - 15u^4 + 6u^5 clamped to [0, 1], and derivatives.
double smoothstep(double u) noexcept;
double smoothstep_derivative(double u) noexcept;
double smoothstep_second_derivative(double u) noexcept;

/// eta_j: 1 on the bulk of interval j, smoothstep transitions of half-width
/// zeta/4 * min(|A|, |B|) centred on each shared endpoint of adjacent
/// intervals A, B. supp eta_j lies inside interval(j)* and sum_j eta_j = 1.
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(CoverFamily family) : cover_(family) {}

  const DyadicCover& cover() const noexcept { return cover_; }
  double value(int j, double x) const;
  double derivative(int j, double x) const;
  /// Closed support of eta_j.
  Interval support(int j) const;
  /// Indices with eta_j(x) possibly nonzero, with their values.
  std::vector<std::pair<int, double>> at(double x) const;
  /// Upper bound for |eta_j'| * scale(j), scale = 2^-j (I) or 2^-|j| (J).
  double derivative_constant() const noexcept;
  /// Transition half-width at the right endpoint of interval(j).
  double right_halfwidth(int j) const;

 private:
  DyadicCover cover_;
};

}  // namespace fbh
