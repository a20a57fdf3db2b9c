#include "fbh/dyadic.hpp"

#include <algorithm>
#include <cmath>

namespace fbh {

Interval enlarge(const Interval& interval, int times, double zeta) {
  if (times < 0) throw DomainError("enlarge: negative iteration count");
  Interval out = interval;
  for (int k = 0; k < times; ++k) {
    const double c = out.center();
    const double h = 0.5 * (1.0 + zeta) * out.length();
    out = Interval{std::max(0.0, c - h), std::min(1.0, c + h)};
  }
  return out;
}

std::string cover_name(CoverFamily family) { return family == CoverFamily::I ? "I" : "J"; }

void DyadicCover::check(int j) const {
  if (!valid(j)) throw DomainError("DyadicCover: invalid index " + std::to_string(j));
}

Interval DyadicCover::interval(int j) const {
  check(j);
  if (j >= 0) return Interval{1.0 - std::ldexp(1.0, -j), 1.0 - std::ldexp(1.0, -j - 1)};
  return Interval{std::ldexp(1.0, j - 1), std::ldexp(1.0, j)};
}

int DyadicCover::index_of(double x) const {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("DyadicCover::index_of: x must lie in (0, 1)");
  if (family_ == CoverFamily::I || x > 0.5) {
    int e = 0;
    std::frexp(1.0 - x, &e);
    return -e;
  }
  int e = 0;
  const double m = std::frexp(x, &e);
  return m == 0.5 ? e - 1 : e;
}

int DyadicCover::next(int j) const {
  check(j);
  return j == -1 ? 1 : j + 1;
}

int DyadicCover::previous(int j) const {
  check(j);
  if (family_ == CoverFamily::I && j == 0) throw DomainError("DyadicCover::previous: I_0 is the first interval");
  return j == 1 && family_ == CoverFamily::J ? -1 : j - 1;
}

std::vector<int> DyadicCover::range(int lo, int hi) const {
  std::vector<int> out;
  for (int j = lo; j <= hi; ++j) {
    if (valid(j)) out.push_back(j);
  }
  return out;
}

double smoothstep(double u) noexcept {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_derivative(double u) noexcept {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double v = u * (1.0 - u);
  return 30.0 * v * v;
}

double smoothstep_second_derivative(double u) noexcept {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

double PartitionOfUnity::right_halfwidth(int j) const {
  const double a = cover_.interval(j).length();
  const double b = cover_.interval(cover_.next(j)).length();
  return 0.25 * kZeta * std::min(a, b);
}

namespace {

bool has_previous(const DyadicCover& cover, int j) { return !(cover.family() == CoverFamily::I && j == 0); }

}  // namespace

Interval PartitionOfUnity::support(int j) const {
  const Interval a = cover_.interval(j);
  const double lo = has_previous(cover_, j) ? a.lo - right_halfwidth(cover_.previous(j)) : 0.0;
  return Interval{lo, a.hi + right_halfwidth(j)};
}

double PartitionOfUnity::value(int j, double x) const {
  const Interval a = cover_.interval(j);
  double v = 1.0;
  if (has_previous(cover_, j)) {
    const double h = right_halfwidth(cover_.previous(j));
    v *= smoothstep((x - (a.lo - h)) / (2.0 * h));
  } else if (x <= 0.0) {
    return 0.0;
  }
  const double h = right_halfwidth(j);
  v *= 1.0 - smoothstep((x - (a.hi - h)) / (2.0 * h));
  return v;
}

double PartitionOfUnity::derivative(int j, double x) const {
  const Interval a = cover_.interval(j);
  double rise = 1.0;
  double drise = 0.0;
  if (has_previous(cover_, j)) {
    const double h = right_halfwidth(cover_.previous(j));
    const double u = (x - (a.lo - h)) / (2.0 * h);
    rise = smoothstep(u);
    drise = smoothstep_derivative(u) / (2.0 * h);
  }
  const double h = right_halfwidth(j);
  const double u = (x - (a.hi - h)) / (2.0 * h);
  const double fall = 1.0 - smoothstep(u);
  const double dfall = -smoothstep_derivative(u) / (2.0 * h);
  return drise * fall + rise * dfall;
}

std::vector<std::pair<int, double>> PartitionOfUnity::at(double x) const {
  std::vector<std::pair<int, double>> out;
  if (!(x > 0.0 && x < 1.0)) return out;
  const int j0 = cover_.index_of(x);
  std::vector<int> candidates{j0, cover_.next(j0)};
  if (has_previous(cover_, j0)) candidates.insert(candidates.begin(), cover_.previous(j0));
  for (int j : candidates) {
    const double v = value(j, x);
    if (v != 0.0) out.emplace_back(j, v);
  }
  return out;
}

double PartitionOfUnity::derivative_constant() const noexcept { return 15.0 / kZeta; }

}  // namespace fbh
