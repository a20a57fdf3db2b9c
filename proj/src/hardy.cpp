#include "fbh/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace fbh {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double horner(const double* c, double u) { return c[0] + u * (c[1] + u * (c[2] + u * c[3])); }

double density_power(Order order) { return 2.0 * order.value() + 1.0; }

/// Coefficients of q(s0 + (s1 - s0) v) in v.
std::array<double, 4> reparametrize(const double* c, double s0, double s1) {
  const double d = s1 - s0;
  // Taylor coefficients of q at s0
  const double t0 = horner(c, s0);
  const double t1 = c[1] + s0 * (2.0 * c[2] + 3.0 * c[3] * s0);
  const double t2 = c[2] + 3.0 * c[3] * s0;
  const double t3 = c[3];
  return {t0, t1 * d, t2 * d * d, t3 * d * d * d};
}

/// Real roots of c0 + c1 u + c2 u^2 + c3 u^3 strictly inside (0, 1).
std::vector<double> roots_in_unit(const double* c) {
  // monotone pieces between critical points, then bisection on sign changes
  std::vector<double> cuts{0.0};
  const double a = 3.0 * c[3];
  const double b = 2.0 * c[2];
  const double k = c[1];
  if (a != 0.0) {
    const double disc = b * b - 4.0 * a * k;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(s, b));
      for (double r : {q / a, q != 0.0 ? k / q : 0.0}) {
        if (r > 0.0 && r < 1.0) cuts.push_back(r);
      }
    }
  } else if (b != 0.0) {
    const double r = -k / b;
    if (r > 0.0 && r < 1.0) cuts.push_back(r);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i];
    double hi = cuts[i + 1];
    double flo = horner(c, lo);
    const double fhi = horner(c, hi);
    if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 4.0 * kEps; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = horner(c, mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

/// Nodes and weights (measure included) on (a, b] for fitting and estimates.
QuadratureRule cell_rule(Measure m, Order order, double a, double b, int n) {
  if (m == Measure::Mu && a == 0.0) return gauss_jacobi_left(b, density_power(order), n);
  QuadratureRule r = gauss_on(a, b, n);
  return m == Measure::Mu ? with_mu_density(std::move(r), order) : r;
}

/// Composite rule on ascending edges; the panel at 0 carries the Jacobi weight.
QuadratureRule measure_rule(std::span<const double> edges, Measure m, Order order, int n) {
  QuadratureRule rule;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (!(edges[k + 1] > edges[k])) continue;
    rule.append(cell_rule(m, order, edges[k], edges[k + 1], n));
  }
  return rule;
}

double measure_median(Measure m, Order order, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  if (m == Measure::Mu) {
    const double e = density_power(order) + 1.0;
    if (lo == 0.0) {
      x = hi * std::exp2(-1.0 / e);
    } else {
      const double grow = std::expm1(e * std::log1p((hi - lo) / lo));
      x = lo + lo * std::expm1(std::log1p(0.5 * grow) / e);
    }
  }
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  return x;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// out[i] += factor * f(points[order[i]]) restricted to f's panels; `sorted`
/// holds the points in ascending order.
void accumulate(const LocalPiecewise& f, double factor, std::span<const double> sorted, std::span<double> out) {
  const auto e = f.edges();
  const auto c = f.coeffs();
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    const double* ck = c.data() + 4 * k;
    if (ck[0] == 0.0 && ck[1] == 0.0 && ck[2] == 0.0 && ck[3] == 0.0) continue;
    const auto first = std::upper_bound(sorted.begin(), sorted.end(), e[k]);
    const auto last = std::upper_bound(first, sorted.end(), e[k + 1]);
    const double h = e[k + 1] - e[k];
    for (auto it = first; it != last; ++it) {
      out[static_cast<std::size_t>(it - sorted.begin())] += factor * horner(ck, (*it - e[k]) / h);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- families

std::string_view family_name(AtomFamily f) noexcept { return f == AtomFamily::Bessel ? "calL" : "L"; }

AtomFamily parse_family(std::string_view s) {
  if (s == "calL" || s == "Lcal" || s == "mu" || s == "bessel") return AtomFamily::Bessel;
  if (s == "L" || s == "lebesgue" || s == "schrodinger") return AtomFamily::Schrodinger;
  throw DomainError("unknown atom family '" + std::string(s) + "'");
}

Measure family_measure(AtomFamily f) noexcept { return f == AtomFamily::Bessel ? Measure::Mu : Measure::Lebesgue; }

CoverFamily family_cover(AtomFamily f) noexcept { return f == AtomFamily::Bessel ? CoverFamily::I : CoverFamily::J; }

Semigroup family_semigroup(AtomFamily f) noexcept {
  return f == AtomFamily::Bessel ? Semigroup::PoissonMu : Semigroup::PoissonLebesgue;
}

// ---------------------------------------------------------------- LocalPiecewise

std::array<double, 4> local_moments(Measure m, Order order, double a, double b) {
  if (!(b >= a) || a < 0.0) throw DomainError("local_moments: need 0 <= a <= b");
  const double h = b - a;
  std::array<double, 4> out{};
  if (h == 0.0) return out;
  if (m == Measure::Lebesgue) {
    for (int i = 0; i < 4; ++i) out[i] = h / (i + 1);
    return out;
  }
  const double p = density_power(order);
  auto add = [&](const QuadratureRule& r, double sign) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double u = (r.nodes[k] - a) / h;
      double pw = sign * r.weights[k];
      for (int i = 0; i < 4; ++i) {
        out[i] += pw;
        pw *= u;
      }
    }
  };
  if (a < h) {
    // x^p u^i is a polynomial times the Jacobi weight on (0, b) and (0, a)
    add(gauss_jacobi_left(b, p, 4), 1.0);
    if (a > 0.0) add(gauss_jacobi_left(a, p, 4), -1.0);
  } else {
    add(with_mu_density(gauss_on(a, b, 12), order), 1.0);
  }
  return out;
}

LocalPiecewise::LocalPiecewise(std::vector<double> edges, std::vector<double> coeffs)
    : edges_(std::move(edges)), coeffs_(std::move(coeffs)) {
  if (edges_.size() == 1) throw DomainError("LocalPiecewise: need at least two edges");
  if (coeffs_.size() != 4 * panels()) throw DomainError("LocalPiecewise: need four coefficients per panel");
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
    if (!(edges_[k + 1] > edges_[k])) throw DomainError("LocalPiecewise: edges must increase");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("LocalPiecewise: non-finite coefficient");
  }
}

LocalPiecewise LocalPiecewise::steps(std::vector<double> edges, std::span<const double> values) {
  if (edges.size() != values.size() + 1) throw DomainError("LocalPiecewise::steps: size mismatch");
  std::vector<double> c(4 * values.size(), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) c[4 * k] = values[k];
  return LocalPiecewise(std::move(edges), std::move(c));
}

LocalPiecewise LocalPiecewise::from_global(const PiecewisePolynomial& f) {
  const auto e = f.edges();
  const auto g = f.coeffs();
  std::vector<double> c(4 * f.panels());
  for (std::size_t k = 0; k < f.panels(); ++k) {
    const double a = e[k];
    const double h = e[k + 1] - e[k];
    const double* gk = g.data() + 4 * k;
    // p^{(i)}(a) / i!
    const double d0 = gk[0] + a * (gk[1] + a * (gk[2] + a * gk[3]));
    const double d1 = gk[1] + a * (2.0 * gk[2] + 3.0 * a * gk[3]);
    const double d2 = gk[2] + 3.0 * a * gk[3];
    const double d3 = gk[3];
    c[4 * k] = d0;
    c[4 * k + 1] = d1 * h;
    c[4 * k + 2] = d2 * h * h;
    c[4 * k + 3] = d3 * h * h * h;
  }
  return LocalPiecewise(std::vector<double>(e.begin(), e.end()), std::move(c));
}

double LocalPiecewise::operator()(double x) const {
  if (empty() || !(x > edges_.front()) || x > edges_.back()) return 0.0;
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return horner(coeffs_.data() + 4 * k, (x - edges_[k]) / (edges_[k + 1] - edges_[k]));
}

double LocalPiecewise::integral(Measure m, Order order) const {
  double s = 0.0;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double* c = coeffs_.data() + 4 * k;
    if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) continue;
    const auto mom = local_moments(m, order, edges_[k], edges_[k + 1]);
    for (int i = 0; i < 4; ++i) s += c[i] * mom[i];
  }
  return s;
}

double LocalPiecewise::l1_norm(Measure m, Order order, double lo, double hi) const {
  double s = 0.0;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double a = std::max(lo, edges_[k]);
    const double b = std::min(hi, edges_[k + 1]);
    if (!(b > a)) continue;
    const double h = edges_[k + 1] - edges_[k];
    const auto c = reparametrize(coeffs_.data() + 4 * k, (a - edges_[k]) / h, (b - edges_[k]) / h);
    std::vector<double> cuts{0.0};
    for (double r : roots_in_unit(c.data())) cuts.push_back(r);
    cuts.push_back(1.0);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto d = reparametrize(c.data(), cuts[i], cuts[i + 1]);
      const double x0 = a + (b - a) * cuts[i];
      const double x1 = i + 2 == cuts.size() ? b : a + (b - a) * cuts[i + 1];
      if (!(x1 > x0)) continue;
      const auto mom = local_moments(m, order, x0, x1);
      double v = 0.0;
      for (int q = 0; q < 4; ++q) v += d[q] * mom[q];
      s += std::fabs(v);
    }
  }
  return s;
}

double LocalPiecewise::sup_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double* c = coeffs_.data() + 4 * k;
    s = std::max({s, std::fabs(horner(c, 0.0)), std::fabs(horner(c, 1.0))});
    const double d[4] = {c[1], 2.0 * c[2], 3.0 * c[3], 0.0};
    for (double r : roots_in_unit(d)) s = std::max(s, std::fabs(horner(c, r)));
    // double roots of the derivative are not sign changes; check the vertex too
    if (c[3] != 0.0) {
      const double v = -c[2] / (3.0 * c[3]);
      if (v > 0.0 && v < 1.0) s = std::max(s, std::fabs(horner(c, v)));
    }
  }
  return s;
}

Interval LocalPiecewise::support() const {
  std::size_t first = panels();
  std::size_t last = 0;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double* c = coeffs_.data() + 4 * k;
    if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) continue;
    first = std::min(first, k);
    last = k;
  }
  if (first == panels()) return Interval{0.0, 0.0};
  return Interval{edges_[first], edges_[last + 1]};
}

LocalPiecewise LocalPiecewise::restricted(double lo, double hi) const {
  std::vector<double> e;
  std::vector<double> c;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double a = std::max(lo, edges_[k]);
    const double b = std::min(hi, edges_[k + 1]);
    if (!(b > a)) continue;
    const double h = edges_[k + 1] - edges_[k];
    const auto d = a == edges_[k] && b == edges_[k + 1]
                       ? std::array<double, 4>{coeffs_[4 * k], coeffs_[4 * k + 1], coeffs_[4 * k + 2],
                                               coeffs_[4 * k + 3]}
                       : reparametrize(coeffs_.data() + 4 * k, (a - edges_[k]) / h, (b - edges_[k]) / h);
    if (e.empty()) e.push_back(a);
    e.push_back(b);
    c.insert(c.end(), d.begin(), d.end());
  }
  if (e.empty()) return LocalPiecewise();
  return LocalPiecewise(std::move(e), std::move(c));
}

LocalPiecewise LocalPiecewise::scaled(double factor) const {
  LocalPiecewise out = *this;
  for (double& c : out.coeffs_) c *= factor;
  return out;
}

PiecewisePolynomial LocalPiecewise::to_global() const {
  std::vector<double> g(4 * panels());
  for (std::size_t k = 0; k < panels(); ++k) {
    const double a = edges_[k];
    const double ih = 1.0 / (edges_[k + 1] - edges_[k]);
    const double* q = coeffs_.data() + 4 * k;
    // q((x - a) / h) expanded in x
    const double b0 = q[0], b1 = q[1] * ih, b2 = q[2] * ih * ih, b3 = q[3] * ih * ih * ih;
    g[4 * k] = b0 - a * b1 + a * a * b2 - a * a * a * b3;
    g[4 * k + 1] = b1 - 2.0 * a * b2 + 3.0 * a * a * b3;
    g[4 * k + 2] = b2 - 3.0 * a * b3;
    g[4 * k + 3] = b3;
  }
  return PiecewisePolynomial(edges_, std::move(g));
}

// ---------------------------------------------------------------- atoms

std::string_view atom_kind_name(AtomKind k) noexcept {
  switch (k) {
    case AtomKind::Cancellative:
      return "cancellative";
    case AtomKind::Special:
      return "special";
    case AtomKind::Constant:
      return "constant";
  }
  return "?";
}

Atom special_atom(AtomFamily family, Order order, int j) {
  const Interval i = DyadicCover(family_cover(family)).interval(j);
  const double v[] = {1.0 / i.measure(family_measure(family), order)};
  return Atom{AtomKind::Special, family, i, j, LocalPiecewise::steps({i.lo, i.hi}, v)};
}

Atom constant_atom(AtomFamily family, Order order, const Interval& space) {
  if (!(space.hi > space.lo)) throw DomainError("constant_atom: empty space");
  const double v[] = {1.0 / space.measure(family_measure(family), order)};
  return Atom{AtomKind::Constant, family, space, 0, LocalPiecewise::steps({space.lo, space.hi}, v)};
}

namespace {

Atom two_bar_at(AtomFamily family, Order order, const Interval& i, double split, int sign) {
  if (!(i.lo >= 0.0 && i.hi <= 1.0 && i.hi > i.lo)) throw DomainError("atom interval must lie in [0, 1]");
  if (!(split > i.lo && split < i.hi)) throw DomainError("two-bar split must lie inside the interval");
  const Measure m = family_measure(family);
  const double s1 = measure_of(m, order, i.lo, split);
  const double s2 = measure_of(m, order, split, i.hi);
  const double scale = 1.0 / (i.measure(m, order) * std::max(s1, s2));
  const double sg = sign < 0 ? -1.0 : 1.0;
  const double v[] = {sg * s2 * scale, -sg * s1 * scale};
  return Atom{AtomKind::Cancellative, family, i, 0, LocalPiecewise::steps({i.lo, split, i.hi}, v)};
}

}  // namespace

Atom haar_atom(AtomFamily family, Order order, const Interval& interval) {
  return two_bar_at(family, order, interval, measure_median(family_measure(family), order, interval.lo, interval.hi),
                    1);
}

Atom two_bar_atom(AtomFamily family, Order order, const Interval& interval, double fraction, int sign) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("two_bar_atom: fraction must lie in (0, 1)");
  return two_bar_at(family, order, interval, interval.lo + fraction * interval.length(), sign);
}

Atom tent_atom(AtomFamily family, Order order, const Interval& i) {
  if (!(i.lo >= 0.0 && i.hi <= 1.0 && i.hi > i.lo)) throw DomainError("tent_atom: interval must lie in [0, 1]");
  const Measure m = family_measure(family);
  const double c = i.center();
  const LocalPiecewise tent({i.lo, c, i.hi}, {0.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0});
  const double sigma = i.measure(m, order);
  const double mean = tent.integral(m, order) / sigma;
  const double s = 1.0 / (sigma * std::max(1.0 - mean, mean));
  return Atom{AtomKind::Cancellative, family, i, 0,
              LocalPiecewise({i.lo, c, i.hi}, {-mean * s, s, 0.0, 0.0, (1.0 - mean) * s, -s, 0.0, 0.0})};
}

AtomCheck validate_atom(const Atom& a, Order order, double constant, double cancel_tolerance) {
  if (!(constant > 0.0) || !(cancel_tolerance > 0.0)) throw DomainError("validate_atom: bad tolerances");
  const Measure m = family_measure(a.family);
  AtomCheck r;
  r.constant = constant;
  const Interval& i = a.interval;
  if (!(i.hi > i.lo) || i.lo < 0.0 || i.hi > 1.0) throw DomainError("validate_atom: interval must lie in [0, 1]");
  const double sigma = i.measure(m, order);
  r.sup_norm = a.profile.sup_norm();
  r.bound = constant / sigma;
  r.size = r.sup_norm <= r.bound * (1.0 + 1e-12);
  const double slack = 4.0 * kEps * std::max(1.0, std::fabs(i.hi));
  if (r.sup_norm > 0.0) {
    const Interval s = a.profile.support();
    r.support_excess = std::max({0.0, i.lo - s.lo, s.hi - i.hi});
  }
  r.support = r.support_excess <= slack;

  auto indicator_shape = [&](const Interval& target) {
    const double h = 1.0 / target.measure(m, order);
    const Interval s = a.profile.support();
    if (std::fabs(s.lo - target.lo) > slack || std::fabs(s.hi - target.hi) > slack) return false;
    const auto e = a.profile.edges();
    const auto c = a.profile.coeffs();
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      if (e[k + 1] <= s.lo || e[k] >= s.hi) continue;
      if (std::fabs(c[4 * k] - h) > 1e-12 * h) return false;
      for (int q = 1; q < 4; ++q) {
        if (std::fabs(c[4 * k + q]) > 1e-12 * h) return false;
      }
    }
    return true;
  };

  switch (a.kind) {
    case AtomKind::Cancellative: {
      const double l1 = a.profile.l1_norm(m, order);
      r.cancellation_defect = l1 > 0.0 ? std::fabs(a.profile.integral(m, order)) / l1 : 0.0;
      r.cancellation = r.cancellation_defect <= cancel_tolerance;
      break;
    }
    case AtomKind::Special: {
      const Interval target = DyadicCover(family_cover(a.family)).interval(a.j);
      r.shape = std::fabs(target.lo - i.lo) <= slack && std::fabs(target.hi - i.hi) <= slack &&
                indicator_shape(target);
      break;
    }
    case AtomKind::Constant:
      r.shape = indicator_shape(i);
      r.global = false;
      break;
  }
  r.valid = r.support && r.size && r.cancellation && r.shape;
  return r;
}

TwoAtomSplit two_atom_split(AtomFamily family, Order order, int j) {
  const DyadicCover cover(family_cover(family));
  const Measure m = family_measure(family);
  const Interval i = cover.interval(j);
  const Interval x = cover.star(j, 2);
  const double si = i.measure(m, order);
  const double sx = x.measure(m, order);
  const double inside = 1.0 / si - 1.0 / sx;
  const double outside = -1.0 / sx;
  const double lambda1 = std::max(inside, 1.0 / sx) * sx;
  std::vector<double> edges;
  std::vector<double> values;
  if (x.lo < i.lo) {
    edges.push_back(x.lo);
    values.push_back(outside / lambda1);
  }
  edges.push_back(i.lo);
  values.push_back(inside / lambda1);
  edges.push_back(i.hi);
  if (x.hi > i.hi) {
    values.push_back(outside / lambda1);
    edges.push_back(x.hi);
  }
  TwoAtomSplit out;
  out.j = j;
  out.lambda1 = lambda1;
  out.special = special_atom(family, order, j);
  out.a1 = Atom{AtomKind::Cancellative, family, x, j, LocalPiecewise::steps(std::move(edges), values)};
  out.a2 = constant_atom(family, order, x);
  return out;
}

Case3Split case3_split(const Atom& a, Order order) {
  (void)order;
  if (a.kind != AtomKind::Cancellative) throw DomainError("case3_split: need a cancellative atom");
  const DyadicCover cover(family_cover(a.family));
  const Interval i = a.interval;
  if (!(i.hi > i.lo) || i.lo < 0.0 || i.hi > 1.0) throw DomainError("case3_split: interval must lie in [0, 1]");
  int n = 0;
  if (i.lo > 0.0) {
    n = cover.index_of(std::nextafter(i.lo, 1.0));
  } else if (cover.family() == CoverFamily::J) {
    throw DomainError("case3_split: J-family intervals must start above 0");
  }
  while (cover.star(cover.next(n)).lo <= i.lo) n = cover.next(n);
  const bool has_previous = !(cover.family() == CoverFamily::I && n == 0);
  if (cover.star(n).contains(i) || (has_previous && cover.star(cover.previous(n)).contains(i))) {
    throw DomainError("case3_split: the atom lies inside a single enlarged interval");
  }
  Case3Split out;
  out.n = n;
  int j = n;
  for (int step = 0;; ++step) {
    const Interval ij = cover.interval(j);
    const bool last = cover.star(j).hi >= i.hi;
    const double lo = step == 0 ? i.lo : ij.lo;
    const double hi = last ? i.hi : ij.hi;
    Case3Piece p;
    p.j = j;
    p.coefficient = std::ldexp(1.0, -step);
    p.b = a.profile.restricted(lo, hi).scaled(std::ldexp(1.0, step));
    p.sup_norm = p.b.sup_norm();
    p.support = Interval{lo, hi};
    out.pieces.push_back(std::move(p));
    if (last) break;
    if (step > 80) throw ConvergenceError("case3_split", "cover walk did not reach the interval end");
    j = cover.next(j);
  }
  out.m = j;
  return out;
}

// ---------------------------------------------------------------- random atoms

std::string_view profile_name(AtomProfile p) noexcept {
  switch (p) {
    case AtomProfile::Haar:
      return "haar";
    case AtomProfile::Tent:
      return "tent";
    case AtomProfile::TwoBar:
      return "two-bar";
  }
  return "?";
}

std::vector<GeneratedAtom> random_atoms(AtomFamily family, Order order, std::size_t count, std::uint64_t seed,
                                        int max_scale) {
  if (max_scale < 0 || max_scale > 40) throw DomainError("random_atoms: max_scale must lie in [0, 40]");
  std::mt19937_64 rng(seed);
  // explicit mappings keep batches identical across standard libraries
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<GeneratedAtom> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(max_scale + 1));
    const double len = std::ldexp(0.5 + 0.5 * uniform(), -k);
    const double lo = uniform() * (1.0 - len);
    const Interval i{lo, std::min(1.0, lo + len)};
    GeneratedAtom g;
    g.scale = k;
    g.profile = static_cast<AtomProfile>(n % 3);
    switch (g.profile) {
      case AtomProfile::Haar:
        g.atom = haar_atom(family, order, i);
        break;
      case AtomProfile::Tent:
        g.atom = tent_atom(family, order, i);
        break;
      case AtomProfile::TwoBar: {
        const double fraction = 0.2 + 0.6 * uniform();
        const int sign = uniform() < 0.5 ? -1 : 1;
        g.atom = two_bar_atom(family, order, i, fraction, sign);
        break;
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------- local decomposition

namespace {

struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  double sigma = 0.0;
  double integral = 0.0;  // of the fit, summed over leaves below
  int level = 0;
  int left = -1;
  int right = -1;
  std::array<double, 4> fit{};
  double error = 0.0;
};

class Cascade {
 public:
  Cascade(const std::function<double(double)>& g, const Interval& space, Measure m, Order order,
          std::span<const double> features, const DecompositionOptions& options)
      : g_(g), space_(space), m_(m), order_(order), opt_(options) {
    for (double f : features) {
      if (f > space.lo && f < space.hi) features_.push_back(f);
    }
    features_ = sorted_unique(std::move(features_));
    sigma_space_ = space.measure(m, order);
    norm_ = estimate_norm();
  }

  LocalDecomposition run() {
    LocalDecomposition out;
    out.space = space_;
    build(add(space_.lo, space_.hi, 0), 0);
    // integrals bottom-up so parent means are exact sums of children
    for (std::size_t k = cells_.size(); k-- > 0;) {
      Cell& c = cells_[k];
      if (c.left >= 0) c.integral = cells_[c.left].integral + cells_[c.right].integral;
    }
    const double total = cells_[0].integral;
    if (std::fabs(total) > 1e-13 * norm_) {
      out.atoms.push_back(constant_atom_for());
      out.coefficients.push_back(total);
    }
    std::deque<int> queue{0};
    std::vector<double> edges;
    while (!queue.empty()) {
      const int id = queue.front();
      queue.pop_front();
      const Cell& c = cells_[id];
      if (c.left >= 0) {
        emit_difference(c, out);
        queue.push_back(c.left);
        queue.push_back(c.right);
      } else {
        emit_leaf(c, out);
        out.estimated_residual += c.error;
        ++out.leaves;
        edges.push_back(c.lo);
        edges.push_back(c.hi);
      }
    }
    out.leaf_edges = sorted_unique(std::move(edges));
    out.depth = max_depth_;
    for (double c : out.coefficients) out.sum_abs_coeff += std::fabs(c);
    return out;
  }

 private:
  const std::function<double(double)>& g_;
  Interval space_;
  Measure m_;
  Order order_;
  DecompositionOptions opt_;
  std::vector<double> features_;
  double sigma_space_ = 0.0;
  double norm_ = 0.0;
  std::vector<Cell> cells_;
  int max_depth_ = 0;

  Atom constant_atom_for() const {
    const double v[] = {1.0 / sigma_space_};
    Atom a{AtomKind::Constant, family_of(), space_, 0, LocalPiecewise::steps({space_.lo, space_.hi}, v)};
    return a;
  }

  AtomFamily family_of() const { return m_ == Measure::Mu ? AtomFamily::Bessel : AtomFamily::Schrodinger; }

  double estimate_norm() const {
    std::vector<double> e{space_.lo, space_.hi};
    e.insert(e.end(), features_.begin(), features_.end());
    e = sorted_unique(std::move(e));
    std::vector<double> fine;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      for (int i = 0; i < 64; ++i) fine.push_back(e[k] + (e[k + 1] - e[k]) * i / 64.0);
    }
    fine.push_back(e.back());
    const QuadratureRule r = measure_rule(fine, m_, order_, opt_.cell_nodes);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::fabs(g_(r.nodes[i]));
    return s;
  }

  int add(double lo, double hi, int level) {
    Cell c;
    c.lo = lo;
    c.hi = hi;
    c.sigma = measure_of(m_, order_, lo, hi);
    c.level = level;
    cells_.push_back(c);
    return static_cast<int>(cells_.size()) - 1;
  }

  void fit(Cell& c) const {
    const QuadratureRule r = cell_rule(m_, order_, c.lo, c.hi, opt_.cell_nodes);
    const int n = static_cast<int>(r.size());
    const double h = c.hi - c.lo;
    Eigen::MatrixXd a(n, 4);
    Eigen::VectorXd b(n);
    std::vector<double> gv(n);
    std::vector<double> uv(n);
    bool zero = true;
    for (int i = 0; i < n; ++i) {
      uv[i] = (r.nodes[i] - c.lo) / h;
      gv[i] = g_(r.nodes[i]);
      if (gv[i] != 0.0) zero = false;
      const double s = std::sqrt(r.weights[i]);
      double pw = s;
      for (int q = 0; q < 4; ++q) {
        a(i, q) = pw;
        pw *= uv[i];
      }
      b(i) = s * gv[i];
    }
    if (zero) {
      c.fit = {};
      c.error = 0.0;
      c.integral = 0.0;
      return;
    }
    const Eigen::Vector4d x = a.colPivHouseholderQr().solve(b);
    for (int q = 0; q < 4; ++q) c.fit[q] = x(q);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err += r.weights[i] * std::fabs(gv[i] - horner(c.fit.data(), uv[i]));
    c.error = err;
    const auto mom = local_moments(m_, order_, c.lo, c.hi);
    c.integral = c.fit[0] * mom[0] + c.fit[1] * mom[1] + c.fit[2] * mom[2] + c.fit[3] * mom[3];
  }

  void build(int id, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    const double lo = cells_[id].lo;
    const double hi = cells_[id].hi;
    const int level = cells_[id].level;
    const double median = measure_median(m_, order_, lo, hi);
    // interior breakpoints first; they do not count towards the depth cap
    double split = std::numeric_limits<double>::quiet_NaN();
    for (double f : features_) {
      const double margin = 4.0 * kEps * std::max(1.0, std::fabs(f));
      if (f - lo > margin && hi - f > margin && (std::isnan(split) || std::fabs(f - median) < std::fabs(split - median))) {
        split = f;
      }
    }
    int next_depth = depth;
    if (std::isnan(split)) {
      fit(cells_[id]);
      const Cell& c = cells_[id];
      const double budget = opt_.tolerance * norm_ * c.sigma / sigma_space_;
      if (c.error <= budget || depth >= opt_.max_depth || !(median > lo && median < hi)) return;
      split = median;
      next_depth = depth + 1;
    }
    const int l = add(lo, split, level + 1);
    const int r = add(split, hi, level + 1);
    cells_[id].left = l;
    cells_[id].right = r;
    build(l, next_depth);
    build(r, next_depth);
  }

  void emit_difference(const Cell& c, LocalDecomposition& out) const {
    const Cell& a = cells_[c.left];
    const Cell& b = cells_[c.right];
    const double mean = c.integral / c.sigma;
    const double ma = a.integral / a.sigma;
    const double mb = b.integral / b.sigma;
    const double da = ma - mean;
    // exact zero mean with the same measures
    const double db = -da * a.sigma / b.sigma;
    const double size = std::max(std::fabs(da), std::fabs(db));
    if (!(size > 1e-13 * std::max(std::fabs(ma), std::fabs(mb)))) return;
    const double lambda = size * c.sigma;
    const double v[] = {da / lambda, db / lambda};
    out.atoms.push_back(
        Atom{AtomKind::Cancellative, family_of(), Interval{c.lo, c.hi}, 0, LocalPiecewise::steps({c.lo, a.hi, c.hi}, v)});
    out.coefficients.push_back(lambda);
  }

  void emit_leaf(const Cell& c, LocalDecomposition& out) const {
    if (c.fit[1] == 0.0 && c.fit[2] == 0.0 && c.fit[3] == 0.0) return;
    // offset from the non-constant moments only, so rounding scales with the variation
    const auto mom = local_moments(m_, order_, c.lo, c.hi);
    const double offset = -(c.fit[1] * mom[1] + c.fit[2] * mom[2] + c.fit[3] * mom[3]) / mom[0];
    const std::array<double, 4> q{offset, c.fit[1], c.fit[2], c.fit[3]};
    const LocalPiecewise shape({c.lo, c.hi}, std::vector<double>(q.begin(), q.end()));
    const double sup = shape.sup_norm();
    const double scale = std::max({std::fabs(c.fit[0]), std::fabs(c.fit[0] + c.fit[1] + c.fit[2] + c.fit[3]), sup});
    if (!(sup > 1e-13 * scale)) return;
    const double lambda = sup * c.sigma;
    out.atoms.push_back(Atom{AtomKind::Cancellative, family_of(), Interval{c.lo, c.hi}, 0, shape.scaled(1.0 / lambda)});
    out.coefficients.push_back(lambda);
  }
};

}  // namespace

LocalDecomposition local_atomic_decompose(const std::function<double(double)>& g, const Interval& space, Measure m,
                                          Order order, std::span<const double> features,
                                          const DecompositionOptions& options) {
  if (!(space.hi > space.lo) || space.lo < 0.0 || space.hi > 1.0) {
    throw DomainError("local_atomic_decompose: space must be a nonempty interval in [0, 1]");
  }
  if (!(options.tolerance > 0.0) || options.max_depth < 0 || options.cell_nodes < 4) {
    throw DomainError("local_atomic_decompose: bad options");
  }
  Cascade cascade(g, space, m, order, features, options);
  LocalDecomposition out = cascade.run();
  for (double c : out.coefficients) {
    if (!std::isfinite(c)) throw DomainError("local_atomic_decompose: input is not integrable");
  }
  return out;
}

// ---------------------------------------------------------------- global decomposition

std::vector<double> Decomposition::evaluate(std::span<const double> points) const {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> sorted(points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) sorted[i] = points[idx[i]];
  std::vector<double> acc(points.size(), 0.0);
  for (std::size_t k = 0; k < atoms.size(); ++k) accumulate(atoms[k].profile, coefficients[k], sorted, acc);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = acc[i];
  return out;
}

Decomposition atomic_decompose(const PiecewisePolynomial& f, AtomFamily family, Order order,
                               const DecompositionOptions& options) {
  constexpr int kMaxIndex = 40;
  const Measure m = family_measure(family);
  const PartitionOfUnity partition(family_cover(family));
  const DyadicCover& cover = partition.cover();
  const LocalPiecewise fl = LocalPiecewise::from_global(f);
  const double norm = fl.l1_norm(m, order);
  if (!std::isfinite(norm)) throw DomainError("atomic_decompose: input is not integrable");

  Decomposition d;
  d.family = family;
  const double drop = options.tail_fraction * options.tolerance * norm;

  // indices along (0,1); pieces beyond kMaxIndex or with negligible tails are dropped
  std::vector<int> indices;
  if (norm > 0.0) {
    int first = cover.family() == CoverFamily::I ? 0 : -1;
    if (cover.family() == CoverFamily::J) {
      while (first > -kMaxIndex && fl.l1_norm(m, order, 0.0, partition.support(first - 1).hi) > drop) --first;
      d.estimated_residual += fl.l1_norm(m, order, 0.0, partition.support(first - 1).hi);
    }
    int j = first;
    for (;;) {
      indices.push_back(j);
      if (j >= kMaxIndex) break;
      const double tail = fl.l1_norm(m, order, partition.support(cover.next(j)).lo, 1.0);
      if (tail <= drop) {
        d.estimated_residual += tail;
        break;
      }
      j = cover.next(j);
    }
    if (j >= kMaxIndex) d.estimated_residual += fl.l1_norm(m, order, partition.support(cover.next(j)).lo, 1.0);
    d.first_piece = indices.front();
    d.last_piece = indices.back();
  }

  std::vector<double> f_edges(f.edges().begin(), f.edges().end());
  std::vector<double> all_edges{0.0, 1.0};
  all_edges.insert(all_edges.end(), f_edges.begin(), f_edges.end());
  std::map<int, TwoAtomSplit> splits;
  for (int j : indices) {
    const Interval sup = partition.support(j);
    if (fl.l1_norm(m, order, sup.lo, sup.hi) == 0.0) continue;
    const Interval x = cover.star(j, 2);
    const Interval ij = cover.interval(j);
    std::vector<double> features = f_edges;
    features.insert(features.end(), {sup.lo, sup.hi, ij.hi - partition.right_halfwidth(j),
                                     ij.hi + partition.right_halfwidth(j)});
    if (sup.lo > 0.0) features.push_back(2.0 * ij.lo - sup.lo);
    const auto g = [&](double t) {
      const double e = partition.value(j, t);
      return e == 0.0 ? 0.0 : e * f(t);
    };
    LocalDecomposition local = local_atomic_decompose(g, x, m, order, features, options);
    d.estimated_residual += local.estimated_residual;
    all_edges.insert(all_edges.end(), local.leaf_edges.begin(), local.leaf_edges.end());
    for (std::size_t k = 0; k < local.atoms.size(); ++k) {
      Atom& a = local.atoms[k];
      const double c = local.coefficients[k];
      if (a.kind == AtomKind::Constant) {
        auto it = splits.find(j);
        if (it == splits.end()) it = splits.emplace(j, two_atom_split(family, order, j)).first;
        d.atoms.push_back(it->second.special);
        d.coefficients.push_back(c);
        d.pieces.push_back(j);
        d.atoms.push_back(it->second.a1);
        d.coefficients.push_back(-c * it->second.lambda1);
        d.pieces.push_back(j);
      } else {
        a.family = family;
        a.j = j;
        d.atoms.push_back(std::move(a));
        d.coefficients.push_back(c);
        d.pieces.push_back(j);
      }
    }
  }
  for (double c : d.coefficients) d.sum_abs_coeff += std::fabs(c);

  // independent check on the union of all cells
  std::vector<double> edges = sorted_unique(std::move(all_edges));
  std::vector<double> tails = graded_edges(0.0, 1.0, std::vector<double>{0.0, 1.0}, 1e-12, 2.0);
  edges.insert(edges.end(), tails.begin(), tails.end());
  edges = sorted_unique(std::move(edges));
  QuadratureRule rule;
  {
    // cells at the resolution limit near 1 can produce coinciding nodes
    const QuadratureRule raw = measure_rule(edges, m, order, 8);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!rule.nodes.empty() && !(raw.nodes[i] > rule.nodes.back())) {
        rule.weights.back() += raw.weights[i];
        continue;
      }
      rule.nodes.push_back(raw.nodes[i]);
      rule.weights.push_back(raw.weights[i]);
    }
  }
  std::vector<double> sum(rule.size(), 0.0);
  for (std::size_t k = 0; k < d.atoms.size(); ++k) accumulate(d.atoms[k].profile, d.coefficients[k], rule.nodes, sum);
  std::vector<double> residual(rule.size());
  double in = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes[i]);
    residual[i] = v - sum[i];
    in += rule.weights[i] * std::fabs(v);
    err += rule.weights[i] * std::fabs(residual[i]);
  }
  d.input_l1 = in;
  d.reconstruction_l1_error = err;
  d.residual = SampledFunction(std::move(rule), std::move(residual), m);
  return d;
}

// ---------------------------------------------------------------- norm reports

PiecewisePolynomial named_function(std::string_view name, const EigenBasis& basis, AtomFamily family) {
  if (name == "x(1-x)" || name == "parabola") return PiecewisePolynomial({0.0, 1.0}, {0.0, 1.0, -1.0, 0.0});
  if (name == "phi1") {
    const Family fam = family == AtomFamily::Bessel ? Family::Mu : Family::Lebesgue;
    const std::vector<double> focus{0.0};
    const std::vector<double> edges = graded_edges(0.0, 1.0, focus, 1e-4, 1.25);
    return PiecewisePolynomial::interpolate([&](double x) { return basis.eigenfunction(fam, 1, x); }, edges);
  }
  if (name == "bump") {
    // uniform cubic B-spline on knots c + (k - 2) h, k = 0..4, peak 2/3 scaled to 1
    const double h = std::ldexp(1.0, -7);
    const double c = 0.3;
    std::vector<double> edges;
    for (int k = 0; k <= 4; ++k) edges.push_back(c + (k - 2) * h);
    std::vector<double> local;
    const double s = 1.5;
    // pieces in u in [0,1): u^3/6, (1+3u+3u^2-3u^3)/6, (4-6u^2+3u^3)/6, (1-u)^3/6
    const double pieces[4][4] = {{0, 0, 0, 1.0 / 6}, {1.0 / 6, 0.5, 0.5, -0.5}, {4.0 / 6, 0, -1.0, 0.5},
                                 {1.0 / 6, -0.5, 0.5, -1.0 / 6}};
    for (const auto& p : pieces) {
      for (double v : p) local.push_back(s * v);
    }
    return LocalPiecewise(edges, local).to_global();
  }
  throw DomainError("unknown function '" + std::string(name) + "' (phi1, x(1-x), bump)");
}

QuadratureRule norm_rule(std::span<const double> breakpoints, AtomFamily family, Order order, double finest) {
  double width = finest;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double w = breakpoints[k + 1] - breakpoints[k];
    if (w > 0.0) width = std::min(width, w / 8.0);
  }
  return output_rule(family_measure(family), order, breakpoints, width);
}

H1Report h1_norm_report(const EigenBasis& basis, const PiecewisePolynomial& f, AtomFamily family, const TimeGrid& grid,
                        const DecompositionOptions& options) {
  H1Report r;
  r.family = std::string(family_name(family));
  r.grid = grid.describe();
  const QuadratureRule rule = norm_rule(f.edges(), family, basis.order());
  const MaximalFunction mf = maximal_function(basis, family_semigroup(family), f, grid, rule);
  r.maximal_norm = mf.values.l1_norm();
  const Decomposition d = atomic_decompose(f, family, basis.order(), options);
  r.atomic_norm_upper = d.sum_abs_coeff;
  r.input_l1 = d.input_l1;
  r.reconstruction_l1_error = d.reconstruction_l1_error;
  r.atoms = d.atoms.size();
  r.ratio = r.maximal_norm > 0.0 ? r.atomic_norm_upper / r.maximal_norm : 0.0;
  return r;
}

double atom_maximal_norm(const EigenBasis& basis, const Atom& a, const TimeGrid& grid) {
  const QuadratureRule rule = norm_rule(a.profile.edges(), a.family, basis.order());
  const MaximalFunction mf = maximal_function(basis, family_semigroup(a.family), a.profile.to_global(), grid, rule);
  return mf.values.l1_norm();
}

AtomBatchReport atom_batch(const EigenBasis& basis, AtomFamily family, std::size_t count, std::uint64_t seed,
                           int max_scale, const TimeGrid& grid) {
  AtomBatchReport r;
  r.family = std::string(family_name(family));
  r.seed = seed;
  r.grid = grid.describe();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const GeneratedAtom& g : random_atoms(family, basis.order(), count, seed, max_scale)) {
    AtomBatchEntry e;
    e.scale = g.scale;
    e.profile = g.profile;
    e.interval = g.atom.interval;
    e.valid = validate_atom(g.atom, basis.order()).valid;
    e.maximal_norm = atom_maximal_norm(basis, g.atom, grid);
    r.max_norm = std::max(r.max_norm, e.maximal_norm);
    const double x = e.scale;
    const double y = std::log(e.maximal_norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    r.entries.push_back(e);
  }
  const double n = static_cast<double>(r.entries.size());
  const double den = n * sxx - sx * sx;
  r.slope = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  return r;
}

}  // namespace fbh
