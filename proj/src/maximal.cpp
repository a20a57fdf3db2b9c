#include "fbh/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace fbh {

namespace {

constexpr double kSpectralExponent = 55.0;
constexpr double kRelativeTolerance = 1e-10;

bool is_series(Semigroup s) { return s != Semigroup::HalflinePoisson && s != Semigroup::HalflineHeat; }

Family family_of(Semigroup s) {
  return s == Semigroup::PoissonLebesgue || s == Semigroup::HeatLebesgue ? Family::Lebesgue : Family::Mu;
}

Symbol symbol_of(Semigroup s) {
  return s == Semigroup::PoissonMu || s == Semigroup::PoissonLebesgue || s == Semigroup::HalflinePoisson ? Symbol::Poisson
                                                                                                         : Symbol::Heat;
}

double halfline_kernel(Semigroup s, Order order, double t, double x, double y) {
  return s == Semigroup::HalflinePoisson ? poisson_kernel_halfline_closed(order, t, x, y)
                                         : heat_kernel_halfline(order, t, x, y);
}

void check_times(std::span<const double> times, const char* op) {
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(op) + ": times must be positive");
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double profile_sup(const PiecewisePolynomial& f) {
  double m = 0.0;
  const auto e = f.edges();
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    for (int i = 0; i <= 16; ++i) m = std::max(m, std::fabs(f(e[k] + (e[k + 1] - e[k]) * i / 16.0)));
  }
  return m;
}

/// Samples of f on Gauss panels over its own breakpoints.
SampledFunction profile_samples(const PiecewisePolynomial& f, Measure m, Order order, int per_panel) {
  QuadratureRule rule = composite(f.edges(), per_panel);
  if (m == Measure::Mu) rule = with_mu_density(std::move(rule), order);
  std::vector<double> v(rule.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(rule.nodes[i]);
  return SampledFunction(std::move(rule), std::move(v), m);
}

/// values[k * n + i] = T_{t_k} f(x_i).
std::vector<double> evaluate_series(const EigenBasis& basis, Semigroup s, std::span<const double> coeffs,
                                    std::span<const double> times, std::span<const double> points, double scale) {
  if (scale == 0.0) return std::vector<double>(times.size() * points.size(), 0.0);
  const Evolution ev =
      evolve(basis, family_of(s), coeffs, symbol_of(s), times, points, kRelativeTolerance * scale);
  return ev.values;
}

std::vector<double> evaluate_halfline(Semigroup s, Order order, const SampledFunction& f, std::span<const double> times,
                                      std::span<const double> points) {
  std::vector<double> out(times.size() * points.size(), 0.0);
  const auto y = f.nodes();
  const auto w = f.weights();
  const auto v = f.values();
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (v[j] != 0.0) acc += halfline_kernel(s, order, times[k], points[i], y[j]) * w[j] * v[j];
      }
      out[k * points.size() + i] = acc;
    }
  }
  return out;
}

/// Eigenfunctions sampled at >= 4 nodes per wavelength by the rule.
std::size_t resolved_terms(const EigenBasis& basis, const QuadratureRule& rule) {
  std::vector<double> x = rule.nodes;
  std::sort(x.begin(), x.end());
  double gap = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) gap = std::max(gap, x[i] - x[i - 1]);
  if (!(gap > 0.0)) return 1;
  const double lam = 0.5 * std::numbers::pi / gap;
  const auto l = basis.lambdas();
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::upper_bound(l.begin(), l.end(), lam) - l.begin()));
}

std::vector<double> evaluate_sampled(const EigenBasis& basis, Semigroup s, const SampledFunction& f,
                                     std::span<const double> times, std::span<const double> points) {
  if (f.measure() != semigroup_measure(s)) {
    throw DomainError(std::string(semigroup_name(s)) + ": measure tag of the input does not match the kernel");
  }
  check_times(times, "apply_semigroup");
  if (!is_series(s)) return evaluate_halfline(s, basis.order(), f, times, points);
  const double tmin = *std::min_element(times.begin(), times.end());
  const std::size_t count = spectral_terms(basis, symbol_of(s), tmin);
  std::vector<double> c = coefficients(f, basis, std::min(count, resolved_terms(basis, f.rule())));
  c.resize(count, 0.0);
  return evaluate_series(basis, s, c, times, points, max_abs(f.values()));
}

std::vector<double> evaluate_profile(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f,
                                     std::span<const double> times, std::span<const double> points) {
  check_times(times, "apply_semigroup");
  if (!is_series(s)) {
    return evaluate_halfline(s, basis.order(), profile_samples(f, Measure::Mu, basis.order(), 24), times, points);
  }
  const double tmin = *std::min_element(times.begin(), times.end());
  const std::size_t count = spectral_terms(basis, symbol_of(s), tmin);
  const std::vector<double> c = piecewise_coefficients(basis, family_of(s), f, count);
  return evaluate_series(basis, s, c, times, points, profile_sup(f));
}

MaximalFunction reduce_max(std::span<const double> values, std::span<const double> times, const QuadratureRule& rule,
                           Measure m, const std::vector<std::size_t>& which, const std::string& grid) {
  const std::size_t n = rule.size();
  std::vector<double> best(n, 0.0);
  std::vector<double> arg(n, which.empty() ? 0.0 : times[which.front()]);
  for (std::size_t k : which) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::fabs(values[k * n + i]);
      if (a > best[i]) {
        best[i] = a;
        arg[i] = times[k];
      }
    }
  }
  return MaximalFunction{SampledFunction(rule, std::move(best), m), std::move(arg), grid};
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = k;
  return v;
}

}  // namespace

std::string_view semigroup_name(Semigroup s) noexcept {
  switch (s) {
    case Semigroup::PoissonMu: return "poisson-mu";
    case Semigroup::PoissonLebesgue: return "poisson-lebesgue";
    case Semigroup::HeatMu: return "heat-mu";
    case Semigroup::HeatLebesgue: return "heat-lebesgue";
    case Semigroup::HalflinePoisson: return "halfline-poisson";
    case Semigroup::HalflineHeat: return "halfline-heat";
  }
  return "unknown";
}

Measure semigroup_measure(Semigroup s) noexcept { return family_of(s) == Family::Lebesgue ? Measure::Lebesgue : Measure::Mu; }

// ---------------------------------------------------------------- TimeGrid

TimeGrid TimeGrid::geometric(double t_min, double t_max, double ratio) {
  if (!(t_min > 0.0 && t_min <= 1.0 && t_max >= 1.0 && ratio > 1.0)) {
    throw DomainError("TimeGrid::geometric: need 0 < t_min <= 1 <= t_max and ratio > 1");
  }
  TimeGrid g;
  const auto steps = [&](double span) {
    return span <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log(span) / std::log(ratio) - 1e-12));
  };
  const int below = steps(1.0 / t_min);
  const int above = steps(t_max);
  for (int k = below; k > 0; --k) g.times.push_back(std::pow(t_min, static_cast<double>(k) / below));
  g.times.push_back(1.0);
  for (int k = 1; k <= above; ++k) g.times.push_back(std::pow(t_max, static_cast<double>(k) / above));
  return g;
}

TimeGrid TimeGrid::refined() const {
  TimeGrid g;
  g.split_point = split_point;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) g.times.push_back(std::sqrt(times[k - 1] * times[k]));
    g.times.push_back(times[k]);
  }
  return g;
}

TimeGrid TimeGrid::restricted(double lo, double hi) const {
  if (!(lo > 0.0 && lo <= hi)) throw DomainError("TimeGrid::restricted: need 0 < lo <= hi");
  TimeGrid g;
  g.split_point = split_point;
  g.times.push_back(lo);
  for (double t : times) {
    if (t > lo && t < hi) g.times.push_back(t);
  }
  if (hi > lo) g.times.push_back(hi);
  return g;
}

double TimeGrid::max_ratio() const {
  double r = 1.0;
  for (std::size_t k = 1; k < times.size(); ++k) r = std::max(r, times[k] / times[k - 1]);
  return r;
}

std::string TimeGrid::describe() const {
  std::ostringstream os;
  os << times.size() << " geometric times in [" << t_min() << ", " << t_max() << "], ratio <= " << max_ratio()
     << ", split at " << split_point;
  return os.str();
}

// ---------------------------------------------------------------- CutoffRho

CutoffRho CutoffRho::standard() {
  const DyadicCover cover(CoverFamily::I);
  return CutoffRho{cover.star(0, 2), cover.star(0, 3), 5};
}

double CutoffRho::value(double x) const {
  return 1.0 - smoothstep((x - inner.hi) / (outer.hi - inner.hi));
}

double CutoffRho::derivative(double x) const {
  const double w = outer.hi - inner.hi;
  return -smoothstep_derivative((x - inner.hi) / w) / w;
}

double CutoffRho::second_derivative(double x) const {
  const double w = outer.hi - inner.hi;
  return -smoothstep_second_derivative((x - inner.hi) / w) / (w * w);
}

// ---------------------------------------------------------------- application

std::size_t spectral_terms(const EigenBasis& basis, Symbol symbol, double t_min) {
  if (!(t_min > 0.0)) throw DomainError("spectral_terms: t_min must be positive");
  const double lam = symbol == Symbol::Poisson ? kSpectralExponent / t_min : std::sqrt(kSpectralExponent / t_min);
  const auto l = basis.lambdas();
  const auto it = std::lower_bound(l.begin(), l.end(), lam);
  return std::min<std::size_t>(static_cast<std::size_t>(it - l.begin()) + 1, basis.size());
}

QuadratureRule output_rule(Measure measure, Order order, std::span<const double> focus, double finest) {
  std::vector<double> pts(focus.begin(), focus.end());
  pts.push_back(0.0);
  pts.push_back(1.0);
  QuadratureRule rule = composite(graded_edges(0.0, 1.0, pts, finest, 1.5), 8);
  if (measure == Measure::Mu) rule = with_mu_density(std::move(rule), order);
  return rule;
}

SampledFunction apply_semigroup(const EigenBasis& basis, Semigroup s, const SampledFunction& f, double t) {
  const double times[] = {t};
  std::vector<double> v = evaluate_sampled(basis, s, f, times, f.nodes());
  return SampledFunction(f.rule(), std::move(v), f.measure());
}

SampledFunction apply_semigroup(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f, double t,
                                const QuadratureRule& output) {
  const double times[] = {t};
  std::vector<double> v = evaluate_profile(basis, s, f, times, output.nodes);
  return SampledFunction(output, std::move(v), semigroup_measure(s));
}

SampledFunction apply_poisson(const EigenBasis& basis, Semigroup s, const SampledFunction& f, double t) {
  if (symbol_of(s) != Symbol::Poisson) throw DomainError("apply_poisson: not a Poisson semigroup");
  return apply_semigroup(basis, s, f, t);
}

MaximalFunction maximal_function(const EigenBasis& basis, Semigroup s, const SampledFunction& f, const TimeGrid& grid) {
  const std::vector<double> v = evaluate_sampled(basis, s, f, grid.times, f.nodes());
  return reduce_max(v, grid.times, f.rule(), f.measure(), all_indices(grid.times.size()), grid.describe());
}

MaximalFunction maximal_function(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f,
                                 const TimeGrid& grid, const QuadratureRule& output) {
  const std::vector<double> v = evaluate_profile(basis, s, f, grid.times, output.nodes);
  return reduce_max(v, grid.times, output, semigroup_measure(s), all_indices(grid.times.size()), grid.describe());
}

namespace {

SplitMaximal split(std::span<const double> v, const TimeGrid& grid, const QuadratureRule& rule, Measure m) {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    if (grid.times[k] <= grid.split_point) lo.push_back(k);
    if (grid.times[k] >= grid.split_point) hi.push_back(k);
  }
  return SplitMaximal{reduce_max(v, grid.times, rule, m, lo, grid.describe()),
                      reduce_max(v, grid.times, rule, m, hi, grid.describe())};
}

}  // namespace

SplitMaximal split_maximal(const EigenBasis& basis, Semigroup s, const SampledFunction& f, const TimeGrid& grid) {
  return split(evaluate_sampled(basis, s, f, grid.times, f.nodes()), grid, f.rule(), f.measure());
}

SplitMaximal split_maximal(const EigenBasis& basis, Semigroup s, const PiecewisePolynomial& f, const TimeGrid& grid,
                           const QuadratureRule& output) {
  return split(evaluate_profile(basis, s, f, grid.times, output.nodes), grid, output, semigroup_measure(s));
}

// ---------------------------------------------------------------- Uchiyama

double uchiyama_time(Order order, double x, double r) {
  if (!(x > 0.0 && r > 0.0)) throw DomainError("uchiyama_time: x and r must be positive");
  const double p = 2.0 * order.value() + 2.0;
  if (r <= std::pow(x, p)) return r * std::pow(x, 1.0 - p);
  return std::pow(r, 1.0 / p);
}

double uchiyama_kernel(Order order, double r, double x, double y) {
  const Interval space = DyadicCover(CoverFamily::I).star(0, 2);
  const double sigma = space.measure(Measure::Mu, order);
  if (!(r > 0.0 && r < sigma)) throw DomainError("uchiyama_kernel: r must lie in (0, mu(I_0**))");
  if (!(x > 0.0 && x <= space.hi && y > 0.0 && y <= space.hi)) {
    throw DomainError("uchiyama_kernel: x and y must lie in I_0**");
  }
  return poisson_kernel_halfline_closed(order, uchiyama_time(order, x, r), x, y);
}

std::string_view uchiyama_family_name(UchiyamaFamily f) noexcept {
  switch (f) {
    case UchiyamaFamily::NaturalLocal: return "natural-local";
    case UchiyamaFamily::LebesgueLocal: return "lebesgue-local";
    case UchiyamaFamily::Reparametrized: return "reparametrized";
  }
  return "unknown";
}

UchiyamaReport check_uchiyama_conditions(const EigenBasis& basis, UchiyamaFamily family, int j,
                                         const UchiyamaGrid& grid) {
  if (grid.points < 2 || grid.scales < 2 || !(grid.scale_min_fraction > 0.0 && grid.scale_min_fraction < 1.0)) {
    throw DomainError("check_uchiyama_conditions: invalid grid");
  }
  const Order order = basis.order();
  const double p = 2.0 * order.value() + 2.0;
  UchiyamaReport rep;
  rep.family = std::string(uchiyama_family_name(family));
  rep.j = j;
  SeriesKernel kind = SeriesKernel::PoissonMu;
  bool mu_distance = false;
  switch (family) {
    case UchiyamaFamily::NaturalLocal:
      if (j < 0) throw DomainError("check_uchiyama_conditions: I-family index must be >= 0");
      rep.space = DyadicCover(CoverFamily::I).star(j, 2);
      rep.sigma = rep.space.measure(Measure::Mu, order);
      break;
    case UchiyamaFamily::LebesgueLocal:
      if (j == 0) throw DomainError("check_uchiyama_conditions: J-family index must be nonzero");
      rep.space = DyadicCover(CoverFamily::J).star(j, 2);
      rep.sigma = rep.space.length();
      kind = SeriesKernel::PoissonLebesgue;
      break;
    case UchiyamaFamily::Reparametrized:
      rep.j = 0;
      rep.space = DyadicCover(CoverFamily::I).star(0, 2);
      rep.sigma = rep.space.measure(Measure::Mu, order);
      mu_distance = true;
      break;
  }
  // Coordinates in which the distance is |c(x) - c(y)|.
  auto coord = [&](double x) { return mu_distance ? std::pow(x, p) / p : x; };
  auto inverse = [&](double c) { return mu_distance ? std::pow(p * c, 1.0 / p) : c; };
  auto dist = [&](double x, double y) { return std::fabs(coord(x) - coord(y)); };
  const double c_lo = coord(rep.space.lo);
  const double c_hi = coord(rep.space.hi);

  std::vector<double> xs(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) {
    xs[i] = inverse(c_lo + (c_hi - c_lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid.points));
  }
  std::vector<double> rs(grid.scales);
  for (std::size_t k = 0; k < grid.scales; ++k) {
    const double e = 1.0 - static_cast<double>(k) / static_cast<double>(grid.scales - 1);
    rs[k] = 0.99 * rep.sigma * std::pow(grid.scale_min_fraction, e);
  }
  std::ostringstream gs;
  gs << grid.points << " points uniform in " << (mu_distance ? "d_mu" : "|x-y|") << " x " << grid.scales
     << " geometric scales in [" << rs.front() << ", " << rs.back() << "]";
  rep.grid = gs.str();

  // values[(k * xs + i) * ys + m] = K(r_k, x_i, ys[m]).
  auto block = [&](std::span<const double> r_values, std::span<const double> ys) {
    if (family != UchiyamaFamily::Reparametrized) {
      return kernel_grid(basis, kind, r_values, xs, ys).values;
    }
    std::vector<double> v(r_values.size() * xs.size() * ys.size());
    for (std::size_t k = 0; k < r_values.size(); ++k) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t m = 0; m < ys.size(); ++m) {
          v[(k * xs.size() + i) * ys.size() + m] = uchiyama_kernel(order, r_values[k], xs[i], ys[m]);
        }
      }
    }
    return v;
  };

  const std::size_t n = xs.size();
  const std::vector<double> base = block(rs, xs);
  rep.min_kernel = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double r = rs[k];
    for (std::size_t i = 0; i < n; ++i) {
      rep.lower_constant = std::max(rep.lower_constant, 1.0 / (r * base[(k * n + i) * n + i]));
      for (std::size_t m = 0; m < n; ++m) {
        const double kv = base[(k * n + i) * n + m];
        const double q = 1.0 + dist(xs[i], xs[m]) / r;
        rep.size_constant = std::max(rep.size_constant, r * kv * q * q);
        rep.min_kernel = std::min(rep.min_kernel, kv);
      }
    }
  }
  const double a0 = std::max(rep.lower_constant, rep.size_constant);

  // Lipschitz pairs: z at d(y,z) = r/(4A) * {1, 8, 64} on both sides of y.
  const double factors[] = {1.0, 8.0, 64.0};
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double r = rs[k];
    std::vector<double> zs;
    std::vector<std::size_t> owner;
    for (std::size_t m = 0; m < n; ++m) {
      for (double f : factors) {
        for (double sgn : {-1.0, 1.0}) {
          const double c = coord(xs[m]) + sgn * f * r / (4.0 * a0);
          if (c > c_lo && c <= c_hi) {
            zs.push_back(inverse(c));
            owner.push_back(m);
          }
        }
      }
    }
    if (zs.empty()) continue;
    const double rk[] = {r};
    const std::vector<double> zv = block(rk, zs);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < zs.size(); ++q) {
        const std::size_t m = owner[q];
        const double y = xs[m];
        const double z = zs[q];
        const double dyz = dist(y, z);
        const double dxy = dist(xs[i], y);
        if (!(dyz > 0.0) || dyz > (r + dxy) / (4.0 * a0) * (1.0 + 1e-12)) continue;
        const double diff = std::fabs(base[(k * n + i) * n + m] - zv[i * zs.size() + q]);
        const double w = 1.0 + dxy / r;
        rep.holder_constant = std::max(rep.holder_constant, diff * r * r / dyz * w * w);
        ++rep.holder_pairs;
      }
    }
  }
  rep.constant = std::max(a0, rep.holder_constant);
  return rep;
}

// ---------------------------------------------------------------- Duhamel

namespace {

struct SRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

SRule s_rule(double t, const DuhamelOptions& o) {
  if (o.s_nodes < 2 || o.refinement < 0 || o.refinement > 12) throw DomainError("duhamel: invalid s-panel options");
  // geometric towards s = t, where T_{t-s}(x, z) peaks for x next to supp rho'
  const double marks[] = {0.0, 0.01, 0.1, 0.5, 0.9, 0.99, 1 - 1e-3, 1 - 1e-4, 1 - 1e-5, 1 - 1e-6, 1 - 1e-7, 1.0};
  constexpr int kMarks = sizeof(marks) / sizeof(marks[0]);
  std::vector<double> edges;
  const int pieces = 1 << o.refinement;
  for (int p = 0; p + 1 < kMarks; ++p) {
    for (int q = 0; q < pieces; ++q) edges.push_back(t * (marks[p] + (marks[p + 1] - marks[p]) * q / pieces));
  }
  edges.push_back(t);
  const QuadratureRule& g = gauss_legendre(o.s_nodes);
  SRule r;
  const std::size_t last = edges.size() - 2;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e];
    const double b = edges[e + 1];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = 0.5 * (g.nodes[i] + 1.0);
      const double wv = 0.5 * g.weights[i];
      if (e == last) {
        r.nodes.push_back(b - (b - a) * v * v);
        r.weights.push_back(2.0 * (b - a) * v * wv);
      } else {
        r.nodes.push_back(a + (b - a) * v);
        r.weights.push_back((b - a) * wv);
      }
    }
  }
  return r;
}

struct ZRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // include z^{2nu+1}
};

ZRule z_rule(const CutoffRho& rho, Order order, int n) {
  const Interval tr = rho.transition();
  const QuadratureRule r = with_mu_density(gauss_on(tr.lo, tr.hi, n), order);
  return ZRule{r.nodes, r.weights};
}

/// Residual integrals at x for u[s][z] (u = T~_s f on the z nodes).
std::array<double, 3> residuals_at(Order order, const CutoffRho& rho, double t, double x, const SRule& s,
                                   const ZRule& z, std::span<const double> u) {
  const double nu = order.value();
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const std::size_t nz = z.nodes.size();
  for (std::size_t a = 0; a < s.nodes.size(); ++a) {
    const double tau = t - s.nodes[a];
    if (!(tau > 0.0)) continue;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    for (std::size_t b = 0; b < nz; ++b) {
      const double ub = u[a * nz + b];
      if (ub == 0.0) continue;
      const double zz = z.nodes[b];
      const double w = z.weights[b] * ub;
      const double kt = heat_kernel_halfline(order, tau, x, zz);
      const double dk = dy_heat_kernel_halfline(order, tau, x, zz);
      r1 += w * kt * rho.second_derivative(zz);
      r2 += w * dk * rho.derivative(zz);
      r3 += w * kt * rho.derivative(zz) * (2.0 * nu + 1.0) / zz;
    }
    out[0] += s.weights[a] * r1;
    out[1] += 2.0 * s.weights[a] * r2;
    out[2] += s.weights[a] * r3;
  }
  return out;
}

void check_duhamel(double t, const char* op) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError(std::string(op) + ": t must lie in (0, 1)");
}

}  // namespace

DuhamelResult duhamel_residuals(const EigenBasis& basis, const CutoffRho& rho, const PiecewisePolynomial& f, double t,
                                const QuadratureRule& output, const DuhamelOptions& options) {
  check_duhamel(t, "duhamel_residuals");
  for (double x : output.nodes) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("duhamel_residuals: output nodes must lie in (0, 1)");
  }
  const auto e = f.edges();
  if (!e.empty() && (e.front() < rho.inner.lo || e.back() > rho.inner.hi)) {
    throw DomainError("duhamel_residuals: f must be supported in the inner interval of rho");
  }
  const Order order = basis.order();
  const SRule s = s_rule(t, options);
  const ZRule z = z_rule(rho, order, options.z_nodes);
  const double scale = profile_sup(f);
  const std::size_t no = output.size();
  DuhamelResult res{t,
                    SampledFunction(output, std::vector<double>(no, 0.0), Measure::Mu),
                    SampledFunction(output, std::vector<double>(no, 0.0), Measure::Mu),
                    SampledFunction(output, std::vector<double>(no, 0.0), Measure::Mu),
                    SampledFunction(output, std::vector<double>(no, 0.0), Measure::Mu),
                    0.0};
  if (scale == 0.0) return res;

  const double smin = *std::min_element(s.nodes.begin(), s.nodes.end());
  const std::size_t count = spectral_terms(basis, Symbol::Heat, std::min(smin, t));
  const std::vector<double> c = piecewise_coefficients(basis, Family::Mu, f, count);
  const double tol = 1e-12 * scale;
  const Evolution u = evolve(basis, Family::Mu, c, Symbol::Heat, s.nodes, z.nodes, tol);
  const double tt[] = {t};
  const Evolution at_t = evolve(basis, Family::Mu, c, Symbol::Heat, tt, output.nodes, tol);
  const SampledFunction src = profile_samples(f, Measure::Mu, order, options.source_nodes);

  std::vector<double> lhs(no), r1(no), r2(no), r3(no);
  for (std::size_t i = 0; i < no; ++i) {
    const double x = output.nodes[i];
    double half = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      const double y = src.nodes()[j];
      half += heat_kernel_halfline(order, t, x, y) * rho.value(y) * src.values()[j] * src.weights()[j];
    }
    lhs[i] = rho.value(x) * at_t.values[i] - half;
    const auto r = residuals_at(order, rho, t, x, s, z, u.values);
    r1[i] = r[0];
    r2[i] = r[1];
    r3[i] = r[2];
    res.closure_error = std::max(res.closure_error, std::fabs(lhs[i] - r[0] - r[1] - r[2]));
  }
  res.lhs = SampledFunction(output, std::move(lhs), Measure::Mu);
  res.r1 = SampledFunction(output, std::move(r1), Measure::Mu);
  res.r2 = SampledFunction(output, std::move(r2), Measure::Mu);
  res.r3 = SampledFunction(output, std::move(r3), Measure::Mu);
  return res;
}

std::array<double, 3> duhamel_kernels(const EigenBasis& basis, const CutoffRho& rho, double t, double x, double y,
                                      const DuhamelOptions& options) {
  check_duhamel(t, "duhamel_kernels");
  if (!(x > 0.0 && x <= rho.inner.hi && y > 0.0 && y <= rho.inner.hi)) {
    throw DomainError("duhamel_kernels: x and y must lie in the inner interval of rho");
  }
  const SRule s = s_rule(t, options);
  const ZRule z = z_rule(rho, basis.order(), options.z_nodes);
  const double ys[] = {y};
  const KernelGrid g = kernel_grid(basis, SeriesKernel::HeatMu, s.nodes, z.nodes, ys);
  return residuals_at(basis.order(), rho, t, x, s, z, g.values);
}

// ---------------------------------------------------------------- Theorem 4.1

SemigroupComparison::SemigroupComparison(const EigenBasis& basis, QuadratureRule rule, const TimeGrid& grid)
    : basis_(&basis), rule_(std::move(rule)) {
  const Interval space = DyadicCover(CoverFamily::I).star(0, 2);
  for (double x : rule_.nodes) {
    if (!(x > 0.0 && x <= space.hi)) throw DomainError("SemigroupComparison: nodes must lie in I_0**");
  }
  for (double t : grid.times) {
    if (t <= 1.0) times_.push_back(t);
  }
  if (times_.empty()) throw DomainError("SemigroupComparison: no grid times in (0, 1]");
  const std::size_t n = rule_.size();
  halfline_.assign(times_.size() * n * n, 0.0);
  const Order order = basis.order();
  for (std::size_t k = 0; k < times_.size(); ++k) {
    double* m = halfline_.data() + k * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = poisson_kernel_halfline_closed(order, times_[k], rule_.nodes[i], rule_.nodes[j]);
        m[i * n + j] = v * rule_.weights[j];
        m[j * n + i] = v * rule_.weights[i];
      }
    }
  }
}

std::vector<double> SemigroupComparison::sup_difference(std::span<const double> values) const {
  const std::size_t n = rule_.size();
  if (values.size() != n) throw DomainError("SemigroupComparison: value count does not match the rule");
  std::vector<double> sup(n, 0.0);
  const double scale = max_abs(values);
  if (scale == 0.0) return sup;
  const SampledFunction f(rule_, std::vector<double>(values.begin(), values.end()), Measure::Mu);
  const std::size_t count = spectral_terms(*basis_, Symbol::Poisson, times_.front());
  const std::vector<double> c = coefficients(f, *basis_, count);
  const std::vector<double> interval = evaluate_series(*basis_, Semigroup::PoissonMu, c, times_, rule_.nodes, scale);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double* m = halfline_.data() + k * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double half = simd::dot(std::span<const double>(m + i * n, n), values);
      sup[i] = std::max(sup[i], std::fabs(half - interval[k * n + i]));
    }
  }
  return sup;
}

double SemigroupComparison::ratio(std::span<const double> values) const {
  double norm = 0.0;
  for (std::size_t i = 0; i < values.size() && i < rule_.size(); ++i) norm += rule_.weights[i] * std::fabs(values[i]);
  const std::vector<double> sup = sup_difference(values);
  if (norm == 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < sup.size(); ++i) num += rule_.weights[i] * sup[i];
  return num / norm;
}

double compare_semigroups_theorem41(const EigenBasis& basis, const SampledFunction& f, const TimeGrid& grid) {
  if (f.measure() != Measure::Mu) throw DomainError("compare_semigroups_theorem41: input must carry Measure::Mu");
  const SemigroupComparison cmp(basis, f.rule(), grid);
  return cmp.ratio(f.values());
}

// ---------------------------------------------------------------- commutators

double local_time_cap(const PartitionOfUnity& partition, Order order, int j) {
  const Interval s = partition.cover().star(j, 2);
  return partition.cover().family() == CoverFamily::I ? s.measure(Measure::Mu, order) : s.length();
}

namespace {

struct CommutatorPlan {
  std::vector<double> times;  // grid times plus every cap, ascending
  std::map<int, std::size_t> cap_index;
};

CommutatorPlan commutator_plan(const PartitionOfUnity& partition, Order order, const std::vector<int>& indices,
                               const TimeGrid& grid) {
  CommutatorPlan plan;
  plan.times = grid.times;
  for (int j : indices) {
    const double cap = local_time_cap(partition, order, j);
    if (cap >= grid.t_min()) plan.times.push_back(cap);
  }
  std::sort(plan.times.begin(), plan.times.end());
  plan.times.erase(std::unique(plan.times.begin(), plan.times.end()), plan.times.end());
  for (int j : indices) {
    const double cap = local_time_cap(partition, order, j);
    if (cap < grid.t_min()) continue;
    plan.cap_index[j] = static_cast<std::size_t>(std::lower_bound(plan.times.begin(), plan.times.end(), cap) -
                                                 plan.times.begin());
  }
  return plan;
}

std::vector<int> contributing(const PartitionOfUnity& partition, double x, double y) {
  std::vector<int> out;
  for (const auto& [j, v] : partition.at(x)) out.push_back(j);
  for (const auto& [j, v] : partition.at(y)) out.push_back(j);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SeriesKernel commutator_kind(const PartitionOfUnity& partition) {
  return partition.cover().family() == CoverFamily::I ? SeriesKernel::PoissonMu : SeriesKernel::PoissonLebesgue;
}

/// sup over times[0..cap] of the kernel column `col` (values[k * stride + col]).
double sup_until(const std::vector<double>& values, std::size_t stride, std::size_t col, std::size_t cap) {
  double m = 0.0;
  for (std::size_t k = 0; k <= cap; ++k) m = std::max(m, std::fabs(values[k * stride + col]));
  return m;
}

}  // namespace

CommutatorValue commutator_kernel(const EigenBasis& basis, const PartitionOfUnity& partition, double x, double y,
                                  const TimeGrid& grid) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) throw DomainError("commutator_kernel: x, y must lie in (0, 1)");
  CommutatorValue out;
  if (x == y) return out;
  const std::vector<int> idx = contributing(partition, x, y);
  const CommutatorPlan plan = commutator_plan(partition, basis.order(), idx, grid);
  const double xs[] = {x};
  const double ys[] = {y};
  const KernelGrid g = kernel_grid(basis, commutator_kind(partition), plan.times, xs, ys);
  for (int j : idx) {
    const double d = std::fabs(partition.value(j, x) - partition.value(j, y));
    const auto cap = plan.cap_index.find(j);
    if (cap == plan.cap_index.end()) {
      if (d != 0.0) out.unresolved.push_back(j);
      continue;
    }
    const double v = d == 0.0 ? 0.0 : d * sup_until(g.values, 1, 0, cap->second);
    out.terms.emplace_back(j, v);
    out.value += v;
  }
  return out;
}

CommutatorRow commutator_row_integral(const EigenBasis& basis, const PartitionOfUnity& partition, double y,
                                      const QuadratureRule& rule, const TimeGrid& grid) {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("commutator_row_integral: y must lie in (0, 1)");
  std::vector<int> all;
  for (double x : rule.nodes) {
    for (int j : contributing(partition, x, y)) all.push_back(j);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const CommutatorPlan plan = commutator_plan(partition, basis.order(), all, grid);
  const double ys[] = {y};
  const std::size_t n = rule.size();
  const KernelGrid g = kernel_grid(basis, commutator_kind(partition), plan.times, rule.nodes, ys);
  CommutatorRow row;
  row.y = y;
  std::map<int, double> by;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    if (x == y) continue;
    for (int j : contributing(partition, x, y)) {
      const double d = std::fabs(partition.value(j, x) - partition.value(j, y));
      if (d == 0.0) continue;
      const auto cap = plan.cap_index.find(j);
      if (cap == plan.cap_index.end()) {
        row.unresolved_weight += rule.weights[i];
        continue;
      }
      const double v = rule.weights[i] * d * sup_until(g.values, n, i, cap->second);
      by[j] += v;
      row.integral += v;
    }
  }
  row.by_index.assign(by.begin(), by.end());
  return row;
}

}  // namespace fbh
