#include "fbh/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace fbh {

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
  return s;
}

double QuadratureRule::integrate(std::span<const double> values) const {
  if (values.size() != nodes.size()) throw DomainError("QuadratureRule::integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * values[i];
  return s;
}

void QuadratureRule::append(const QuadratureRule& other) {
  nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw DomainError("gauss_legendre: n must be in [1, 512]");
  static std::mutex m;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule gauss_on(double a, double b, int n) {
  const QuadratureRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * g.nodes[i];
    r.weights[i] = half * g.weights[i];
  }
  return r;
}

namespace {

// Rule for int_0^1 x^p g(x) dx by Golub-Welsch on the Jacobi matrix of the
// weight (1+t)^p on [-1, 1].
QuadratureRule unit_jacobi_rule(double p, int n) {
  const double b = p;
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + b;
    jm(k, k) = k == 0 ? b / (b + 2.0) : (b * b) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double sm = 2.0 * m + b;
      const double beta = 4.0 * m * m * (m + b) * (m + b) / (sm * sm * (sm + 1.0) * (sm - 1.0));
      jm(k, k + 1) = jm(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  const double mu0 = std::pow(2.0, b + 1.0) / (b + 1.0);
  const double scale = std::pow(0.5, b + 1.0);
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.nodes[i] = 0.5 * (1.0 + t);
    r.weights[i] = scale * mu0 * v * v;
  }
  return r;
}

}  // namespace

QuadratureRule gauss_jacobi_left(double a, double p, int n) {
  if (!(a > 0.0) || !(p > -1.0) || n < 1) throw DomainError("gauss_jacobi_left: bad arguments");
  static std::mutex mu;
  static std::map<std::pair<double, int>, QuadratureRule> cache;
  QuadratureRule r;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({p, n});
    if (it == cache.end()) it = cache.emplace(std::make_pair(p, n), unit_jacobi_rule(p, n)).first;
    r = it->second;
  }
  const double scale = std::pow(a, p + 1.0);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] *= a;
    r.weights[i] *= scale;
  }
  return r;
}

QuadratureRule composite(std::span<const double> edges, int per_panel) {
  QuadratureRule r;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (edges[k + 1] > edges[k]) r.append(gauss_on(edges[k], edges[k + 1], per_panel));
  }
  return r;
}

std::vector<double> graded_edges(double lo, double hi, std::span<const double> focus, double finest, double ratio) {
  if (!(hi > lo) || !(finest > 0.0) || !(ratio >= 1.0)) throw DomainError("graded_edges: bad arguments");
  std::vector<double> pts{lo, hi};
  std::vector<double> foci;
  for (double f : focus) {
    if (f >= lo && f <= hi) {
      pts.push_back(f);
      foci.push_back(f);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto is_focus = [&](double p) { return std::find(foci.begin(), foci.end(), p) != foci.end(); };

  std::vector<double> edges;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k];
    const double b = pts[k + 1];
    const bool fa = is_focus(a);
    const bool fb = is_focus(b);
    edges.push_back(a);
    if (!fa && !fb) continue;
    // Grow panels from the focused end(s) until they meet.
    std::vector<double> left{a};
    std::vector<double> right{b};
    double wl = finest;
    double wr = finest;
    double l = a;
    double r = b;
    while (true) {
      const double gap = r - l;
      const double step_l = fa ? wl : 0.0;
      const double step_r = fb ? wr : 0.0;
      if (step_l + step_r >= 0.75 * gap) break;
      if (fa) {
        l += wl;
        left.push_back(l);
        wl *= ratio;
      }
      if (fb) {
        r -= wr;
        right.push_back(r);
        wr *= ratio;
      }
    }
    edges.insert(edges.end(), left.begin() + 1, left.end());
    for (auto it = right.rbegin(); it != right.rend() - 1; ++it) edges.push_back(*it);
  }
  edges.push_back(pts.back());
  return edges;
}

QuadratureRule with_mu_density(QuadratureRule rule, Order order) {
  const double p = 2.0 * order.value() + 1.0;
  for (std::size_t i = 0; i < rule.size(); ++i) rule.weights[i] *= std::pow(rule.nodes[i], p);
  return rule;
}

QuadratureRule make_quadrature(Domain domain, std::size_t n_nodes, Measure measure, Order order,
                               double halfline_cutoff) {
  if (n_nodes < 8) throw DomainError("make_quadrature: need at least 8 nodes");
  if (domain == Domain::HalfLine && !(halfline_cutoff > 1.0)) {
    throw DomainError("make_quadrature: half-line cutoff must exceed 1");
  }
  const double hi = domain == Domain::UnitInterval ? 1.0 : halfline_cutoff;
  const double p = 2.0 * order.value() + 1.0;
  const bool smooth_weight = measure == Measure::Lebesgue || std::fabs(p - std::round(p)) < 1e-14;
  constexpr int kPerPanel = 16;
  const std::size_t panels = std::max<std::size_t>(1, n_nodes / kPerPanel);
  const int per = panels == 1 ? static_cast<int>(n_nodes) : kPerPanel;
  std::vector<double> edges;
  for (std::size_t k = 0; k <= panels; ++k) edges.push_back(hi * static_cast<double>(k) / panels);
  if (smooth_weight) {
    QuadratureRule r = composite(edges, per);
    return measure == Measure::Mu ? with_mu_density(std::move(r), order) : r;
  }
  // The panel at 0 carries the x^{2nu+1} branch point in its Jacobi weight.
  QuadratureRule r = gauss_jacobi_left(edges[1], p, per);
  std::vector<double> rest(edges.begin() + 1, edges.end());
  r.append(with_mu_density(composite(rest, per), order));
  return r;
}

double MeasureMu::density(double x) const { return std::pow(x, 2.0 * order_.value() + 1.0); }

double MeasureMu::interval(double a, double b) const {
  if (a < 0.0 || b < a) throw DomainError("MeasureMu::interval: need 0 <= a <= b");
  const double e = 2.0 * order_.value() + 2.0;
  if (a == 0.0) return std::pow(b, e) / e;
  // stable for b - a << a
  return std::pow(a, e) * std::expm1(e * std::log1p((b - a) / a)) / e;
}

double MeasureMu::ball(double x, double r) const {
  if (x < 0.0 || r < 0.0) throw DomainError("MeasureMu::ball: need x, r >= 0");
  return interval(std::max(0.0, x - r), x + r);
}

double MeasureMu::ball_comparand(double x, double s) const {
  return s * std::pow(x + s, 2.0 * order_.value() + 1.0);
}

double measure_of(Measure m, Order order, double a, double b) {
  return m == Measure::Lebesgue ? b - a : MeasureMu(order).interval(a, b);
}

}  // namespace fbh
