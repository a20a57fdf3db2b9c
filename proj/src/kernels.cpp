#include "fbh/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fbh/simd.hpp"

namespace fbh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowKind { Phi, Psi, Chi };

struct Series {
  Symbol symbol;
  int lambda_power;  // 0 or 1
  RowKind x_row;
  RowKind y_row;
};

struct Component {
  Series series;
  double scale;  // value = sum of scale * series
};

// |row_n(x)| <= K lambda_n^p for both candidates (K, p).
struct Amplitude {
  std::array<double, 2> k;
  std::array<double, 2> p;
};

Amplitude amplitude(const EigenBasis& b, RowKind kind, double x) {
  const double nu = b.nu();
  const double kappa = b.norm_growth();
  const double c0 = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
  const double c1 = 1.0 / (std::pow(2.0, nu + 1.0) * std::tgamma(nu + 2.0));
  switch (kind) {
    case RowKind::Phi:
      return {{x > 0.0 ? b.psi_bound() * std::pow(x, -nu - 0.5) : kInf, c0 * kappa}, {0.0, nu + 0.5}};
    case RowKind::Psi:
      return {{b.psi_bound(), c0 * kappa * std::pow(x, nu + 0.5)}, {0.0, nu + 0.5}};
    case RowKind::Chi:
      return {{b.chi_bound(), c1 * kappa * std::pow(x, nu + 1.5)}, {0.0, nu + 1.5}};
  }
  return {};
}

double tail_at(const EigenBasis& b, const Series& s, const Amplitude& ax, const Amplitude& ay, double t,
               double lambda_next) {
  double best = kInf;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double k = ax.k[i] * ay.k[j];
      if (!std::isfinite(k)) continue;
      const double p = ax.p[i] + ay.p[j] + s.lambda_power;
      best = std::min(best, geometric_tail(s.symbol, t, lambda_next, p, b.spacing_lower_bound(), k));
    }
  }
  return best;
}

// Smallest N whose certified tail is <= tol; tail reported through `tail`.
std::size_t terms_needed(const EigenBasis& b, const Series& s, const Amplitude& ax, const Amplitude& ay, double t,
                         double tol, double& tail, const char* op) {
  const auto lam = b.lambdas();
  const std::size_t last = std::min(lam.size(), kSeriesTermCap) - 1;
  if (!(tail_at(b, s, ax, ay, t, lam[last]) <= tol)) {
    throw ConvergenceError(op, "series tail above tolerance at t = " + std::to_string(t) +
                                   " within the zero table (enlarge zero table)");
  }
  std::size_t lo = 0;
  std::size_t hi = last;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (tail_at(b, s, ax, ay, t, lam[mid]) <= tol) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  tail = tail_at(b, s, ax, ay, t, lam[lo]);
  return lo;
}

std::vector<Component> components(SeriesKernel kind, double nu, double x, double y) {
  const Series pmu{Symbol::Poisson, 0, RowKind::Phi, RowKind::Phi};
  const Series pleb{Symbol::Poisson, 0, RowKind::Psi, RowKind::Psi};
  const Series delta{Symbol::Poisson, 1, RowKind::Chi, RowKind::Psi};
  switch (kind) {
    case SeriesKernel::PoissonMu:
      return {{pmu, 1.0}};
    case SeriesKernel::PoissonLebesgue:
      return {{pleb, 1.0}};
    case SeriesKernel::HeatMu:
      return {{{Symbol::Heat, 0, RowKind::Phi, RowKind::Phi}, 1.0}};
    case SeriesKernel::HeatLebesgue:
      return {{{Symbol::Heat, 0, RowKind::Psi, RowKind::Psi}, 1.0}};
    case SeriesKernel::DeltaPoisson:
      return {{delta, 1.0}};
    case SeriesKernel::DxPoissonMu:
      return {{delta, -std::pow(x * y, -nu - 0.5)}};
    case SeriesKernel::DyPoissonLebesgue:
      return {{pleb, (nu + 0.5) / y}, {{Symbol::Poisson, 1, RowKind::Psi, RowKind::Chi}, -1.0}};
  }
  return {};
}

void fill_row(const EigenBasis& b, RowKind kind, double x, std::span<double> out) {
  switch (kind) {
    case RowKind::Phi:
      b.phi_row(x, out);
      break;
    case RowKind::Psi:
      b.psi_row(x, out);
      break;
    case RowKind::Chi:
      b.chi_row(x, out);
      break;
  }
}

void check_point(SeriesKernel kind, double t, double x, double y) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel: t must be positive");
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) throw DomainError("kernel: x, y must lie in [0, 1]");
  if (kind == SeriesKernel::DxPoissonMu && !(x > 0.0 && y > 0.0)) {
    throw DomainError("dx_poisson_kernel_L: x and y must be positive");
  }
  if (kind == SeriesKernel::DyPoissonLebesgue && !(y > 0.0)) throw DomainError("dy_poisson_kernel_Lsq: y must be positive");
}

}  // namespace

std::string_view kernel_name(SeriesKernel k) noexcept {
  switch (k) {
    case SeriesKernel::PoissonMu:
      return "poisson_mu";
    case SeriesKernel::PoissonLebesgue:
      return "poisson_lebesgue";
    case SeriesKernel::HeatMu:
      return "heat_mu";
    case SeriesKernel::HeatLebesgue:
      return "heat_lebesgue";
    case SeriesKernel::DeltaPoisson:
      return "delta_poisson";
    case SeriesKernel::DxPoissonMu:
      return "dx_poisson_mu";
    case SeriesKernel::DyPoissonLebesgue:
      return "dy_poisson_lebesgue";
  }
  return "";
}

KernelGrid kernel_grid(const EigenBasis& basis, SeriesKernel kind, std::span<const double> ts,
                       std::span<const double> xs, std::span<const double> ys, double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("kernel_grid: tolerance must be positive");
  for (double t : ts) check_point(kind, t, 0.5, 0.5);
  for (double x : xs) check_point(kind, 1.0, x, 0.5);
  for (double y : ys) check_point(kind, 1.0, 0.5, y);
  KernelGrid g;
  g.kind = kind;
  g.ts.assign(ts.begin(), ts.end());
  g.xs.assign(xs.begin(), xs.end());
  g.ys.assign(ys.begin(), ys.end());
  g.values.assign(ts.size() * xs.size() * ys.size(), 0.0);
  if (g.values.empty()) return g;
  const double nu = basis.nu();
  const std::string op(kernel_name(kind));

  // Certified prefix length of every component at every grid point.
  const std::size_t ncomp = components(kind, nu, 0.5, 0.5).size();
  std::vector<std::size_t> terms(g.values.size() * ncomp);
  std::vector<Amplitude> amp_x(xs.size() * 3);
  std::vector<Amplitude> amp_y(ys.size() * 3);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int r = 0; r < 3; ++r) amp_x[3 * i + r] = amplitude(basis, static_cast<RowKind>(r), xs[i]);
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    for (int r = 0; r < 3; ++r) amp_y[3 * j + r] = amplitude(basis, static_cast<RowKind>(r), ys[j]);
  }
  std::size_t longest = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const auto comps = components(kind, nu, xs[i], ys[j]);
        const std::size_t idx = (k * xs.size() + i) * ys.size() + j;
        double total_tail = 0.0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
          const Series& s = comps[c].series;
          const double share = tolerance / (static_cast<double>(comps.size()) * std::fabs(comps[c].scale));
          double tail = 0.0;
          const std::size_t n = terms_needed(basis, s, amp_x[3 * i + static_cast<int>(s.x_row)],
                                             amp_y[3 * j + static_cast<int>(s.y_row)], ts[k], share, tail,
                                             op.c_str());
          terms[idx * ncomp + c] = n;
          longest = std::max(longest, n);
          total_tail += std::fabs(comps[c].scale) * tail;
        }
        g.tail_bound = std::max(g.tail_bound, total_tail);
      }
    }
  }
  g.max_terms = longest;
  if (longest == 0) return g;

  // Shared rows and multiplier vectors.
  const auto proto = components(kind, nu, 0.5, 0.5);
  auto rows_for = [&](std::span<const double> pts, RowKind kind_r) {
    std::vector<double> rows(pts.size() * longest);
    for (std::size_t i = 0; i < pts.size(); ++i) fill_row(basis, kind_r, pts[i], {rows.data() + i * longest, longest});
    return rows;
  };
  const auto lam = basis.lambdas();
  std::vector<std::vector<double>> xrows(ncomp);
  std::vector<std::vector<double>> yrows(ncomp);
  for (std::size_t c = 0; c < ncomp; ++c) {
    bool reused = false;
    for (std::size_t d = 0; d < c; ++d) {
      if (proto[d].series.x_row == proto[c].series.x_row) {
        xrows[c] = xrows[d];
        reused = true;
        break;
      }
    }
    if (!reused) xrows[c] = rows_for(xs, proto[c].series.x_row);
    reused = false;
    for (std::size_t d = 0; d < c; ++d) {
      if (proto[d].series.y_row == proto[c].series.y_row) {
        yrows[c] = yrows[d];
        reused = true;
        break;
      }
    }
    if (!reused) yrows[c] = rows_for(ys, proto[c].series.y_row);
  }
  std::vector<double> w(longest);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t c = 0; c < ncomp; ++c) {
      const Series& s = proto[c].series;
      for (std::size_t n = 0; n < longest; ++n) {
        w[n] = symbol_value(s.symbol, ts[k], lam[n]) * (s.lambda_power == 1 ? lam[n] : 1.0);
      }
      for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
          const std::size_t idx = (k * xs.size() + i) * ys.size() + j;
          const std::size_t n = terms[idx * ncomp + c];
          if (n == 0) continue;
          const double scale = components(kind, nu, xs[i], ys[j])[c].scale;
          g.values[idx] += scale * simd::dot3(std::span<const double>(w.data(), n),
                                              std::span<const double>(xrows[c].data() + i * longest, n),
                                              std::span<const double>(yrows[c].data() + j * longest, n));
        }
      }
    }
  }
  return g;
}

KernelEval evaluate_kernel(const EigenBasis& basis, SeriesKernel kind, double t, double x, double y,
                           double tolerance) {
  check_point(kind, t, x, y);
  const double tv[1] = {t};
  const double xv[1] = {x};
  const double yv[1] = {y};
  const KernelGrid g = kernel_grid(basis, kind, tv, xv, yv, tolerance);
  return {t, x, y, g.values[0], g.max_terms, g.tail_bound};
}

KernelEval poisson_kernel_L(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::PoissonMu, t, x, y);
}
KernelEval poisson_kernel_Lsq(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::PoissonLebesgue, t, x, y);
}
KernelEval heat_kernel_L(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::HeatMu, t, x, y);
}
KernelEval delta_L_poisson_kernel(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::DeltaPoisson, t, x, y);
}
KernelEval dx_poisson_kernel_L(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::DxPoissonMu, t, x, y);
}
KernelEval dy_poisson_kernel_Lsq(const EigenBasis& basis, double t, double x, double y) {
  return evaluate_kernel(basis, SeriesKernel::DyPoissonLebesgue, t, x, y);
}

double heat_kernel_tilde(const EigenBasis& basis, double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("heat_kernel_tilde: t must be positive");
  if (!(x >= 0.0 && y >= 0.0)) throw DomainError("heat_kernel_tilde: x, y must be nonnegative");
  if (x >= 1.0 || y >= 1.0) return 0.0;
  return heat_kernel_L(basis, t, x, y).value;
}

// ---------------------------------------------------------------- half-line

double heat_kernel_halfline(Order order, double t, double x, double y) {
  if (!(t > 0.0 && x > 0.0 && y > 0.0)) throw DomainError("heat_kernel_halfline: t, x, y must be positive");
  const double nu = order.value();
  const double z = x * y / (2.0 * t);
  const double d = x - y;
  const double v = std::exp(-d * d / (4.0 * t) - nu * std::log(x * y)) / (2.0 * t) * specfun::bessel_i_scaled(nu, z);
  if (!std::isfinite(v)) throw DomainError("heat_kernel_halfline: value overflows");
  return v;
}

double dy_heat_kernel_halfline(Order order, double t, double x, double y) {
  if (!(t > 0.0 && x > 0.0 && y > 0.0)) throw DomainError("dy_heat_kernel_halfline: t, x, y must be positive");
  const double nu = order.value();
  const double z = x * y / (2.0 * t);
  const double d = x - y;
  const double pre = std::exp(-d * d / (4.0 * t) - nu * std::log(x * y)) / (2.0 * t);
  const double v = pre * (-(y / (2.0 * t)) * specfun::bessel_i_scaled(nu, z) +
                          (x / (2.0 * t)) * specfun::bessel_i_scaled(nu + 1.0, z));
  if (!std::isfinite(v)) throw DomainError("dy_heat_kernel_halfline: value overflows");
  return v;
}

double poisson_kernel_halfline(Order order, double t, double x, double y) {
  if (!(t > 0.0 && x > 0.0 && y > 0.0)) throw DomainError("poisson_kernel_halfline: t, x, y must be positive");
  std::vector<double> edges{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  for (double scale : {std::fabs(x - y), x + y}) {
    if (scale <= 0.0) continue;
    for (int k = -3; k <= 3; ++k) {
      const double v = t / scale * std::ldexp(1.0, k);
      if (v > 0.0 && v < 8.0) edges.push_back(v);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const QuadratureRule& gl = gauss_legendre(64);
  double s = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p];
    const double h = 0.5 * (edges[p + 1] - a);
    if (h < 1e-14) continue;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double v = a + h * (gl.nodes[i] + 1.0);
      const double heat_time = t * t / (4.0 * v * v);
      s += h * gl.weights[i] * std::exp(-v * v) * heat_kernel_halfline(order, heat_time, x, y);
    }
  }
  const double value = 2.0 / std::sqrt(std::numbers::pi) * s;
  if (!std::isfinite(value)) throw ConvergenceError("poisson_kernel_halfline", "subordination integral diverged");
  return value;
}

double poisson_kernel_halfline_closed(Order order, double t, double x, double y) {
  if (!(t > 0.0 && x > 0.0 && y > 0.0)) {
    throw DomainError("poisson_kernel_halfline_closed: t, x, y must be positive");
  }
  const double nu = order.value();
  const double q = nu + 1.5;
  const double d = x - y;
  const double gap = d * d + t * t;  // A - B
  const double b = 2.0 * x * y;
  const double two_nu = 2.0 * nu;
  // sin^{2nu} th / (gap + 2b sin^2(th/2))^q with the th^{2nu} factor removed.
  auto near_zero = [&](double th) {
    const double s = std::sin(0.5 * th);
    const double ratio = th > 0.0 ? std::sin(th) / th : 1.0;
    return std::pow(ratio, two_nu) * std::pow(gap + 2.0 * b * s * s, -q);
  };
  // Same in ph = pi - th: denominator gap + 2b - 2b sin^2(ph/2).
  auto near_pi = [&](double ph) {
    const double s = std::sin(0.5 * ph);
    const double ratio = ph > 0.0 ? std::sin(ph) / ph : 1.0;
    return std::pow(ratio, two_nu) * std::pow(gap + 2.0 * b - 2.0 * b * s * s, -q);
  };
  const double half = 0.5 * std::numbers::pi;
  const double width = std::sqrt(gap / b);
  double sum = 0.0;
  // (0, pi/2]: Jacobi panel of width ~ the peak width, then doubling panels.
  const double first = std::min(0.5 * width, half);
  {
    const QuadratureRule r = gauss_jacobi_left(first, two_nu, 20);
    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * near_zero(r.nodes[i]);
  }
  for (double a = first; a < half;) {
    const double c = std::min(2.0 * a, half);
    const QuadratureRule r = gauss_on(a, c, 20);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double th = r.nodes[i];
      sum += r.weights[i] * std::pow(th, two_nu) * near_zero(th);
    }
    a = c;
  }
  // (pi/2, pi): smooth apart from the ph^{2nu} factor at ph = 0.
  {
    const QuadratureRule r = gauss_jacobi_left(0.25 * std::numbers::pi, two_nu, 24);
    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * near_pi(r.nodes[i]);
    const QuadratureRule g = gauss_on(0.25 * std::numbers::pi, half, 24);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ph = g.nodes[i];
      sum += g.weights[i] * std::pow(ph, two_nu) * near_pi(ph);
    }
  }
  return 2.0 * (nu + 0.5) * t / std::numbers::pi * sum;
}

// ---------------------------------------------------------------- estimates

std::vector<double> EstimateGrid::t_values() const {
  const std::size_t n = (points - 1) * (std::size_t{1} << refinement) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = t_min * std::pow(t_max / t_min, n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return out;
}

std::vector<double> EstimateGrid::x_values() const {
  const std::size_t n = (points - 1) * (std::size_t{1} << refinement) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = x_min + (x_max - x_min) * (n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return out;
}

std::string EstimateGrid::describe() const {
  const std::size_t n = (points - 1) * (std::size_t{1} << refinement) + 1;
  char buf[160];
  std::snprintf(buf, sizeof buf, "t geometric [%g, %g] x %zu; x, y uniform [%g, %g] x %zu", t_min, t_max, n, x_min,
                x_max, n);
  return buf;
}

namespace {

enum class Source { Series, HalfHeat, HalfHeatDy };

struct LemmaSpec {
  const char* id;
  Source source;
  SeriesKernel kind;
  bool two_sided;
  double t_min;
  double t_max;
  double x_max;
};

constexpr double kGaussC = 0.2;

constexpr LemmaSpec kLemmas[] = {
    {"sharp-Pcal", Source::Series, SeriesKernel::PoissonMu, true, 0.01, 1.0, 0.98},
    {"sharp-Pcal-large-t", Source::Series, SeriesKernel::PoissonMu, true, 1.5, 5.0, 0.98},
    {"sharp-P", Source::Series, SeriesKernel::PoissonLebesgue, true, 0.01, 1.0, 0.98},
    {"sharp-P-large-t", Source::Series, SeriesKernel::PoissonLebesgue, true, 1.5, 5.0, 0.98},
    {"delta-P", Source::Series, SeriesKernel::DeltaPoisson, false, 0.01, 1.0, 0.98},
    {"dx-Pcal", Source::Series, SeriesKernel::DxPoissonMu, false, 0.01, 1.0, 0.98},
    {"dy-P", Source::Series, SeriesKernel::DyPoissonLebesgue, false, 0.01, 1.0, 0.98},
    {"gauss-T", Source::Series, SeriesKernel::HeatMu, false, 0.01, 0.9, 0.98},
    {"heat-large-t", Source::Series, SeriesKernel::HeatMu, true, 1.0, 5.0, 0.98},
    {"gauss-Thalf", Source::HalfHeat, SeriesKernel::HeatMu, false, 0.001, 1.0, 2.98},
    {"gauss-dThalf", Source::HalfHeatDy, SeriesKernel::HeatMu, false, 0.001, 1.0, 2.98},
};

const LemmaSpec& lemma(const std::string& id) {
  for (const auto& l : kLemmas) {
    if (id == l.id) return l;
  }
  throw DomainError("unknown estimate id: " + id);
}

// Comparand (two-sided) or bound (one-sided); `aux` is P_t(x,y) for dy-P.
double comparand(const LemmaSpec& l, const EigenBasis& b, double t, double x, double y, double aux) {
  const double nu = b.nu();
  const double d2 = (x - y) * (x - y);
  const double lam1 = b.lambda(1);
  const std::string id = l.id;
  if (id == "sharp-Pcal" || id == "sharp-P") {
    double c = std::pow(t * t + x * x + y * y, -nu - 0.5) * (1.0 - x) * (1.0 - y) /
               (t * t + (1.0 - x) * (1.0 - x) + (1.0 - y) * (1.0 - y)) * t / (t * t + d2);
    if (id == "sharp-P") c *= std::pow(x * y, nu + 0.5);
    return c;
  }
  if (id == "sharp-Pcal-large-t") return (1.0 - x) * (1.0 - y) * std::exp(-t * lam1);
  if (id == "sharp-P-large-t") return std::pow(x * y, nu + 0.5) * (1.0 - x) * (1.0 - y) * std::exp(-t * lam1);
  if (id == "delta-P") return 1.0 / (t * t + d2);
  if (id == "dx-Pcal") return std::pow(x * y, -nu - 0.5) / (t * t + d2);
  if (id == "dy-P") return 1.0 / (t * t + d2) + std::fabs(aux) / y;
  if (id == "gauss-T") return std::exp(-kGaussC * d2 / t) / (std::sqrt(t) * std::pow(std::max(t, x * y), nu + 0.5));
  if (id == "heat-large-t") return (1.0 - x) * (1.0 - y) * std::exp(-t * lam1 * lam1);
  const double ball = MeasureMu(b.order()).ball(x, std::sqrt(t));
  if (id == "gauss-Thalf") return std::exp(-kGaussC * d2 / t) / ball;
  return std::exp(-kGaussC * d2 / t) / (std::sqrt(t) * ball);  // gauss-dThalf
}

struct LemmaValues {
  std::vector<double> kernel;
  std::vector<double> comp;
};

LemmaValues lemma_values(const EigenBasis& b, const LemmaSpec& l, std::span<const double> ts,
                         std::span<const double> xs, std::span<const double> ys) {
  LemmaValues out;
  const std::size_t total = ts.size() * xs.size() * ys.size();
  out.kernel.resize(total);
  out.comp.resize(total);
  std::vector<double> aux(total, 0.0);
  const bool dy = l.kind == SeriesKernel::DyPoissonLebesgue && l.source == Source::Series;
  if (dy) aux = kernel_grid(b, SeriesKernel::PoissonLebesgue, ts, xs, ys).values;
  double smallest = kInf;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const std::size_t idx = (k * xs.size() + i) * ys.size() + j;
        out.comp[idx] = comparand(l, b, ts[k], xs[i], ys[j], aux[idx]);
        smallest = std::min(smallest, out.comp[idx]);
      }
    }
  }
  if (l.source == Source::Series) {
    // Truncation error far below the smallest comparand.
    const double tol = std::min(kSeriesTolerance, 1e-6 * smallest);
    out.kernel = kernel_grid(b, l.kind, ts, xs, ys, tol).values;
  } else {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
          const std::size_t idx = (k * xs.size() + i) * ys.size() + j;
          out.kernel[idx] = l.source == Source::HalfHeat ? heat_kernel_halfline(b.order(), ts[k], xs[i], ys[j])
                                                         : dy_heat_kernel_halfline(b.order(), ts[k], xs[i], ys[j]);
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> estimate_lemmas() {
  std::vector<std::string> ids;
  for (const auto& l : kLemmas) ids.emplace_back(l.id);
  return ids;
}

EstimateGrid default_estimate_grid(const std::string& lemma_id) {
  const LemmaSpec& l = lemma(lemma_id);
  EstimateGrid g;
  g.t_min = l.t_min;
  g.t_max = l.t_max;
  g.x_max = l.x_max;
  return g;
}

EstimateReport check_sharp_estimates(const EigenBasis& basis, const std::string& lemma_id, const EstimateGrid& grid) {
  const LemmaSpec& l = lemma(lemma_id);
  if (grid.points < 2) throw DomainError("check_sharp_estimates: need at least 2 points per axis");
  const auto ts = grid.t_values();
  const auto xs = grid.x_values();
  const LemmaValues v = lemma_values(basis, l, ts, xs, xs);
  EstimateReport r;
  r.lemma_id = lemma_id;
  r.grid = grid.describe();
  r.two_sided = l.two_sided;
  r.min_ratio = kInf;
  r.max_ratio = -kInf;
  Witness lo;
  Witness hi;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const std::size_t idx = (k * xs.size() + i) * xs.size() + j;
        const double ratio = l.two_sided ? v.kernel[idx] / v.comp[idx] : std::fabs(v.kernel[idx]) / v.comp[idx];
        if (ratio < r.min_ratio) {
          r.min_ratio = ratio;
          lo = {ts[k], xs[i], xs[j], ratio};
        }
        if (ratio > r.max_ratio) {
          r.max_ratio = ratio;
          hi = {ts[k], xs[i], xs[j], ratio};
        }
      }
    }
  }
  r.witnesses = {lo, hi};
  return r;
}

double estimate_ratio(const EigenBasis& basis, const std::string& lemma_id, double t, double x, double y) {
  const LemmaSpec& l = lemma(lemma_id);
  const double tv[1] = {t};
  const double xv[1] = {x};
  const double yv[1] = {y};
  const LemmaValues v = lemma_values(basis, l, tv, xv, yv);
  return l.two_sided ? v.kernel[0] / v.comp[0] : std::fabs(v.kernel[0]) / v.comp[0];
}

}  // namespace fbh
