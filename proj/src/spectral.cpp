#include "fbh/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fbh/simd.hpp"

namespace fbh {

// ---------------------------------------------------------------- StepFunction

StepFunction::StepFunction(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
  if (values_.empty() && edges_.empty()) return;
  if (edges_.size() != values_.size() + 1) throw DomainError("StepFunction: need one more edge than values");
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (!std::isfinite(edges_[k]) || edges_[k] < 0.0) throw DomainError("StepFunction: edges must be finite and >= 0");
    if (k > 0 && !(edges_[k] > edges_[k - 1])) throw DomainError("StepFunction: edges must increase strictly");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("StepFunction: values must be finite");
  }
}

double StepFunction::lo() const {
  if (empty()) throw DomainError("StepFunction: empty");
  return edges_.front();
}

double StepFunction::hi() const {
  if (empty()) throw DomainError("StepFunction: empty");
  return edges_.back();
}

double StepFunction::operator()(double x) const {
  if (empty() || !(x > edges_.front()) || x > edges_.back()) return 0.0;
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), x);
  return values_[static_cast<std::size_t>(it - edges_.begin()) - 1];
}

double StepFunction::integral(Measure m, Order order) const {
  double s = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) s += values_[k] * measure_of(m, order, edges_[k], edges_[k + 1]);
  return s;
}

double StepFunction::l1_norm(Measure m, Order order) const {
  double s = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    s += std::fabs(values_[k]) * measure_of(m, order, edges_[k], edges_[k + 1]);
  }
  return s;
}

double StepFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

StepFunction StepFunction::scaled(double factor) const {
  StepFunction out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

StepFunction StepFunction::sum(const StepFunction& a, const StepFunction& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::vector<double> edges(a.edges_);
  edges.insert(edges.end(), b.edges_.begin(), b.edges_.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<double> values(edges.size() - 1);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double mid = 0.5 * (edges[k] + edges[k + 1]);
    values[k] = a(mid) + b(mid);
  }
  return StepFunction(std::move(edges), std::move(values));
}

// ---------------------------------------------------------------- tails

double symbol_value(Symbol s, double t, double lambda) {
  return s == Symbol::Poisson ? std::exp(-t * lambda) : std::exp(-t * lambda * lambda);
}

double geometric_tail(Symbol s, double t, double lambda_next, double p, double delta, double k) {
  if (k == 0.0) return 0.0;
  const double lam = lambda_next;
  double ratio;
  double log_first;
  if (s == Symbol::Poisson) {
    if (p > 0.0 && lam < 2.0 * p / t) return std::numeric_limits<double>::infinity();
    ratio = p > 0.0 ? std::exp(-0.5 * t * delta) : std::exp(-t * delta);
    log_first = std::log(k) + p * std::log(lam) - t * lam;
  } else {
    if (p > 0.0 && lam * lam < p / t) return std::numeric_limits<double>::infinity();
    ratio = p > 0.0 ? std::exp(-t * lam * delta) : std::exp(-2.0 * t * lam * delta);
    log_first = std::log(k) + p * std::log(lam) - t * lam * lam;
  }
  return std::exp(log_first) / (1.0 - ratio);
}

// ---------------------------------------------------------------- piecewise cubics

namespace {

constexpr int kCoeffs = PiecewisePolynomial::kMaxDegree + 1;

// Solves the 4x4 system V q = y in place (partial pivoting).
void solve4(double a[kCoeffs][kCoeffs], double y[kCoeffs]) {
  for (int c = 0; c < kCoeffs; ++c) {
    int piv = c;
    for (int r = c + 1; r < kCoeffs; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(y[c], y[piv]);
    for (int r = c + 1; r < kCoeffs; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < kCoeffs; ++k) a[r][k] -= f * a[c][k];
      y[r] -= f * y[c];
    }
  }
  for (int c = kCoeffs - 1; c >= 0; --c) {
    for (int k = c + 1; k < kCoeffs; ++k) y[c] -= a[c][k] * y[k];
    y[c] /= a[c][c];
  }
}

}  // namespace

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> edges, std::vector<double> coeffs)
    : edges_(std::move(edges)), coeffs_(std::move(coeffs)) {
  if (edges_.empty() && coeffs_.empty()) return;
  if (edges_.size() < 2 || coeffs_.size() != kCoeffs * (edges_.size() - 1)) {
    throw DomainError("PiecewisePolynomial: need 4 coefficients per panel");
  }
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (!std::isfinite(edges_[k]) || edges_[k] < 0.0) throw DomainError("PiecewisePolynomial: bad edge");
    if (k > 0 && !(edges_[k] > edges_[k - 1])) throw DomainError("PiecewisePolynomial: edges must increase strictly");
  }
}

PiecewisePolynomial::PiecewisePolynomial(const StepFunction& f) {
  if (f.empty()) return;
  edges_.assign(f.edges().begin(), f.edges().end());
  coeffs_.assign(kCoeffs * f.values().size(), 0.0);
  for (std::size_t k = 0; k < f.values().size(); ++k) coeffs_[kCoeffs * k] = f.values()[k];
}

PiecewisePolynomial PiecewisePolynomial::interpolate(const std::function<double(double)>& f,
                                                     std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("PiecewisePolynomial::interpolate: need at least one panel");
  std::vector<double> coeffs(kCoeffs * (edges.size() - 1));
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double m = 0.5 * (edges[k] + edges[k + 1]);
    const double h = 0.5 * (edges[k + 1] - edges[k]);
    double v[kCoeffs][kCoeffs];
    double q[kCoeffs];
    for (int i = 0; i < kCoeffs; ++i) {
      const double s = std::cos((2 * i + 1) * std::numbers::pi / (2 * kCoeffs));
      q[i] = f(m + h * s);
      double pw = 1.0;
      for (int j = 0; j < kCoeffs; ++j, pw *= s) v[i][j] = pw;
    }
    solve4(v, q);
    // q(s) with s = (x - m)/h, expanded in powers of x.
    static constexpr double binom[kCoeffs][kCoeffs] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    for (int i = 0; i < kCoeffs; ++i) {
      const double qi = q[i] / std::pow(h, i);
      for (int j = 0; j <= i; ++j) coeffs[kCoeffs * k + j] += qi * binom[i][j] * std::pow(-m, i - j);
    }
  }
  return PiecewisePolynomial(std::vector<double>(edges.begin(), edges.end()), std::move(coeffs));
}

double PiecewisePolynomial::operator()(double x) const {
  if (edges_.empty() || !(x > edges_.front()) || x > edges_.back()) return 0.0;
  const auto k = static_cast<std::size_t>(std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin()) - 1;
  const double* c = &coeffs_[kCoeffs * k];
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

double PiecewisePolynomial::l1_norm(Measure m, Order order) const {
  double s = 0.0;
  for (std::size_t k = 0; k < panels(); ++k) {
    const double a = edges_[k];
    const double b = edges_[k + 1];
    QuadratureRule rule = (m == Measure::Mu && a == 0.0) ? gauss_jacobi_left(b, 2.0 * order.value() + 1.0, 24)
                                                         : gauss_on(a, b, 24);
    if (m == Measure::Mu && a > 0.0) rule = with_mu_density(std::move(rule), order);
    const double* c = &coeffs_[kCoeffs * k];
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = rule.nodes[i];
      s += rule.weights[i] * std::fabs(((c[3] * x + c[2]) * x + c[1]) * x + c[0]);
    }
  }
  return s;
}

// ---------------------------------------------------------------- power integrals

namespace {

int panel_nodes(double width) {
  if (width <= 0.05) return 6;
  if (width <= 0.3) return 10;
  return 16;
}

// ladder[j] = J_{nu+j+1}(z), j < size, by forward recurrence (z well above
// the orders) or direct evaluation.
void bessel_ladder(double nu, double z, double j0, double j1, std::span<double> ladder) {
  if (ladder.empty()) return;
  if (z < 2.0 * (nu + static_cast<double>(ladder.size()) + 1.0)) {
    for (std::size_t j = 0; j < ladder.size(); ++j) ladder[j] = specfun::bessel_j(nu + static_cast<double>(j) + 1.0, z);
    return;
  }
  double prev = j0;
  double cur = j1;
  ladder[0] = cur;
  for (std::size_t j = 1; j < ladder.size(); ++j) {
    const double next = 2.0 * (nu + static_cast<double>(j)) / z * cur - prev;
    prev = cur;
    cur = next;
    ladder[j] = cur;
  }
}

struct JacobiHead {
  std::vector<double> nodes;
  std::vector<double> weights;
  double exponent;
};

const JacobiHead& jacobi_head(double exponent) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<JacobiHead>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[exponent];
  if (!slot) {
    const QuadratureRule r = gauss_jacobi_left(1.0, exponent, 24);
    slot = std::make_unique<JacobiHead>(JacobiHead{r.nodes, r.weights, exponent});
  }
  return *slot;
}

// int_0^x u^p J_nu(u) du for 0 < x <= 1 with the u^{p+nu} factor in the weights.
double jacobi_from_zero(double nu, double p, double x) {
  const JacobiHead& h = jacobi_head(p + nu);
  const double scale = std::pow(x, p + nu + 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < h.nodes.size(); ++i) s += h.weights[i] * bessel_j_normalized(nu, x * h.nodes[i]);
  return scale * s;
}

}  // namespace

PowerBesselIntegral::PowerBesselIntegral(double nu, double p) : nu_(nu), p_(p) {
  if (!(p + nu > -1.0)) throw DomainError("PowerBesselIntegral: need p + nu > -1");
  const double z0 = kSwitch;
  const double target = 1e-15 * std::max(1.0, std::pow(z0, p - 0.5));
  double c = 1.0;
  for (int j = 0; j < 80; ++j) {
    c_.push_back(c);
    const double factor = nu + 1.0 + 2.0 * j - p;
    if (std::fabs(factor) < 1e-13) {
      closed_ = true;
      break;
    }
    c *= factor;
    const int k = j + 1;
    if (k > p + 1.0) {
      const double r = std::fabs(c) * std::pow(z0, p - k + 1.0) / (k - p - 1.0);
      if (r <= target) {
        remainder_ = r;
        break;
      }
    }
    if (j == 79) throw ConvergenceError("PowerBesselIntegral", "integration by parts did not reach tolerance");
  }
  if (!closed_) {
    if (nu + static_cast<double>(c_.size()) + 1.0 > 0.5 * z0) {
      throw DomainError("PowerBesselIntegral: order too large for the switch point");
    }
    const double j0 = specfun::bessel_j(nu, z0);
    const double j1 = specfun::bessel_j(nu + 1.0, z0);
    offset_ = 0.0;
    offset_ = quadrature(0.0, z0) - from_bessel(z0, j0, j1);
  }
}

double PowerBesselIntegral::ladder_sum(double z, std::span<const double> ladder) const {
  double s = 0.0;
  double zp = 1.0;
  const double inv = 1.0 / z;
  for (std::size_t j = 0; j < c_.size(); ++j, zp *= inv) s += c_[j] * zp * ladder[j];
  return s;
}

double PowerBesselIntegral::from_bessel(double z, double j0, double j1) const {
  if (z == 0.0) return 0.0;
  double buf[96];
  std::span<double> ladder(buf, c_.size());
  bessel_ladder(nu_, z, j0, j1, ladder);
  return offset_ + std::pow(z, p_) * ladder_sum(z, ladder);
}

double PowerBesselIntegral::operator()(double z) const {
  if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("PowerBesselIntegral: z must be finite and >= 0");
  if (z == 0.0) return 0.0;
  if (closed_ || z >= kSwitch) return from_bessel(z, specfun::bessel_j(nu_, z), specfun::bessel_j(nu_ + 1.0, z));
  return quadrature(0.0, z);
}

double PowerBesselIntegral::quadrature(double a, double b) const {
  if (!(a >= 0.0) || b < a) throw DomainError("PowerBesselIntegral::quadrature: need 0 <= a <= b");
  double s = 0.0;
  if (a < 1.0) {
    const double h = std::min(b, 1.0);
    s += jacobi_from_zero(nu_, p_, h);
    if (a > 0.0) s -= jacobi_from_zero(nu_, p_, a);
    a = h;
  }
  if (b > a) {
    const int pieces = static_cast<int>(std::ceil(b - a));
    const double w = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
      const double lo = a + k * w;
      const QuadratureRule r = gauss_on(lo, lo + w, panel_nodes(w));
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double u = r.nodes[i];
        s += r.weights[i] * std::pow(u, p_) * specfun::bessel_j(nu_, u);
      }
    }
  }
  return s;
}

namespace {

const PowerBesselIntegral& power_integral(double nu, double p) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::unique_ptr<PowerBesselIntegral>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nu, p}];
  if (!slot) slot = std::make_unique<PowerBesselIntegral>(nu, p);
  return *slot;
}

// out[d][n] = H_{p_d}(lambda_n e) for n < count, for every requested degree.
void edge_integrals(const EigenBasis& basis, double e, std::span<const PowerBesselIntegral* const> ints,
                    std::size_t count, std::vector<std::vector<double>>& out) {
  const double nu = basis.nu();
  const auto lam = basis.lambdas();
  std::vector<double> j0(count);
  std::vector<double> j1(count);
  basis.bessel_row(0, e, j0);
  basis.bessel_row(1, e, j1);
  out.assign(ints.size(), std::vector<double>(count, 0.0));

  std::size_t ladder_len = 0;
  bool any_quadrature = false;
  for (const auto* h : ints) {
    if (!h) continue;
    ladder_len = std::max<std::size_t>(ladder_len, static_cast<std::size_t>(h->terms()));
    any_quadrature = any_quadrature || !h->closed_form();
  }
  std::vector<double> ladder(ladder_len);

  const double z0 = PowerBesselIntegral::kSwitch;
  const std::size_t split =
      any_quadrature ? static_cast<std::size_t>(std::lower_bound(lam.begin(), lam.begin() + count, z0 / e) - lam.begin())
                     : 0;

  // Ascending points below the switch: running Gauss sums with shared nodes.
  if (split > 0) {
    std::vector<double> acc(ints.size(), 0.0);
    double pos = 0.0;
    for (std::size_t n = 0; n < split; ++n) {
      const double z = lam[n] * e;
      if (z <= 1.0) {
        for (std::size_t d = 0; d < ints.size(); ++d) {
          if (ints[d] && !ints[d]->closed_form()) acc[d] = jacobi_from_zero(nu, ints[d]->power(), z);
        }
      } else {
        if (pos < 1.0) {
          for (std::size_t d = 0; d < ints.size(); ++d) {
            if (ints[d] && !ints[d]->closed_form()) acc[d] = jacobi_from_zero(nu, ints[d]->power(), 1.0);
          }
          pos = 1.0;
        }
        const int pieces = static_cast<int>(std::ceil(z - pos));
        const double w = (z - pos) / pieces;
        for (int k = 0; k < pieces; ++k) {
          const double lo = pos + k * w;
          const QuadratureRule r = gauss_on(lo, lo + w, panel_nodes(w));
          for (std::size_t i = 0; i < r.size(); ++i) {
            const double u = r.nodes[i];
            const double wj = r.weights[i] * specfun::bessel_j(nu, u);
            for (std::size_t d = 0; d < ints.size(); ++d) {
              if (ints[d] && !ints[d]->closed_form()) acc[d] += wj * std::pow(u, ints[d]->power());
            }
          }
        }
      }
      pos = z;
      for (std::size_t d = 0; d < ints.size(); ++d) {
        if (ints[d] && !ints[d]->closed_form()) out[d][n] = acc[d];
      }
    }
  }

  for (std::size_t n = 0; n < count; ++n) {
    const double z = lam[n] * e;
    if (z == 0.0) continue;
    bool ladder_ready = false;
    for (std::size_t d = 0; d < ints.size(); ++d) {
      const auto* h = ints[d];
      if (!h || (!h->closed_form() && n < split)) continue;
      if (!ladder_ready) {
        bessel_ladder(nu, z, j0[n], j1[n], ladder);
        ladder_ready = true;
      }
      out[d][n] = h->offset() + std::pow(z, h->power()) * h->ladder_sum(z, ladder);
    }
  }
}

}  // namespace

std::vector<double> piecewise_coefficients(const EigenBasis& basis, Family family, const PiecewisePolynomial& f,
                                           std::size_t count) {
  if (count > basis.size()) throw DomainError("piecewise_coefficients: count exceeds the zero table");
  std::vector<double> a(count, 0.0);
  if (f.panels() == 0 || count == 0) return a;
  if (f.edges().back() > 1.0 + 1e-15) throw DomainError("piecewise_coefficients: support must lie in [0, 1]");
  const double nu = basis.nu();
  const auto lam = basis.lambdas();
  const auto c = basis.norm_constants();
  const std::size_t panels = f.panels();
  const auto coeffs = f.coeffs();

  std::array<bool, kCoeffs> used{};
  for (std::size_t k = 0; k < coeffs.size(); ++k) used[k % kCoeffs] = used[k % kCoeffs] || coeffs[k] != 0.0;
  std::array<double, kCoeffs> power{};
  std::array<const PowerBesselIntegral*, kCoeffs> ints{};
  for (int d = 0; d < kCoeffs; ++d) {
    power[d] = family == Family::Mu ? nu + 1.0 + d : d + 0.5;
    if (used[d]) ints[d] = &power_integral(nu, power[d]);
  }

  std::vector<std::vector<double>> h;
  std::vector<double> scale(count);
  for (std::size_t i = 0; i <= panels; ++i) {
    const double e = f.edges()[i];
    if (e == 0.0) continue;
    std::array<double, kCoeffs> jump{};
    bool any = false;
    for (int d = 0; d < kCoeffs; ++d) {
      const double left = i > 0 ? coeffs[kCoeffs * (i - 1) + d] : 0.0;
      const double right = i < panels ? coeffs[kCoeffs * i + d] : 0.0;
      jump[d] = left - right;
      any = any || jump[d] != 0.0;
    }
    if (!any) continue;
    std::array<const PowerBesselIntegral*, kCoeffs> active{};
    for (int d = 0; d < kCoeffs; ++d) active[d] = jump[d] != 0.0 ? ints[d] : nullptr;
    edge_integrals(basis, e, active, count, h);
    for (int d = 0; d < kCoeffs; ++d) {
      if (!active[d]) continue;
      for (std::size_t n = 0; n < count; ++n) {
        a[n] += jump[d] * c[n] * std::pow(lam[n], -(power[d] + 1.0)) * h[d][n];
      }
    }
  }
  return a;
}

std::vector<double> step_coefficients(const EigenBasis& basis, Family family, const StepFunction& f,
                                      std::size_t count) {
  return piecewise_coefficients(basis, family, PiecewisePolynomial(f), count);
}

std::vector<double> function_coefficients(const EigenBasis& basis, Family family,
                                          const std::function<double(double)>& f, std::size_t count,
                                          std::span<const double> breakpoints) {
  if (count > basis.size()) throw DomainError("function_coefficients: count exceeds the zero table");
  std::vector<double> a(count, 0.0);
  if (count == 0) return a;
  std::vector<double> cuts{0.0, 1.0};
  for (double b : breakpoints) {
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double h = std::min(0.05, 1.0 / static_cast<double>(count));
  std::vector<double> edges{0.0};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((cuts[k + 1] - cuts[k]) / h)));
    for (int i = 1; i <= pieces; ++i) edges.push_back(cuts[k] + (cuts[k + 1] - cuts[k]) * i / pieces);
  }
  const Order order = basis.order();
  const double nu = basis.nu();
  std::vector<double> row(count);
  // First panel: the x^{2nu+1} (mu) or x^{nu+1/2} (psi_n / phi_n) factor sits in the weights.
  {
    const double p = family == Family::Mu ? 2.0 * nu + 1.0 : nu + 0.5;
    const QuadratureRule r = gauss_jacobi_left(edges[1], p, 16);
    for (std::size_t i = 0; i < r.size(); ++i) {
      basis.phi_row(r.nodes[i], row);
      simd::axpy(r.weights[i] * f(r.nodes[i]), row, a);
    }
  }
  for (std::size_t k = 1; k + 1 < edges.size(); ++k) {
    QuadratureRule r = gauss_on(edges[k], edges[k + 1], 10);
    if (family == Family::Mu) r = with_mu_density(std::move(r), order);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double fx = f(r.nodes[i]);
      if (fx == 0.0) continue;
      basis.row(family, r.nodes[i], row);
      simd::axpy(r.weights[i] * fx, row, a);
    }
  }
  return a;
}

// ---------------------------------------------------------------- evolution

Evolution evolve(const EigenBasis& basis, Family family, std::span<const double> coeffs, Symbol symbol,
                 std::span<const double> times, std::span<const double> points, double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("evolve: tolerance must be positive");
  if (coeffs.size() > basis.size()) throw DomainError("evolve: more coefficients than zeros");
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("evolve: times must be positive");
  }
  for (double x : points) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("evolve: points must lie in [0, 1]");
  }
  Evolution ev;
  ev.times.assign(times.begin(), times.end());
  ev.points.assign(points.begin(), points.end());
  ev.values.assign(times.size() * points.size(), 0.0);
  ev.terms.assign(times.size(), 0);
  const std::size_t count = coeffs.size();
  if (count == 0 || times.empty()) return ev;

  const auto lam = basis.lambdas();
  const double nu = basis.nu();
  const double delta = basis.spacing_lower_bound();
  // |e_n(x)| <= amp_n uniformly over the requested points.
  double big_p = basis.psi_bound();
  double small_q = 0.0;
  double small_p = 0.0;
  if (family == Family::Mu) {
    double xmin = 1.0;
    for (double x : points) xmin = std::min(xmin, x);
    big_p = xmin > 0.0 ? basis.psi_bound() * std::pow(xmin, -nu - 0.5) : std::numeric_limits<double>::infinity();
    small_q = basis.norm_growth() / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
    small_p = nu + 0.5;
  }
  auto amp = [&](double l) {
    return family == Family::Mu ? std::min(big_p, small_q * std::pow(l, small_p)) : big_p;
  };
  double trailing = 0.0;
  for (std::size_t n = count / 2; n < count; ++n) trailing = std::max(trailing, std::fabs(coeffs[n]));
  // size[n] = |a_n| amp(lambda_n); suffix[n] = max_{m >= n} size[m].
  std::vector<double> size(count);
  std::vector<double> suffix(count + 1, 0.0);
  for (std::size_t n = 0; n < count; ++n) size[n] = std::fabs(coeffs[n]) * amp(lam[n]);
  for (std::size_t n = count; n > 0; --n) suffix[n - 1] = std::max(suffix[n], size[n - 1]);

  std::vector<std::vector<double>> weighted(times.size());
  std::size_t longest = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const double lam_next = lam[count - 1] + delta;
    double beyond = trailing == 0.0 ? 0.0 : geometric_tail(symbol, t, lam_next, 0.0, delta, trailing * big_p);
    if (family == Family::Mu && trailing > 0.0) {
      beyond = std::min(beyond, geometric_tail(symbol, t, lam_next, small_p, delta, trailing * small_q));
    }
    if (!(beyond <= tolerance)) {
      throw ConvergenceError("evolve", "coefficient list too short for t = " + std::to_string(t) +
                                           " (enlarge the zero table)");
    }
    // Skip the block whose crude bound suffix[m] m(t, lambda_m) (count - m) fits.
    std::size_t lo = 0;
    std::size_t hi = count;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      const double bound = suffix[mid] * symbol_value(symbol, t, lam[mid]) * static_cast<double>(count - mid);
      if (beyond + bound <= 0.5 * tolerance) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    double tail = beyond;
    if (lo < count) tail += suffix[lo] * symbol_value(symbol, t, lam[lo]) * static_cast<double>(count - lo);
    std::size_t n = lo;
    while (n > 0) {
      const double term = symbol_value(symbol, t, lam[n - 1]) * size[n - 1];
      if (tail + term > tolerance) break;
      tail += term;
      --n;
    }
    ev.terms[k] = n;
    ev.tail_bound = std::max(ev.tail_bound, tail);
    longest = std::max(longest, n);
    weighted[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) weighted[k][i] = symbol_value(symbol, t, lam[i]) * coeffs[i];
  }

  std::vector<double> row(longest);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (longest > 0) basis.row(family, points[i], row);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const std::size_t n = ev.terms[k];
      ev.values[k * points.size() + i] =
          n == 0 ? 0.0 : simd::dot(std::span<const double>(weighted[k]), std::span<const double>(row.data(), n));
    }
  }
  return ev;
}

}  // namespace fbh
