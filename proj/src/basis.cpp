#include "fbh/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace fbh {

namespace {

// sup_z sqrt(z)|J_m(z)| with a margin covering the scan step and the range
// beyond the scan, where the Hankel envelope applies.
double envelope_bound(double m) {
  const double zmax = std::max(80.0, 2.0 * simd::hankel_fast_threshold(m));
  double best = 0.0;
  for (double z = 0.005; z <= zmax; z += 0.005) best = std::max(best, std::sqrt(z) * std::fabs(specfun::bessel_j(m, z)));
  return 1.02 * std::max(best, std::sqrt(2.0 / std::numbers::pi) * 1.05);
}

thread_local std::vector<double> z_buffer;

}  // namespace

EigenBasis::EigenBasis(Order order, std::size_t size) : zeros_(bessel_zeros(order, size)) {
  const double nu = order.value();
  c_.resize(size);
  double g = std::sqrt(std::numbers::pi);
  for (std::size_t k = 0; k < size; ++k) {
    const double lam = zeros_.zeros()[k];
    c_[k] = std::sqrt(2.0) / std::fabs(specfun::bessel_j(nu + 1.0, lam));
    g = std::max(g, c_[k] / std::sqrt(lam));
  }
  g *= 1.001;
  growth_ = g;
  hankel_[0] = simd::make_hankel_series(nu);
  hankel_[1] = simd::make_hankel_series(nu + 1.0);
  psi_bound_ = g * envelope_bound(nu);
  chi_bound_ = g * envelope_bound(nu + 1.0);
  spacing_ = 0.99 * std::min(zeros_.min_spacing(), std::numbers::pi);

  const QuadratureRule rule = make_quadrature(Domain::UnitInterval, 512, Measure::Mu, order);
  const std::size_t check = std::min<std::size_t>(size, 12);
  std::vector<double> row(check);
  std::vector<double> norms(check, 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    phi_row(rule.nodes[i], row);
    for (std::size_t k = 0; k < check; ++k) norms[k] += rule.weights[i] * row[k] * row[k];
  }
  for (std::size_t k = 0; k < check; ++k) {
    if (std::fabs(norms[k] - 1.0) > 1e-9) {
      throw ConvergenceError("EigenBasis", "eigenfunction " + std::to_string(k + 1) +
                                               " failed the unit-norm check: " + std::to_string(norms[k]));
    }
  }
}

void EigenBasis::check_index(std::size_t n) const {
  if (n < 1 || n > size()) {
    throw DomainError("eigenfunction index " + std::to_string(n) + " outside 1.." + std::to_string(size()));
  }
}

double EigenBasis::norm_constant(std::size_t n) const {
  check_index(n);
  return c_[n - 1];
}

double EigenBasis::phi(std::size_t n, double x) const {
  check_index(n);
  if (x < 0.0) throw DomainError("phi: x must be nonnegative");
  const double lam = lambda(n);
  return c_[n - 1] * std::pow(lam, nu()) * bessel_j_normalized(nu(), lam * x);
}

double EigenBasis::psi(std::size_t n, double x) const {
  check_index(n);
  if (x < 0.0) throw DomainError("psi: x must be nonnegative");
  return c_[n - 1] * std::sqrt(x) * specfun::bessel_j(nu(), lambda(n) * x);
}

double EigenBasis::eigenfunction(Family f, std::size_t n, double x) const {
  return f == Family::Mu ? phi(n, x) : psi(n, x);
}

double EigenBasis::chi(std::size_t n, double x) const {
  check_index(n);
  if (x < 0.0) throw DomainError("chi: x must be nonnegative");
  return c_[n - 1] * std::sqrt(x) * specfun::bessel_j(nu() + 1.0, lambda(n) * x);
}

void EigenBasis::bessel_row(int shift, double x, std::span<double> out) const {
  if (out.size() > size()) throw DomainError("bessel_row: row longer than the zero table");
  if (shift != 0 && shift != 1) throw DomainError("bessel_row: shift must be 0 or 1");
  const double m = nu() + shift;
  const auto lam = lambdas();
  const std::size_t count = out.size();
  std::size_t k0 = count;
  if (x > 0.0) {
    const double zmin = simd::hankel_fast_threshold(m) / x;
    k0 = static_cast<std::size_t>(std::lower_bound(lam.begin(), lam.begin() + count, zmin) - lam.begin());
  }
  for (std::size_t k = 0; k < k0; ++k) out[k] = specfun::bessel_j(m, lam[k] * x);
  if (k0 < count) {
    z_buffer.resize(count - k0);
    for (std::size_t k = k0; k < count; ++k) z_buffer[k - k0] = lam[k] * x;
    simd::bessel_j_hankel(hankel_[shift], z_buffer, out.subspan(k0));
  }
}

void EigenBasis::phi_row(double x, std::span<double> out) const {
  if (x < 0.0) throw DomainError("phi_row: x must be nonnegative");
  if (x == 0.0) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = phi(k + 1, 0.0);
    return;
  }
  bessel_row(0, x, out);
  const double s = std::pow(x, -nu());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c_[k] * s;
}

void EigenBasis::psi_row(double x, std::span<double> out) const {
  if (x < 0.0) throw DomainError("psi_row: x must be nonnegative");
  bessel_row(0, x, out);
  const double s = std::sqrt(x);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c_[k] * s;
}

void EigenBasis::chi_row(double x, std::span<double> out) const {
  if (x < 0.0) throw DomainError("chi_row: x must be nonnegative");
  bessel_row(1, x, out);
  const double s = std::sqrt(x);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c_[k] * s;
}

void EigenBasis::row(Family f, double x, std::span<double> out) const {
  if (f == Family::Mu) {
    phi_row(x, out);
  } else {
    psi_row(x, out);
  }
}

SampledFunction::SampledFunction(QuadratureRule rule, std::vector<double> values, Measure measure)
    : rule_(std::move(rule)), values_(std::move(values)), measure_(measure) {
  if (rule_.nodes.size() != rule_.weights.size() || rule_.nodes.size() != values_.size()) {
    throw DomainError("SampledFunction: nodes, weights and values must have equal length");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(rule_.nodes[i] > 0.0)) throw DomainError("SampledFunction: nodes must be positive");
    if (i > 0 && !(rule_.nodes[i] > rule_.nodes[i - 1])) {
      throw DomainError("SampledFunction: nodes must be strictly increasing");
    }
    if (!(rule_.weights[i] > 0.0)) throw DomainError("SampledFunction: weights must be positive");
    if (!std::isfinite(values_[i])) throw DomainError("SampledFunction: values must be finite");
  }
}

SampledFunction SampledFunction::sample(const QuadratureRule& rule, const std::function<double(double)>& f,
                                        Measure measure) {
  std::vector<double> v(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) v[i] = f(rule.nodes[i]);
  return SampledFunction(rule, std::move(v), measure);
}

double SampledFunction::integral() const { return rule_.integrate(values_); }

double SampledFunction::l1_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += rule_.weights[i] * std::fabs(values_[i]);
  return s;
}

double SampledFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

void SampledFunction::write_csv(std::ostream& os) const {
  os << "x,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < size(); ++i) os << rule_.nodes[i] << ',' << values_[i] << '\n';
}

SampledFunction SampledFunction::read_csv(const std::filesystem::path& path, Measure measure, Order order) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0) {
    throw DomainError(path.string() + ": expected header x,value");
  }
  std::vector<double> xs;
  std::vector<double> vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x = 0.0;
    double v = 0.0;
    char comma = 0;
    if (!(ls >> x >> comma >> v) || comma != ',') throw DomainError(path.string() + ": malformed row: " + line);
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw DomainError(path.string() + ": need at least two rows");
  QuadratureRule rule;
  rule.nodes = xs;
  rule.weights.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double left = i == 0 ? xs[0] - (xs[1] - xs[0]) : xs[i - 1];
    const double right = i + 1 == xs.size() ? xs[i] + (xs[i] - xs[i - 1]) : xs[i + 1];
    rule.weights[i] = 0.5 * (right - left);
  }
  if (measure == Measure::Mu) rule = with_mu_density(std::move(rule), order);
  return SampledFunction(std::move(rule), std::move(vs), measure);
}

namespace {

Family family_for(Measure m) { return m == Measure::Mu ? Family::Mu : Family::Lebesgue; }

}  // namespace

double coeff_mu(const SampledFunction& f, const EigenBasis& basis, std::size_t n) {
  if (f.measure() != Measure::Mu) throw DomainError("coeff_mu: function must be tagged with mu");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.weights()[i] * f.values()[i] * basis.phi(n, f.nodes()[i]);
  return s;
}

double coeff_lebesgue(const SampledFunction& g, const EigenBasis& basis, std::size_t n) {
  if (g.measure() != Measure::Lebesgue) throw DomainError("coeff_lebesgue: function must be tagged Lebesgue");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights()[i] * g.values()[i] * basis.psi(n, g.nodes()[i]);
  return s;
}

std::vector<double> coefficients(const SampledFunction& f, const EigenBasis& basis, std::size_t count) {
  if (count > basis.size()) throw DomainError("coefficients: count exceeds the zero table");
  const Family fam = family_for(f.measure());
  std::vector<double> out(count, 0.0);
  std::vector<double> row(count);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.nodes()[i] >= 1.0) continue;
    basis.row(fam, f.nodes()[i], row);
    simd::axpy(f.weights()[i] * f.values()[i], row, out);
  }
  return out;
}

double synthesize(const EigenBasis& basis, Family family, std::span<const double> coeffs, double x) {
  if (coeffs.size() > basis.size()) throw DomainError("synthesize: more coefficients than zeros");
  if (coeffs.empty()) return 0.0;
  std::vector<double> row(coeffs.size());
  basis.row(family, x, row);
  return simd::dot(coeffs, row);
}

double bessel_j_normalized(double nu, double z) {
  if (z < 0.0) throw DomainError("bessel_j_normalized: negative argument");
  if (z < 1e-8) return 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0)) * (1.0 - z * z / (4.0 * (nu + 1.0)));
  return std::pow(z, -nu) * specfun::bessel_j(nu, z);
}

double hankel_transform(const SampledFunction& f, Order order, double xi) {
  if (!(xi > 0.0)) throw DomainError("hankel_transform: xi must be positive");
  if (f.measure() != Measure::Mu) throw DomainError("hankel_transform: function must be tagged with mu");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values()[i] == 0.0) continue;
    s += f.weights()[i] * f.values()[i] * bessel_j_normalized(order.value(), xi * f.nodes()[i]);
  }
  return s;
}

double mu_distance(Order order, double x, double y) {
  const double e = 2.0 * order.value() + 2.0;
  return std::fabs(std::pow(y, e) - std::pow(x, e)) / e;
}

}  // namespace fbh
