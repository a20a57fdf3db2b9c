#include <cmath>
#include <numbers>

#include "fbh/simd.hpp"

namespace fbh::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hankel_scalar(const HankelSeries& s, const double* z, double* out, std::size_t n) {
  constexpr int K = HankelSeries::kTerms;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / z[i];
    const double w2 = w * w;
    // P = a0 - a2 w^2 + a4 w^4 - ..., Q = a1 w - a3 w^3 + ...
    double p = 0.0;
    for (int k = K - (K % 2); k >= 0; k -= 2) p = p * (-w2) + s.a[k];
    double q = 0.0;
    for (int k = K - 1 + (K % 2); k >= 1; k -= 2) q = q * (-w2) + s.a[k];
    q *= w;
    const double chi = z[i] - s.phase;
    out[i] = std::sqrt(2.0 / (std::numbers::pi * z[i])) * (p * std::cos(chi) - q * std::sin(chi));
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar, dot3_scalar, axpy_scalar, hankel_scalar};
  return table;
}

}  // namespace fbh::simd::detail
