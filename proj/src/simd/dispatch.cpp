#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fbh/simd.hpp"

namespace fbh::simd {
namespace {

bool cpu_has_avx2() {
#if defined(FBH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const bool avx2 = cpu_has_avx2();
  if (const char* env = std::getenv("FBH_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && avx2) return Backend::Avx2;
  }
  return avx2 ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

const detail::KernelTable& table() {
#if defined(FBH_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Backend::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

std::string_view backend_name(Backend b) noexcept { return b == Backend::Avx2 ? "avx2" : "scalar"; }

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (cpu_has_avx2()) out.push_back(Backend::Avx2);
  return out;
}

Backend active_backend() { return current().load(); }

void force_backend(Backend b) {
  const auto avail = available_backends();
  if (std::find(avail.begin(), avail.end(), b) == avail.end()) {
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
  }
  current().store(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  return table().dot(a.data(), b.data(), a.size());
}

double dot3(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  check_sizes(w.size(), a.size(), "dot3");
  check_sizes(w.size(), b.size(), "dot3");
  return table().dot3(w.data(), a.data(), b.data(), w.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  table().axpy(alpha, x.data(), y.data(), x.size());
}

HankelSeries make_hankel_series(double nu) {
  HankelSeries s;
  s.nu = nu;
  s.phase = (0.5 * nu + 0.25) * std::numbers::pi;
  const double mu = 4.0 * nu * nu;
  s.a[0] = 1.0;
  for (int k = 1; k <= HankelSeries::kTerms; ++k) {
    const double odd = 2.0 * k - 1.0;
    s.a[k] = s.a[k - 1] * (mu - odd * odd) / (8.0 * k);
  }
  return s;
}

double hankel_fast_threshold(double nu) { return std::max({35.0, 4.0 * nu + 15.0, nu * nu}); }

void bessel_j_hankel(const HankelSeries& series, std::span<const double> z, std::span<double> out) {
  check_sizes(z.size(), out.size(), "bessel_j_hankel");
  table().bessel_j_hankel(series, z.data(), out.data(), z.size());
}

}  // namespace fbh::simd
