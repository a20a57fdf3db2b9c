#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and, on x86-64,
// an AVX2/FMA variant; the variant is chosen once at runtime from CPUID and can
// be overridden with FBH_SIMD=scalar|avx2 or force_backend().

#include <span>
#include <string_view>
#include <vector>

namespace fbh::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b) noexcept;
/// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();
Backend active_backend();
/// Throws std::invalid_argument if `b` is not available.
void force_backend(Backend b);

/// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);
/// sum_i w[i] * a[i] * b[i]
double dot3(std::span<const double> w, std::span<const double> a, std::span<const double> b);
/// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Coefficients of the Hankel large-argument expansion of J_nu, truncated to a
/// fixed number of terms so the evaluation is branch-free.
struct HankelSeries {
  static constexpr int kTerms = 14;
  double nu = 0.0;
  double phase = 0.0;  // nu*pi/2 + pi/4
  double a[kTerms + 1] = {};  // a_k(nu), a_0 = 1
};

HankelSeries make_hankel_series(double nu);

/// Smallest argument at which the truncated expansion is used in place of the
/// general evaluator.
double hankel_fast_threshold(double nu);

/// out[i] = J_nu(z[i]) by the truncated Hankel expansion. Requires
/// z[i] >= hankel_fast_threshold(nu); no check is made.
void bessel_j_hankel(const HankelSeries& series, std::span<const double> z, std::span<double> out);

namespace detail {
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*bessel_j_hankel)(const HankelSeries&, const double*, double*, std::size_t);
};
const KernelTable& scalar_table();
#if defined(FBH_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace fbh::simd
