#pragma once

// Complex-exponential sums on a uniform frequency ladder u_k = u0 + k*du.
//
// These two loops dominate the cost of every estimator in the library:
//   over_points: out[k] = sum_j w[j] * exp(i * u_k * t[j])     (empirical CFs,
//                                                               transforms of
//                                                               quadrature rules)
//   over_freqs:  out[j] = sum_k c[k] * exp(i * u_k * t[j])     (Fourier synthesis)
//
// Three backends exist. `reference` evaluates every exponential directly and is
// the oracle for the other two. `portable` and `avx2` advance exp(i*du*t) by
// complex multiplication and re-anchor with an exact sin/cos every
// kAnchorInterval steps, which bounds the phase drift to a few hundred ulps.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace deconvq::kernels {

using cplx = std::complex<double>;

inline constexpr std::size_t kAnchorInterval = 128;

enum class Backend
{
  reference,
  portable,
  avx2
};

using OverPointsFn = void (*)(std::span<const double> points,
                              std::span<const double> weights,
                              double u0,
                              double du,
                              std::span<cplx> out);

using OverFreqsFn = void (*)(std::span<const cplx> coeffs,
                             double u0,
                             double du,
                             std::span<const double> points,
                             std::span<cplx> out);

struct KernelTable
{
  Backend backend;
  std::string_view name;
  OverPointsFn over_points;
  OverFreqsFn over_freqs;
};

namespace reference {
void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out);
void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out);
} // namespace reference

namespace portable {
void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out);
void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out);
} // namespace portable

#if defined(DECONVQ_HAVE_AVX2)
namespace avx2 {
void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out);
void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out);
} // namespace avx2
#endif

const KernelTable& reference_table();
const KernelTable& portable_table();
//! nullptr when the library was built without the AVX2 translation unit.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

//! Backend used by the library. Chosen once on first use: DECONVQ_SIMD
//! (reference|portable|avx2) overrides, otherwise AVX2 when the CPU has
//! AVX2+FMA, else portable.
const KernelTable& active();
void force_backend(Backend backend);

inline void exp_sum_over_points(std::span<const double> points,
                                std::span<const double> weights,
                                double u0,
                                double du,
                                std::span<cplx> out)
{
  active().over_points(points, weights, u0, du, out);
}

inline void exp_sum_over_freqs(std::span<const cplx> coeffs,
                               double u0,
                               double du,
                               std::span<const double> points,
                               std::span<cplx> out)
{
  active().over_freqs(coeffs, u0, du, points, out);
}

} // namespace deconvq::kernels
