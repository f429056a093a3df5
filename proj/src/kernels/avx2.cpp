#include "deconvq/kernels.hpp"

#include <immintrin.h>

#include <array>
#include <cmath>
#include <vector>

namespace deconvq::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

double hsum(__m256d v)
{
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// (zr + i zi) *= (sr + i si)
inline void cmul_inplace(__m256d& zr, __m256d& zi, __m256d sr, __m256d si)
{
  const __m256d r = _mm256_fmsub_pd(zr, sr, _mm256_mul_pd(zi, si));
  zi = _mm256_fmadd_pd(zr, si, _mm256_mul_pd(zi, sr));
  zr = r;
}

} // namespace

void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out)
{
  const std::size_t n = points.size();
  const std::size_t padded = (n + kLanes - 1) / kLanes * kLanes;
  // Padding lanes carry weight 0 and t = 0.
  std::vector<double> t(padded, 0.0), w(padded, 0.0);
  std::vector<double> zr(padded), zi(padded), sr(padded), si(padded);
  for (std::size_t j = 0; j < n; ++j) {
    t[j] = points[j];
    w[j] = weights.empty() ? 1.0 : weights[j];
  }
  for (std::size_t j = 0; j < padded; ++j) {
    sr[j] = std::cos(du * t[j]);
    si[j] = std::sin(du * t[j]);
  }

  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k % kAnchorInterval == 0) {
      const double u = u0 + static_cast<double>(k) * du;
      for (std::size_t j = 0; j < padded; ++j) {
        zr[j] = std::cos(u * t[j]);
        zi[j] = std::sin(u * t[j]);
      }
    }
    __m256d acc_r = _mm256_setzero_pd();
    __m256d acc_i = _mm256_setzero_pd();
    for (std::size_t j = 0; j < padded; j += kLanes) {
      __m256d vzr = _mm256_loadu_pd(&zr[j]);
      __m256d vzi = _mm256_loadu_pd(&zi[j]);
      const __m256d vw = _mm256_loadu_pd(&w[j]);
      acc_r = _mm256_fmadd_pd(vw, vzr, acc_r);
      acc_i = _mm256_fmadd_pd(vw, vzi, acc_i);
      cmul_inplace(vzr, vzi, _mm256_loadu_pd(&sr[j]), _mm256_loadu_pd(&si[j]));
      _mm256_storeu_pd(&zr[j], vzr);
      _mm256_storeu_pd(&zi[j], vzi);
    }
    out[k] = {hsum(acc_r), hsum(acc_i)};
  }
}

void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out)
{
  // Two vectors per block keep the recurrence latency hidden.
  constexpr std::size_t kBlock = 2 * kLanes;
  const std::size_t n = points.size();
  const std::size_t nk = coeffs.size();

  for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
    std::array<double, kBlock> t{}, br{}, bi{};
    const std::size_t live = std::min(kBlock, n - j0);
    for (std::size_t l = 0; l < live; ++l) {
      t[l] = points[j0 + l];
    }
    for (std::size_t l = 0; l < kBlock; ++l) {
      br[l] = std::cos(du * t[l]);
      bi[l] = std::sin(du * t[l]);
    }
    const __m256d sr0 = _mm256_loadu_pd(&br[0]);
    const __m256d si0 = _mm256_loadu_pd(&bi[0]);
    const __m256d sr1 = _mm256_loadu_pd(&br[kLanes]);
    const __m256d si1 = _mm256_loadu_pd(&bi[kLanes]);

    __m256d zr0 = _mm256_setzero_pd(), zi0 = _mm256_setzero_pd();
    __m256d zr1 = _mm256_setzero_pd(), zi1 = _mm256_setzero_pd();
    __m256d ar0 = _mm256_setzero_pd(), ai0 = _mm256_setzero_pd();
    __m256d ar1 = _mm256_setzero_pd(), ai1 = _mm256_setzero_pd();

    for (std::size_t k = 0; k < nk; ++k) {
      if (k % kAnchorInterval == 0) {
        const double u = u0 + static_cast<double>(k) * du;
        std::array<double, kBlock> ar{}, ai{};
        for (std::size_t l = 0; l < kBlock; ++l) {
          ar[l] = std::cos(u * t[l]);
          ai[l] = std::sin(u * t[l]);
        }
        zr0 = _mm256_loadu_pd(&ar[0]);
        zi0 = _mm256_loadu_pd(&ai[0]);
        zr1 = _mm256_loadu_pd(&ar[kLanes]);
        zi1 = _mm256_loadu_pd(&ai[kLanes]);
      }
      const __m256d cr = _mm256_set1_pd(coeffs[k].real());
      const __m256d ci = _mm256_set1_pd(coeffs[k].imag());
      ar0 = _mm256_fmadd_pd(cr, zr0, _mm256_fnmadd_pd(ci, zi0, ar0));
      ai0 = _mm256_fmadd_pd(cr, zi0, _mm256_fmadd_pd(ci, zr0, ai0));
      ar1 = _mm256_fmadd_pd(cr, zr1, _mm256_fnmadd_pd(ci, zi1, ar1));
      ai1 = _mm256_fmadd_pd(cr, zi1, _mm256_fmadd_pd(ci, zr1, ai1));
      cmul_inplace(zr0, zi0, sr0, si0);
      cmul_inplace(zr1, zi1, sr1, si1);
    }

    std::array<double, kBlock> outr{}, outi{};
    _mm256_storeu_pd(&outr[0], ar0);
    _mm256_storeu_pd(&outr[kLanes], ar1);
    _mm256_storeu_pd(&outi[0], ai0);
    _mm256_storeu_pd(&outi[kLanes], ai1);
    for (std::size_t l = 0; l < live; ++l) {
      out[j0 + l] = {outr[l], outi[l]};
    }
  }
}

} // namespace deconvq::kernels::avx2
