#pragma once

#include "deconvq/error_law.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace deconvq {

using cplx = std::complex<double>;

//! Uniform symmetric frequency grid on [-cutoff, cutoff].
//!
//! Node k sits at (2k - (N-1)) * cutoff / (N-1), so u and -u are represented
//! by exactly negated doubles. Odd N contains u = 0.
class FreqGrid
{
public:
  static constexpr std::size_t kDefaultPoints = 4097;

  FreqGrid(double cutoff, std::size_t num_points = kDefaultPoints);

  double cutoff() const { return cutoff_; }
  std::size_t size() const { return n_; }
  double spacing() const { return 2.0 * cutoff_ / static_cast<double>(n_ - 1); }

  double node(std::size_t k) const
  {
    return (2.0 * static_cast<double>(k) - static_cast<double>(n_ - 1)) * cutoff_ /
           static_cast<double>(n_ - 1);
  }
  std::size_t mirror(std::size_t k) const { return n_ - 1 - k; }
  //! First node with u >= 0.
  std::size_t half_begin() const { return n_ / 2; }
  bool has_zero() const { return n_ % 2 == 1; }

  //! Trapezoid weight of node k.
  double weight(std::size_t k) const
  {
    return (k == 0 || k + 1 == n_) ? 0.5 * spacing() : spacing();
  }

  //! Same cutoff, spacing halved (2N - 1 nodes; old nodes are the even ones).
  FreqGrid refined() const { return FreqGrid(cutoff_, 2 * n_ - 1); }

  friend bool operator==(const FreqGrid&, const FreqGrid&) = default;

private:
  double cutoff_;
  std::size_t n_;
};

enum class CharFnKind
{
  signal_ecf,
  error_ecf,
  known_error
};

//! Characteristic-function values on a FreqGrid plus the retention mask.
struct CharFnGrid
{
  FreqGrid grid;
  std::vector<cplx> values;
  std::vector<std::uint8_t> mask;
  CharFnKind kind = CharFnKind::signal_ecf;
  //! Sample size behind an ECF; 0 for known laws.
  std::size_t sample_size = 0;

  bool retained(std::size_t k) const { return mask[k] != 0; }
};

//! Empirical characteristic function (1/n) sum_j exp(i u x_j); mask all true.
CharFnGrid ecf(std::span<const double> sample, const FreqGrid& grid);

//! Error ECF with the spectral cutoff mask |phi_{eps,m}(u)| >= m^{-1/2}.
CharFnGrid ecf_error_truncated(std::span<const double> error_sample, const FreqGrid& grid);

//! Known-law CF on a grid; mask is true wherever the modulus is positive.
CharFnGrid known_charfn_grid(const ErrorLaw& law, const FreqGrid& grid);

enum class ErrorMode
{
  unknown_error,
  known_error
};

//! Source of the error characteristic function used in the deconvolution.
//!
//! `empirical` wraps an error sample, `known` a closed-form law. `injected`
//! evaluates a closed-form law but treats it as if it were the ECF of an
//! m-sample (unknown-error formulas, m^{-1/2} cutoff); tests use it to compare
//! the two pipelines.
class ErrorSpectrum
{
public:
  static ErrorSpectrum empirical(std::vector<double> sample);
  static ErrorSpectrum known(const ErrorLaw& law);
  static ErrorSpectrum injected(const ErrorLaw& law, std::size_t m);

  ErrorMode mode() const { return mode_; }
  //! m for unknown-error spectra, 0 for known laws.
  std::size_t sample_size() const { return m_; }
  bool is_retained(double modulus) const;

  //! CF values on the ladder u0 + k*du, k < count (no mask applied).
  std::vector<cplx> ladder(double u0, double du, std::size_t count) const;
  CharFnGrid on_grid(const FreqGrid& grid) const;

private:
  using Source = std::variant<std::shared_ptr<const std::vector<double>>, ErrorLaw>;

  ErrorSpectrum(Source source, ErrorMode mode, std::size_t m)
    : source_(std::move(source)), mode_(mode), m_(m) {}

  Source source_;
  ErrorMode mode_;
  std::size_t m_;
};

//! Flat-top kernel: phi_K = 1 on [-c, c], 0 outside (-1, 1), C-infinity between.
struct KernelSpec
{
  double flat_radius = 0.5;

  void validate() const;
};

//! The C-infinity step s(t) = h(t) / (h(t) + h(1-t)), h(t) = exp(-1/t) for t > 0.
double smooth_step(double t);

double kernel_ft(const KernelSpec& spec, double u);

//! Smooth truncation pair: a_c in C-infinity with a_c = 1 on (-inf, -1] and
//! 0 on [0, inf); a_s = 1_{(-inf, 0]} - a_c is supported on [-1, 0].
namespace truncation {

double a_c(double x);
double a_s(double x);

inline constexpr std::size_t kDefaultPanels = 512;

//! Fourier transform int_{-1}^{0} exp(iux) a_s(x) dx at every node of `grid`,
//! by composite 8-point Gauss-Legendre.
std::vector<cplx> fourier_a_s(const FreqGrid& grid, std::size_t panels = kDefaultPanels);

//! Same as fourier_a_s with default panels, memoized per grid (thread-safe).
std::shared_ptr<const std::vector<cplx>> fourier_a_s_cached(const FreqGrid& grid);

} // namespace truncation

//! Uniform spatial grid with n >= 2 nodes on [lo, hi].
struct UniformGrid
{
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 2;

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
  double at(std::size_t i) const
  {
    return i + 1 == n ? hi : lo + static_cast<double>(i) * spacing();
  }
  std::vector<double> nodes() const;

  void validate() const;
};

//! Real band-limited synthesis g(t) = (1/2pi) sum_k w_k exp(-i u_k t) V_k at
//! arbitrary points, exploiting Hermitian symmetry of V.
//!
//! Throws Error(numerical) if the Hermitian defect of V could move the
//! discarded imaginary part above 1e-8 * (1 + max |g|).
std::vector<double> hermitian_synthesis(const FreqGrid& grid,
                                        std::span<const cplx> values,
                                        std::span<const double> points);

//! inverse_fourier_grid: masked values synthesized on a uniform spatial grid.
std::vector<double> inverse_fourier_grid(const CharFnGrid& values, const UniformGrid& x_grid);

struct BEpsCheck
{
  bool holds = false;
  double margin = 0.0;
  double min_modulus = 0.0;
  double threshold = 0.0;
};

//! Data-checkable well-definedness event: min_{|u| <= 1/b} |phi_{eps,m}(u)|
//! >= m^{-1/2} |log b|^{3/2}.
BEpsCheck check_b_eps(const CharFnGrid& error_cf, double bandwidth);

} // namespace deconvq
