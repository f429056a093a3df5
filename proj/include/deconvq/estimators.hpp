#pragma once

#include "deconvq/samples.hpp"
#include "deconvq/spectral.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deconvq {

struct DensityConfig
{
  KernelSpec kernel;

  std::size_t freq_points = FreqGrid::kDefaultPoints;
  //! Halved-grid self-consistency check; the grid is refined (2N-1 nodes)
  //! while the relative difference exceeds refine_tol and N <= max_freq_points.
  bool refine_freq = true;
  double refine_tol = 1e-4;
  std::size_t max_freq_points = 16385;

  std::size_t x_points = 8192;
  //! Explicit spatial window; default is [min y - pad, max y + pad] with
  //! pad = max(iqr_pad * IQR(y), 20 b).
  std::optional<std::pair<double, double>> x_range;
  double iqr_pad = 5.0;

  double tail_tol = 5e-3;
  int max_widen = 3;

  void validate() const;
};

//! Everything the frequency-domain formulas need at one bandwidth.
struct SpectralInputs
{
  FreqGrid grid;
  CharFnGrid signal_cf;
  CharFnGrid error_cf;
  std::vector<double> kernel_values; // phi_K(b u_k)
  std::vector<cplx> ratio;           // phi_n phi_K(b u) / phi_eps * mask
};

struct DensityEstimate
{
  double bandwidth = 0.0;
  UniformGrid x_grid;
  std::vector<double> f_vals;
  std::vector<double> F_vals;
  ErrorMode mode = ErrorMode::unknown_error;
  std::optional<BEpsCheck> b_eps;
  bool mass_ok = true;
  double refine_rel_diff = 0.0;
  std::vector<std::string> warnings;
  //! Null for estimates built from injected values.
  std::shared_ptr<const SpectralInputs> spectral;

  //! Wraps given density values; F is their cumulative trapezoid integral.
  static DensityEstimate from_values(const UniformGrid& grid, std::vector<double> f, double bandwidth = 0.5);

  double total_mass() const { return F_vals.back(); }
  //! Exact spectral evaluation when available, else linear interpolation.
  double density_at(double x) const;
};

ErrorSpectrum error_spectrum(const ObservationSet& obs);

DensityEstimate density_estimate(std::span<const double> y,
                                 const ErrorSpectrum& errors,
                                 double bandwidth,
                                 const DensityConfig& config = {});

DensityEstimate density_estimate(const ObservationSet& obs, double bandwidth, const DensityConfig& config = {});

//! Builds the spectral inputs on a given grid (no refinement, no synthesis).
SpectralInputs spectral_inputs(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               double bandwidth,
                               const KernelSpec& kernel,
                               const FreqGrid& grid);

//! int_{x_lo}^{eta} f, by linear interpolation of F_vals.
double cdf_value(const DensityEstimate& est, double eta);

struct QuantileRequest
{
  double tau = 0.5;
  //! Search interval [-U, U] intersected with the spatial grid; unset means
  //! the whole grid.
  std::optional<double> search_halfwidth;
};

struct QuantileEstimate
{
  double q = 0.0;
  double residual = 0.0;
};

//! Minimum-contrast quantile: argmin |cdf_value(eta) - tau| over the search
//! interval; smallest eta wins ties.
QuantileEstimate quantile_estimate(const DensityEstimate& est, const QuantileRequest& request);

} // namespace deconvq
