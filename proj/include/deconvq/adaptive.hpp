#pragma once

#include "deconvq/estimators.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deconvq {

struct AdaptiveConfig
{
  double delta = 0.1;
  //! Geometric ratio L between neighbouring bandwidths.
  double ratio = 1.15;
  double b_max = 1.0 - 1e-6;
  std::size_t n_cap = 40;
  DensityConfig density;
  //! Explicit ascending candidate list; bypasses the ladder and its cutoff.
  std::optional<std::vector<double>> candidates;

  void validate() const;
};

//! Geometric bandwidth ladder b_j = b_max * L^(j - N), j = 1..N, with
//! I(b) = (log n / n)^{1/2} int_{-1/b}^{1/b} mask / |phi_eps| du per rung.
struct BandwidthGrid
{
  double ratio = 1.15;
  std::vector<double> ladder;
  std::vector<double> integral_trace;
  //! First rung with I(b) <= 1; candidates start here.
  std::size_t j_tilde_index = 0;

  friend bool operator==(const BandwidthGrid&, const BandwidthGrid&) = default;

  std::span<const double> candidates() const
  {
    return std::span<const double>(ladder).subspan(j_tilde_index);
  }
};

BandwidthGrid build_bandwidth_grid(const ErrorSpectrum& errors,
                                   std::size_t n,
                                   std::size_t m,
                                   const AdaptiveConfig& config = {});

//! sigma~_{b,X} at quantile q: root of n^{-2} sum_j xi_j^2 with xi_j the
//! a_s-weighted deconvolved contribution of observation j, in Plancherel form.
double sigma_x(std::span<const double> y, const SpectralInputs& inputs, double q);

//! sigma~_{b,eps}; 0 for known-error inputs (no error sample).
double sigma_eps(const SpectralInputs& inputs);

//! Half-width Sigma~_b of the confidence interval around q~_{tau,b}.
double big_sigma(double delta,
                 double run_max_x,
                 double run_max_eps,
                 double residual,
                 double f_at_q,
                 std::size_t n);

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;
};

//! Largest index whose running intersection (from index 0 upward) is nonempty.
std::size_t lepski_select(std::span<const Interval> intervals);

//! Per-bandwidth, per-tau quantities that do not depend on other bandwidths.
struct CandidateStats
{
  double bandwidth = 0.0;
  double sigma_eps = 0.0;
  bool mass_ok = true;
  double mass = 1.0;
  std::optional<BEpsCheck> b_eps;
  std::size_t freq_points = 0;
  std::vector<std::string> warnings;
  struct PerTau
  {
    double q = 0.0;
    double residual = 0.0;
    double f_at_q = 0.0;
    double sigma_x = 0.0;
  };
  std::vector<PerTau> per_tau;
};

CandidateStats candidate_stats(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               double bandwidth,
                               std::span<const double> taus,
                               const DensityConfig& config);

struct CandidateRecord
{
  double bandwidth = 0.0;
  double q = 0.0;
  double residual = 0.0;
  double f_at_q = 0.0;
  double sigma_x = 0.0;
  double sigma_eps = 0.0;
  double run_max_x = 0.0;
  double run_max_eps = 0.0;
  double Sigma = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool valid = false;
  std::string note;
  bool b_eps_holds = true;
  double b_eps_margin = 0.0;
  double mass = 1.0;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

struct QuantileResult
{
  double tau = 0.5;
  double q = 0.0;
  double Sigma = 0.0;
  double bandwidth = 0.0;
  //! Index into trace of the selected candidate.
  std::size_t selected = 0;
  std::vector<CandidateRecord> trace;
  std::vector<std::string> warnings;

  friend bool operator==(const QuantileResult&, const QuantileResult&) = default;
};

struct AdaptiveRun
{
  BandwidthGrid grid;
  std::vector<QuantileResult> results;
};

//! Full data-driven procedure for several quantile levels sharing one
//! bandwidth grid and one density estimate per candidate.
AdaptiveRun adaptive_quantiles(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               std::span<const double> taus,
                               const AdaptiveConfig& config = {});

QuantileResult adaptive_quantile(const ObservationSet& obs, double tau, const AdaptiveConfig& config = {});

} // namespace deconvq
