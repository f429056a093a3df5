#include "deconvq/adaptive.hpp"

#include "deconvq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace deconvq {

namespace {

constexpr double kPi = std::numbers::pi;

// Trapezoid integral of mask / |phi| over the segment [a, c] with `points` nodes.
double inverse_modulus_integral(const ErrorSpectrum& errors, double a, double c, std::size_t points)
{
  const double du = (c - a) / static_cast<double>(points - 1);
  const auto values = errors.ladder(a, du, points);
  double acc = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double mod = std::abs(values[k]);
    if (!errors.is_retained(mod) || mod == 0.0) {
      continue;
    }
    const double w = (k == 0 || k + 1 == points) ? 0.5 : 1.0;
    acc += w / mod;
  }
  return acc * du;
}

} // namespace

void AdaptiveConfig::validate() const
{
  density.validate();
  if (!(delta > 0.0)) {
    fail(ErrorCode::invalid_argument, "delta must be positive");
  }
  if (!(ratio > 1.0)) {
    fail(ErrorCode::invalid_argument, "bandwidth ratio L must exceed 1");
  }
  if (!(b_max > 0.0 && b_max < 1.0)) {
    fail(ErrorCode::invalid_argument, "b_max must lie in (0, 1)");
  }
  if (n_cap < 1) {
    fail(ErrorCode::invalid_argument, "bandwidth ladder needs at least one rung");
  }
  if (candidates) {
    if (candidates->empty()) {
      fail(ErrorCode::empty_grid, "explicit candidate list is empty");
    }
    for (std::size_t i = 0; i < candidates->size(); ++i) {
      const double b = (*candidates)[i];
      if (!(b > 0.0 && b < 1.0) || (i > 0 && !(b > (*candidates)[i - 1]))) {
        fail(ErrorCode::invalid_argument, "explicit candidates must be strictly ascending in (0, 1)");
      }
    }
  }
}

BandwidthGrid build_bandwidth_grid(const ErrorSpectrum& errors,
                                   std::size_t n,
                                   std::size_t m,
                                   const AdaptiveConfig& config)
{
  config.validate();
  if (n < 2 || (errors.mode() == ErrorMode::unknown_error && m < 2)) {
    fail(ErrorCode::invalid_argument, "bandwidth grid needs n, m >= 2");
  }

  BandwidthGrid grid;
  grid.ratio = config.ratio;
  if (config.candidates) {
    grid.ladder = *config.candidates;
  } else {
    const auto rungs = static_cast<int>(config.n_cap);
    for (int j = 1; j <= rungs; ++j) {
      grid.ladder.push_back(config.b_max * std::pow(config.ratio, j - rungs));
    }
  }

  // I(b) accumulated over nested annuli from the largest bandwidth down, so
  // the trace is monotone by construction. Each annulus keeps the node
  // spacing a full grid on [-1/b, 1/b] would have.
  const double scale = std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
  const double nodes_per_unit = static_cast<double>(config.density.freq_points - 1) / 2.0;
  const std::size_t count = grid.ladder.size();
  grid.integral_trace.assign(count, 0.0);
  double cumulative = 0.0;
  double inner = 0.0;
  for (std::size_t i = count; i-- > 0;) {
    const double outer = 1.0 / grid.ladder[i];
    const double spacing = outer / nodes_per_unit;
    const auto points = std::max<std::size_t>(17, static_cast<std::size_t>(std::ceil((outer - inner) / spacing)) + 1);
    cumulative += inverse_modulus_integral(errors, inner, outer, points);
    grid.integral_trace[i] = scale * 2.0 * cumulative;
    inner = outer;
  }

  bool informative = false;
  for (const double v : grid.integral_trace) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::uninformative, "error sample uninformative: I(b) is not finite");
    }
    informative = informative || v > 0.0;
  }
  if (!informative) {
    fail(ErrorCode::uninformative, "error sample uninformative: every frequency is masked");
  }

  if (config.candidates) {
    grid.j_tilde_index = 0;
    return grid;
  }
  const auto it = std::find_if(grid.integral_trace.begin(), grid.integral_trace.end(),
                               [](double v) { return v <= 1.0; });
  if (it == grid.integral_trace.end()) {
    fail(ErrorCode::empty_grid, "bandwidth grid is empty: I(b) > 1 for every candidate up to b_max");
  }
  grid.j_tilde_index = static_cast<std::size_t>(it - grid.integral_trace.begin());
  return grid;
}

double sigma_x(std::span<const double> y, const SpectralInputs& inputs, double q)
{
  const auto& grid = inputs.grid;
  const auto fa = truncation::fourier_a_s_cached(grid);
  const bool known = inputs.error_cf.kind == CharFnKind::known_error;
  std::vector<cplx> coeffs(grid.size(), cplx{});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!inputs.error_cf.retained(k) || inputs.kernel_values[k] == 0.0) {
      continue;
    }
    cplx denom = inputs.error_cf.values[k];
    if (known && std::abs(denom) < 1e-12) {
      denom *= 1e-12 / std::abs(denom);
    }
    const double u = grid.node(k);
    coeffs[k] = (*fa)[grid.mirror(k)] * std::polar(1.0, -u * q) * inputs.kernel_values[k] / denom;
  }
  std::vector<double> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
  const auto xi = hermitian_synthesis(grid, coeffs, neg);
  double acc = 0.0;
  for (const double v : xi) {
    acc += v * v;
  }
  const double n = static_cast<double>(y.size());
  return std::sqrt(acc) / n;
}

double sigma_eps(const SpectralInputs& inputs)
{
  if (inputs.error_cf.kind == CharFnKind::known_error || inputs.error_cf.sample_size == 0) {
    return 0.0;
  }
  const auto& grid = inputs.grid;
  const auto fa = truncation::fourier_a_s_cached(grid);
  double signal_part = 0.0;
  double trunc_part = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!inputs.error_cf.retained(k)) {
      continue;
    }
    const double den = std::norm(inputs.error_cf.values[k]);
    if (den == 0.0) {
      continue;
    }
    const double w = grid.weight(k) * std::abs(inputs.kernel_values[k]);
    signal_part += w * std::norm(inputs.signal_cf.values[k]) / den;
    trunc_part += w * std::norm((*fa)[k]) / den;
  }
  const double m = static_cast<double>(inputs.error_cf.sample_size);
  return std::sqrt(signal_part * trunc_part / (4.0 * kPi * kPi * m));
}

double big_sigma(double delta,
                 double run_max_x,
                 double run_max_eps,
                 double residual,
                 double f_at_q,
                 std::size_t n)
{
  if (n < 3) {
    fail(ErrorCode::invalid_argument, "Sigma needs n >= 3 so that log log n > 0");
  }
  if (f_at_q == 0.0) {
    fail(ErrorCode::numerical, "density estimate vanishes at quantile");
  }
  const double logn = std::log(static_cast<double>(n));
  const double numerator = (2.0 * std::numbers::sqrt2 + delta) * std::sqrt(std::log(logn)) * run_max_x +
                           std::pow(delta * logn, 3) * run_max_eps + (1.0 + delta) * residual;
  return numerator / std::abs(f_at_q);
}

std::size_t lepski_select(std::span<const Interval> intervals)
{
  if (intervals.empty()) {
    fail(ErrorCode::empty_grid, "Lepski selection over an empty list");
  }
  double lo = intervals.front().lo;
  double hi = intervals.front().hi;
  std::size_t selected = 0;
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    lo = std::max(lo, intervals[i].lo);
    hi = std::min(hi, intervals[i].hi);
    if (lo > hi) {
      break;
    }
    selected = i;
  }
  return selected;
}

CandidateStats candidate_stats(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               double bandwidth,
                               std::span<const double> taus,
                               const DensityConfig& config)
{
  const auto est = density_estimate(y, errors, bandwidth, config);
  CandidateStats stats;
  stats.bandwidth = bandwidth;
  stats.mass_ok = est.mass_ok;
  stats.mass = est.total_mass();
  stats.b_eps = est.b_eps;
  stats.freq_points = est.spectral->grid.size();
  stats.warnings = est.warnings;
  stats.sigma_eps = sigma_eps(*est.spectral);
  for (const double tau : taus) {
    const auto qe = quantile_estimate(est, QuantileRequest{tau, std::nullopt});
    CandidateStats::PerTau t;
    t.q = qe.q;
    t.residual = qe.residual;
    t.f_at_q = est.density_at(qe.q);
    t.sigma_x = sigma_x(y, *est.spectral, qe.q);
    stats.per_tau.push_back(t);
  }
  return stats;
}

AdaptiveRun adaptive_quantiles(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               std::span<const double> taus,
                               const AdaptiveConfig& config)
{
  config.validate();
  for (const double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0)) {
      fail(ErrorCode::invalid_argument, "tau must lie in (0, 1)");
    }
  }
  AdaptiveRun run;
  const std::size_t n = y.size();
  const std::size_t m = errors.sample_size();
  run.grid = build_bandwidth_grid(errors, n, m, config);
  const auto candidates = run.grid.candidates();

  std::vector<CandidateStats> stats;
  stats.reserve(candidates.size());
  for (const double b : candidates) {
    stats.push_back(candidate_stats(y, errors, b, taus, config.density));
  }

  for (std::size_t t = 0; t < taus.size(); ++t) {
    QuantileResult result;
    result.tau = taus[t];
    result.trace.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& s = stats[i];
      const auto& pt = s.per_tau[t];
      auto& rec = result.trace[i];
      rec.bandwidth = s.bandwidth;
      rec.q = pt.q;
      rec.residual = pt.residual;
      rec.f_at_q = pt.f_at_q;
      rec.sigma_x = pt.sigma_x;
      rec.sigma_eps = s.sigma_eps;
      rec.mass = s.mass;
      if (s.b_eps) {
        rec.b_eps_holds = s.b_eps->holds;
        rec.b_eps_margin = s.b_eps->margin;
      }
      rec.valid = true;
      if (!s.mass_ok) {
        rec.valid = false;
        rec.note = "mass check failed";
      } else if (pt.f_at_q == 0.0) {
        rec.valid = false;
        rec.note = "density estimate vanishes at quantile";
      }
    }

    // Running maxima over valid candidates with mu >= b.
    double max_x = 0.0;
    double max_eps = 0.0;
    for (std::size_t i = candidates.size(); i-- > 0;) {
      auto& rec = result.trace[i];
      if (!rec.valid) {
        continue;
      }
      max_x = std::max(max_x, rec.sigma_x);
      max_eps = std::max(max_eps, rec.sigma_eps);
      rec.run_max_x = max_x;
      rec.run_max_eps = max_eps;
      rec.Sigma = big_sigma(config.delta, max_x, max_eps, rec.residual, rec.f_at_q, n);
      rec.lo = rec.q - rec.Sigma;
      rec.hi = rec.q + rec.Sigma;
    }

    std::vector<Interval> intervals;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (result.trace[i].valid) {
        intervals.push_back({result.trace[i].lo, result.trace[i].hi});
        index.push_back(i);
      } else {
        result.warnings.push_back("dropped b=" + std::to_string(candidates[i]) + ": " + result.trace[i].note);
      }
    }
    if (intervals.empty()) {
      fail(ErrorCode::no_valid_candidate,
           "no valid bandwidth candidate for tau=" + std::to_string(taus[t]));
    }
    const std::size_t pick = index[lepski_select(intervals)];
    result.selected = pick;
    result.q = result.trace[pick].q;
    result.Sigma = result.trace[pick].Sigma;
    result.bandwidth = result.trace[pick].bandwidth;
    for (const auto& s : stats) {
      for (const auto& w : s.warnings) {
        result.warnings.push_back("b=" + std::to_string(s.bandwidth) + ": " + w);
      }
    }
    run.results.push_back(std::move(result));
  }
  return run;
}

QuantileResult adaptive_quantile(const ObservationSet& obs, double tau, const AdaptiveConfig& config)
{
  obs.validate();
  const double taus[1] = {tau};
  auto run = adaptive_quantiles(obs.y, error_spectrum(obs), taus, config);
  return std::move(run.results.front());
}

} // namespace deconvq
