#include "deconvq/estimators.hpp"

#include "deconvq/error.hpp"

#include <algorithm>
#include <cmath>

namespace deconvq {

namespace {

constexpr double kKnownFloor = 1e-12;
constexpr std::size_t kProbes = 64;
constexpr double kTieTol = 1e-12;

std::vector<double> cumulative_trapezoid(const UniformGrid& grid, std::span<const double> f)
{
  std::vector<double> F(f.size(), 0.0);
  const double h = grid.spacing();
  for (std::size_t i = 1; i < f.size(); ++i) {
    F[i] = F[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  }
  return F;
}

UniformGrid default_window(std::span<const double> y, double bandwidth, const DensityConfig& config)
{
  if (config.x_range) {
    UniformGrid g{config.x_range->first, config.x_range->second, config.x_points};
    g.validate();
    return g;
  }
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted.size() > 1
                       ? sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25)
                       : 0.0;
  const double pad = std::max(config.iqr_pad * iqr, 20.0 * bandwidth);
  return UniformGrid{sorted.front() - pad, sorted.back() + pad, config.x_points};
}

std::vector<double> probe_points(const UniformGrid& window)
{
  std::vector<double> out(kProbes);
  for (std::size_t i = 0; i < kProbes; ++i) {
    out[i] = window.lo + (static_cast<double>(i) + 0.5) * (window.hi - window.lo) / kProbes;
  }
  return out;
}

double relative_gap(std::span<const double> fine, std::span<const double> coarse)
{
  double diff = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    peak = std::max(peak, std::abs(fine[i]));
  }
  return peak > 0.0 ? diff / peak : diff;
}

} // namespace

void DensityConfig::validate() const
{
  kernel.validate();
  if (freq_points < 16 || x_points < 2) {
    fail(ErrorCode::invalid_argument, "density grids are too small");
  }
  if (!(tail_tol > 0.0) || !(refine_tol > 0.0) || !(iqr_pad >= 0.0)) {
    fail(ErrorCode::invalid_argument, "density tolerances must be positive");
  }
}

DensityEstimate DensityEstimate::from_values(const UniformGrid& grid, std::vector<double> f, double bandwidth)
{
  grid.validate();
  if (f.size() != grid.n) {
    fail(ErrorCode::invalid_argument, "density values do not match the grid");
  }
  DensityEstimate est;
  est.bandwidth = bandwidth;
  est.x_grid = grid;
  est.F_vals = cumulative_trapezoid(grid, f);
  est.f_vals = std::move(f);
  return est;
}

double DensityEstimate::density_at(double x) const
{
  if (spectral) {
    const double pt[1] = {x};
    return hermitian_synthesis(spectral->grid, spectral->ratio, pt).front();
  }
  const double pos = std::clamp((x - x_grid.lo) / x_grid.spacing(), 0.0, static_cast<double>(x_grid.n - 1));
  const auto i = std::min(static_cast<std::size_t>(pos), x_grid.n - 2);
  const double frac = pos - static_cast<double>(i);
  return f_vals[i] + frac * (f_vals[i + 1] - f_vals[i]);
}

ErrorSpectrum error_spectrum(const ObservationSet& obs)
{
  if (obs.has_error_sample()) {
    return ErrorSpectrum::empirical(obs.error_sample());
  }
  return ErrorSpectrum::known(obs.known_law());
}

SpectralInputs spectral_inputs(std::span<const double> y,
                               const ErrorSpectrum& errors,
                               double bandwidth,
                               const KernelSpec& kernel,
                               const FreqGrid& grid)
{
  SpectralInputs in{grid, ecf(y, grid), errors.on_grid(grid), {}, {}};
  in.kernel_values.resize(grid.size());
  in.ratio.assign(grid.size(), cplx{});
  const bool known = errors.mode() == ErrorMode::known_error;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    in.kernel_values[k] = kernel_ft(kernel, bandwidth * grid.node(k));
    if (!in.error_cf.retained(k) || in.kernel_values[k] == 0.0) {
      continue;
    }
    cplx denom = in.error_cf.values[k];
    if (known && std::abs(denom) < kKnownFloor) {
      denom *= kKnownFloor / std::abs(denom);
    }
    in.ratio[k] = in.signal_cf.values[k] * in.kernel_values[k] / denom;
  }
  return in;
}

DensityEstimate density_estimate(std::span<const double> y,
                                 const ErrorSpectrum& errors,
                                 double bandwidth,
                                 const DensityConfig& config)
{
  config.validate();
  if (!(bandwidth > 0.0 && bandwidth < 1.0)) {
    fail(ErrorCode::invalid_argument, "bandwidth must lie in (0, 1)");
  }
  if (y.empty()) {
    fail(ErrorCode::invalid_argument, "density estimate of an empty sample");
  }

  DensityEstimate est;
  est.bandwidth = bandwidth;
  est.mode = errors.mode();
  UniformGrid window = default_window(y, bandwidth, config);

  FreqGrid grid(1.0 / bandwidth, config.freq_points);
  auto inputs = std::make_shared<SpectralInputs>(spectral_inputs(y, errors, bandwidth, config.kernel, grid));
  if (config.refine_freq) {
    const auto probes = probe_points(window);
    while (true) {
      const FreqGrid& g = inputs->grid;
      std::vector<double> coarse;
      if (g.has_zero()) {
        const FreqGrid half_grid(g.cutoff(), (g.size() + 1) / 2);
        std::vector<cplx> sub(half_grid.size());
        for (std::size_t i = 0; i < sub.size(); ++i) {
          sub[i] = inputs->ratio[2 * i];
        }
        coarse = hermitian_synthesis(half_grid, sub, probes);
      } else {
        const FreqGrid half_grid(g.cutoff(), std::max<std::size_t>(16, g.size() / 2));
        coarse = hermitian_synthesis(half_grid,
                                     spectral_inputs(y, errors, bandwidth, config.kernel, half_grid).ratio,
                                     probes);
      }
      const auto fine = hermitian_synthesis(g, inputs->ratio, probes);
      est.refine_rel_diff = relative_gap(fine, coarse);
      if (est.refine_rel_diff <= config.refine_tol) {
        break;
      }
      if (2 * g.size() - 1 > config.max_freq_points) {
        est.warnings.push_back("frequency grid self-consistency " + std::to_string(est.refine_rel_diff) +
                               " above tolerance at the refinement cap");
        break;
      }
      inputs = std::make_shared<SpectralInputs>(
        spectral_inputs(y, errors, bandwidth, config.kernel, g.refined()));
    }
  }

  for (int attempt = 0;; ++attempt) {
    est.x_grid = window;
    est.f_vals = hermitian_synthesis(inputs->grid, inputs->ratio, window.nodes());
    est.F_vals = cumulative_trapezoid(window, est.f_vals);
    est.mass_ok = std::abs(est.F_vals.back() - 1.0) <= config.tail_tol;
    if (est.mass_ok || config.x_range || attempt >= config.max_widen) {
      break;
    }
    const double mid = 0.5 * (window.lo + window.hi);
    const double half = window.hi - window.lo;
    window = UniformGrid{mid - half, mid + half, window.n};
  }
  if (!est.mass_ok) {
    est.warnings.push_back("total mass " + std::to_string(est.F_vals.back()) + " outside tolerance");
  }

  if (errors.mode() == ErrorMode::unknown_error) {
    est.b_eps = check_b_eps(inputs->error_cf, bandwidth);
    if (!est.b_eps->holds) {
      est.warnings.push_back("B_eps(b) does not hold; integrability of the estimate is not guaranteed");
    }
  }
  est.spectral = std::move(inputs);
  return est;
}

DensityEstimate density_estimate(const ObservationSet& obs, double bandwidth, const DensityConfig& config)
{
  obs.validate();
  return density_estimate(obs.y, error_spectrum(obs), bandwidth, config);
}

double cdf_value(const DensityEstimate& est, double eta)
{
  const auto& g = est.x_grid;
  const double slack = 1e-12 * (g.hi - g.lo);
  if (!(eta >= g.lo - slack && eta <= g.hi + slack)) {
    fail(ErrorCode::invalid_argument, "cdf evaluation point outside the spatial grid; widen the grid");
  }
  const double pos = std::clamp((eta - g.lo) / g.spacing(), 0.0, static_cast<double>(g.n - 1));
  const auto i = std::min(static_cast<std::size_t>(pos), g.n - 2);
  const double frac = pos - static_cast<double>(i);
  return est.F_vals[i] + frac * (est.F_vals[i + 1] - est.F_vals[i]);
}

QuantileEstimate quantile_estimate(const DensityEstimate& est, const QuantileRequest& request)
{
  if (!(request.tau > 0.0 && request.tau < 1.0)) {
    fail(ErrorCode::invalid_argument, "tau must lie in (0, 1)");
  }
  const auto& g = est.x_grid;
  double lo = g.lo;
  double hi = g.hi;
  if (request.search_halfwidth) {
    if (!(*request.search_halfwidth > 0.0)) {
      fail(ErrorCode::invalid_argument, "search half-width must be positive");
    }
    lo = std::max(lo, -*request.search_halfwidth);
    hi = std::min(hi, *request.search_halfwidth);
  }
  if (lo > hi) {
    fail(ErrorCode::invalid_argument, "quantile search interval does not meet the spatial grid");
  }

  auto contrast = [&](double eta) { return cdf_value(est, eta) - request.tau; };

  std::vector<std::pair<double, double>> points; // (eta, M(eta))
  points.emplace_back(lo, contrast(lo));
  const double h = g.spacing();
  const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - g.lo) / h)));
  for (std::size_t i = first; i < g.n; ++i) {
    const double x = g.at(i);
    if (x <= lo) {
      continue;
    }
    if (x >= hi) {
      break;
    }
    points.emplace_back(x, est.F_vals[i] - request.tau);
  }
  if (hi > lo) {
    points.emplace_back(hi, contrast(hi));
  }

  std::vector<std::pair<double, double>> candidates = points;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    auto [a, fa] = points[i];
    auto [b, fb] = points[i + 1];
    if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) {
      continue;
    }
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = contrast(mid);
      if (fm == 0.0) {
        a = b = mid;
        fa = fm;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
        fb = fm;
      }
    }
    const double root = std::abs(fa) <= std::abs(fb) ? a : b;
    candidates.emplace_back(root, contrast(root));
  }
  std::sort(candidates.begin(), candidates.end());

  QuantileEstimate best{candidates.front().first, std::abs(candidates.front().second)};
  for (const auto& [eta, m] : candidates) {
    if (std::abs(m) < best.residual - kTieTol) {
      best = {eta, std::abs(m)};
    }
  }
  return best;
}

} // namespace deconvq
