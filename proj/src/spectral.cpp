#include "deconvq/spectral.hpp"

#include "deconvq/error.hpp"
#include "deconvq/kernels.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace deconvq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double parse_number(std::string_view text, std::string_view context)
{
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    fail(ErrorCode::parse, "cannot parse '" + std::string(text) + "' in " + std::string(context));
  }
  return value;
}

// Fill values[k] for k >= half_begin from `half`, then mirror by conjugation.
void mirror_half(const FreqGrid& grid, const std::vector<cplx>& half, std::vector<cplx>& values)
{
  const std::size_t hb = grid.half_begin();
  values.assign(grid.size(), cplx{});
  for (std::size_t i = 0; i < half.size(); ++i) {
    values[hb + i] = half[i];
    values[grid.mirror(hb + i)] = std::conj(half[i]);
  }
  if (grid.has_zero()) {
    values[hb] = cplx(values[hb].real(), 0.0);
  }
}

CharFnGrid sample_ecf(std::span<const double> sample, const FreqGrid& grid, CharFnKind kind)
{
  if (sample.empty()) {
    fail(ErrorCode::invalid_argument, "empirical characteristic function of an empty sample");
  }
  const std::size_t hb = grid.half_begin();
  std::vector<cplx> half(grid.size() - hb);
  kernels::exp_sum_over_points(sample, {}, grid.node(hb), grid.spacing(), half);
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  for (auto& v : half) {
    v *= inv_n;
  }
  if (grid.has_zero()) {
    half.front() = 1.0;
  }
  CharFnGrid out{grid, {}, std::vector<std::uint8_t>(grid.size(), 1), kind, sample.size()};
  mirror_half(grid, half, out.values);
  return out;
}

} // namespace

// ---------------------------------------------------------------- ErrorLaw

ErrorLaw ErrorLaw::laplace(double s) { return {Family::laplace, s, 1.0}; }
ErrorLaw ErrorLaw::laplace_self_conv(double s) { return {Family::laplace_self_conv, s, 1.0}; }
ErrorLaw ErrorLaw::gaussian(double sigma) { return {Family::gaussian, sigma, 1.0}; }
ErrorLaw ErrorLaw::gamma(double shape, double scale) { return {Family::gamma, scale, shape}; }

ErrorLaw ErrorLaw::parse(std::string_view text)
{
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::parse, "error law '" + std::string(text) + "' must look like name:params");
  }
  const auto name = text.substr(0, colon);
  const auto params = text.substr(colon + 1);
  ErrorLaw law;
  if (name == "gamma") {
    const auto comma = params.find(',');
    if (comma == std::string_view::npos) {
      fail(ErrorCode::parse, "gamma law needs 'gamma:shape,scale'");
    }
    law = gamma(parse_number(params.substr(0, comma), "gamma shape"),
                parse_number(params.substr(comma + 1), "gamma scale"));
  } else {
    const double p = parse_number(params, "error law parameter");
    if (name == "laplace") {
      law = laplace(p);
    } else if (name == "laplace_self_conv" || name == "laplace2") {
      law = laplace_self_conv(p);
    } else if (name == "gaussian" || name == "normal") {
      law = gaussian(p);
    } else {
      fail(ErrorCode::parse, "unknown error law '" + std::string(name) + "'");
    }
  }
  law.validate();
  return law;
}

std::string ErrorLaw::to_string() const
{
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case Family::laplace:
      os << "laplace:" << scale;
      break;
    case Family::laplace_self_conv:
      os << "laplace_self_conv:" << scale;
      break;
    case Family::gaussian:
      os << "gaussian:" << scale;
      break;
    case Family::gamma:
      os << "gamma:" << shape << "," << scale;
      break;
  }
  return os.str();
}

void ErrorLaw::validate() const
{
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorCode::invalid_argument, "error law scale must be positive");
  }
  if (family == Family::gamma && (!(shape > 0.0) || !std::isfinite(shape))) {
    fail(ErrorCode::invalid_argument, "gamma shape must be positive");
  }
}

cplx known_charfn(const ErrorLaw& law, double u)
{
  law.validate();
  const double su = law.scale * u;
  switch (law.family) {
    case ErrorLaw::Family::laplace:
      return 1.0 / (1.0 + su * su);
    case ErrorLaw::Family::laplace_self_conv: {
      const double l = 1.0 / (1.0 + su * su);
      return l * l;
    }
    case ErrorLaw::Family::gaussian:
      return std::exp(-0.5 * su * su);
    case ErrorLaw::Family::gamma:
      return std::pow(cplx(1.0, -su), -law.shape);
  }
  return 1.0;
}

// ---------------------------------------------------------------- FreqGrid

FreqGrid::FreqGrid(double cutoff, std::size_t num_points) : cutoff_(cutoff), n_(num_points)
{
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    fail(ErrorCode::invalid_argument, "frequency grid cutoff must be positive and finite");
  }
  if (num_points < 16) {
    fail(ErrorCode::invalid_argument, "frequency grid needs at least 16 points");
  }
}

// ---------------------------------------------------------------- CFs

CharFnGrid ecf(std::span<const double> sample, const FreqGrid& grid)
{
  return sample_ecf(sample, grid, CharFnKind::signal_ecf);
}

CharFnGrid ecf_error_truncated(std::span<const double> error_sample, const FreqGrid& grid)
{
  if (error_sample.size() < 2) {
    fail(ErrorCode::invalid_argument, "error sample needs at least 2 values");
  }
  auto out = sample_ecf(error_sample, grid, CharFnKind::error_ecf);
  const double threshold = 1.0 / std::sqrt(static_cast<double>(error_sample.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.mask[k] = std::abs(out.values[k]) >= threshold ? 1 : 0;
  }
  return out;
}

CharFnGrid known_charfn_grid(const ErrorLaw& law, const FreqGrid& grid)
{
  return ErrorSpectrum::known(law).on_grid(grid);
}

// ---------------------------------------------------------------- ErrorSpectrum

ErrorSpectrum ErrorSpectrum::empirical(std::vector<double> sample)
{
  if (sample.size() < 2) {
    fail(ErrorCode::invalid_argument, "error sample needs at least 2 values");
  }
  const std::size_t m = sample.size();
  return ErrorSpectrum(std::make_shared<const std::vector<double>>(std::move(sample)),
                       ErrorMode::unknown_error, m);
}

ErrorSpectrum ErrorSpectrum::known(const ErrorLaw& law)
{
  law.validate();
  return ErrorSpectrum(law, ErrorMode::known_error, 0);
}

ErrorSpectrum ErrorSpectrum::injected(const ErrorLaw& law, std::size_t m)
{
  law.validate();
  if (m < 2) {
    fail(ErrorCode::invalid_argument, "injected error spectrum needs m >= 2");
  }
  return ErrorSpectrum(law, ErrorMode::unknown_error, m);
}

bool ErrorSpectrum::is_retained(double modulus) const
{
  if (mode_ == ErrorMode::known_error) {
    return modulus > 0.0;
  }
  return modulus >= 1.0 / std::sqrt(static_cast<double>(m_));
}

std::vector<cplx> ErrorSpectrum::ladder(double u0, double du, std::size_t count) const
{
  std::vector<cplx> out(count);
  if (const auto* sample = std::get_if<std::shared_ptr<const std::vector<double>>>(&source_)) {
    const auto& s = **sample;
    kernels::exp_sum_over_points(s, {}, u0, du, out);
    const double inv = 1.0 / static_cast<double>(s.size());
    for (auto& v : out) {
      v *= inv;
    }
  } else {
    const auto& law = std::get<ErrorLaw>(source_);
    for (std::size_t k = 0; k < count; ++k) {
      out[k] = known_charfn(law, u0 + static_cast<double>(k) * du);
    }
  }
  return out;
}

CharFnGrid ErrorSpectrum::on_grid(const FreqGrid& grid) const
{
  const std::size_t hb = grid.half_begin();
  std::vector<cplx> half;
  const bool is_sample = std::holds_alternative<std::shared_ptr<const std::vector<double>>>(source_);
  if (is_sample) {
    half = ladder(grid.node(hb), grid.spacing(), grid.size() - hb);
  } else {
    // Closed forms are evaluated at the exact node positions.
    const auto& law = std::get<ErrorLaw>(source_);
    half.resize(grid.size() - hb);
    for (std::size_t i = 0; i < half.size(); ++i) {
      half[i] = known_charfn(law, grid.node(hb + i));
    }
  }
  if (grid.has_zero()) {
    half.front() = 1.0;
  }
  CharFnGrid out{grid, {}, std::vector<std::uint8_t>(grid.size(), 0),
                 mode_ == ErrorMode::known_error ? CharFnKind::known_error : CharFnKind::error_ecf, m_};
  mirror_half(grid, half, out.values);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.mask[k] = is_retained(std::abs(out.values[k])) ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------- kernel

void KernelSpec::validate() const
{
  if (!(flat_radius > 0.0 && flat_radius < 1.0)) {
    fail(ErrorCode::invalid_argument, "kernel flat radius must lie in (0, 1)");
  }
}

double smooth_step(double t)
{
  if (t <= 0.0) {
    return 0.0;
  }
  if (t >= 1.0) {
    return 1.0;
  }
  const double h0 = std::exp(-1.0 / t);
  const double h1 = std::exp(-1.0 / (1.0 - t));
  return h0 / (h0 + h1);
}

double kernel_ft(const KernelSpec& spec, double u)
{
  const double a = std::abs(u);
  if (a <= spec.flat_radius) {
    return 1.0;
  }
  if (a >= 1.0) {
    return 0.0;
  }
  return smooth_step((1.0 - a) / (1.0 - spec.flat_radius));
}

// ---------------------------------------------------------------- truncation

namespace truncation {

double a_c(double x)
{
  if (x <= -1.0) {
    return 1.0;
  }
  if (x >= 0.0) {
    return 0.0;
  }
  return smooth_step(-x);
}

double a_s(double x)
{
  return (x <= 0.0 ? 1.0 : 0.0) - a_c(x);
}

std::vector<cplx> fourier_a_s(const FreqGrid& grid, std::size_t panels)
{
  static constexpr std::array<double, 4> kNodes{0.1834346424956498, 0.5255324099163290,
                                                0.7966664774136267, 0.9602898564975363};
  static constexpr std::array<double, 4> kWeights{0.3626837833783620, 0.3137066458778873,
                                                  0.2223810344533745, 0.1012285362903763};
  if (panels == 0) {
    fail(ErrorCode::invalid_argument, "quadrature needs at least one panel");
  }
  const double h = 1.0 / static_cast<double>(panels);
  std::vector<double> x, w;
  x.reserve(8 * panels);
  w.reserve(8 * panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = -1.0 + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < kNodes.size(); ++i) {
      for (const double sign : {-1.0, 1.0}) {
        const double xi = mid + sign * 0.5 * h * kNodes[i];
        x.push_back(xi);
        w.push_back(0.5 * h * kWeights[i] * a_s(xi));
      }
    }
  }
  const std::size_t hb = grid.half_begin();
  std::vector<cplx> half(grid.size() - hb);
  kernels::exp_sum_over_points(x, w, grid.node(hb), grid.spacing(), half);
  std::vector<cplx> values;
  mirror_half(grid, half, values);
  return values;
}

std::shared_ptr<const std::vector<cplx>> fourier_a_s_cached(const FreqGrid& grid)
{
  using Key = std::pair<std::uint64_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const std::vector<cplx>>> cache;
  const Key key{std::bit_cast<std::uint64_t>(grid.cutoff()), grid.size()};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
  }
  auto values = std::make_shared<const std::vector<cplx>>(fourier_a_s(grid));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(values)).first->second;
}

} // namespace truncation

// ---------------------------------------------------------------- synthesis

std::vector<double> UniformGrid::nodes() const
{
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = at(i);
  }
  return out;
}

void UniformGrid::validate() const
{
  if (n < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::invalid_argument, "spatial grid needs n >= 2 and lo < hi");
  }
}

std::vector<double> hermitian_synthesis(const FreqGrid& grid,
                                        std::span<const cplx> values,
                                        std::span<const double> points)
{
  if (values.size() != grid.size()) {
    fail(ErrorCode::invalid_argument, "synthesis values do not match the frequency grid");
  }
  const std::size_t hb = grid.half_begin();
  std::vector<cplx> coeffs(grid.size() - hb);
  double defect = 0.0;
  for (std::size_t k = hb; k < grid.size(); ++k) {
    const cplx sym = 0.5 * (values[k] + std::conj(values[grid.mirror(k)]));
    const double fold = (grid.has_zero() && k == hb) ? 1.0 : 2.0;
    coeffs[k - hb] = fold * grid.weight(k) * sym;
    defect += fold * grid.weight(k) * std::abs(values[k] - std::conj(values[grid.mirror(k)]));
  }
  defect /= 2.0 * kTwoPi;

  std::vector<double> neg(points.size());
  std::transform(points.begin(), points.end(), neg.begin(), [](double t) { return -t; });
  std::vector<cplx> sums(points.size());
  kernels::exp_sum_over_freqs(coeffs, grid.node(hb), grid.spacing(), neg, sums);

  std::vector<double> out(points.size());
  double peak = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    out[j] = sums[j].real() / kTwoPi;
    peak = std::max(peak, std::abs(out[j]));
  }
  if (defect >= 1e-8 * (1.0 + peak)) {
    fail(ErrorCode::numerical,
         "inverse Fourier input is not Hermitian (imaginary residue bound " + std::to_string(defect) + ")");
  }
  return out;
}

std::vector<double> inverse_fourier_grid(const CharFnGrid& values, const UniformGrid& x_grid)
{
  x_grid.validate();
  std::vector<cplx> masked(values.values.size());
  for (std::size_t k = 0; k < masked.size(); ++k) {
    masked[k] = values.retained(k) ? values.values[k] : cplx{};
  }
  const auto x = x_grid.nodes();
  return hermitian_synthesis(values.grid, masked, x);
}

BEpsCheck check_b_eps(const CharFnGrid& error_cf, double bandwidth)
{
  if (!(bandwidth > 0.0 && bandwidth < 1.0)) {
    fail(ErrorCode::invalid_argument, "bandwidth must lie in (0, 1)");
  }
  const double reach = 1.0 / bandwidth;
  if (error_cf.grid.cutoff() < reach * (1.0 - 1e-12)) {
    fail(ErrorCode::invalid_argument, "error CF grid does not cover [-1/b, 1/b]");
  }
  if (error_cf.sample_size == 0) {
    fail(ErrorCode::invalid_argument, "B_eps check needs an error sample size");
  }
  double min_mod = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < error_cf.grid.size(); ++k) {
    if (std::abs(error_cf.grid.node(k)) <= reach * (1.0 + 1e-12)) {
      min_mod = std::min(min_mod, std::abs(error_cf.values[k]));
    }
  }
  BEpsCheck out;
  out.min_modulus = min_mod;
  out.threshold = std::pow(std::abs(std::log(bandwidth)), 1.5) /
                  std::sqrt(static_cast<double>(error_cf.sample_size));
  out.margin = min_mod - out.threshold;
  out.holds = min_mod >= out.threshold;
  return out;
}

} // namespace deconvq
