#include "deconvq/theory.hpp"

#include "deconvq/error.hpp"

#include <cmath>

namespace deconvq::theory {

void SmoothnessParams::validate() const
{
  if (!(alpha > 0 && beta > 0 && R > 0 && r > 0 && zeta > 0 && gamma >= 0)) {
    fail(ErrorCode::invalid_argument, "smoothness parameters must be positive (gamma >= 0)");
  }
}

int floor_strict(double alpha)
{
  const double f = std::floor(alpha);
  return static_cast<int>(f == alpha ? f - 1.0 : f);
}

double rate_psi(double k, double alpha, double beta)
{
  if (!(k >= 1.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "rate needs k >= 1 and alpha, beta > 0");
  }
  if (beta < 0.5) {
    return 1.0 / std::sqrt(k);
  }
  if (beta == 0.5) {
    return std::sqrt(std::log(k) / k);
  }
  return std::pow(k, -(alpha + 1.0) / (2.0 * alpha + 2.0 * beta + 1.0));
}

double oracle_bandwidth(double n, double m, double alpha, double beta)
{
  if (!(n >= 1.0 && m >= 1.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "oracle bandwidth needs n, m >= 1 and alpha, beta > 0");
  }
  const double k = std::min(n, m);
  return std::pow(k, -1.0 / (2.0 * alpha + 2.0 * std::max(beta, 0.5) + 1.0));
}

double bias_bound(double b, double alpha, double R, double zeta, double kernel_moment)
{
  if (!(b > 0.0) || !(alpha > 0.0) || !(R > 0.0) || !(zeta > 0.0) || !(kernel_moment >= 0.0)) {
    fail(ErrorCode::invalid_argument, "bias bound needs positive b, alpha, R, zeta");
  }
  const double d = R / std::tgamma(floor_strict(alpha) + 2.0) + 2.0 * std::pow(zeta, -alpha - 1.0);
  return d * kernel_moment * std::pow(b, alpha + 1.0);
}

double kernel_abs_moment(const KernelSpec& spec, double order)
{
  spec.validate();
  // K decays faster than any polynomial; [-400, 400] holds all of it that
  // matters for moderate orders.
  const FreqGrid grid(1.0, 2049);
  CharFnGrid phi{grid, std::vector<cplx>(grid.size()), std::vector<std::uint8_t>(grid.size(), 1),
                 CharFnKind::known_error, 0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    phi.values[k] = kernel_ft(spec, grid.node(k));
  }
  const UniformGrid x{-400.0, 400.0, 80001};
  const auto K = inverse_fourier_grid(phi, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.n; ++i) {
    const double w = (i == 0 || i + 1 == x.n) ? 0.5 : 1.0;
    acc += w * std::abs(K[i]) * std::pow(std::abs(x.at(i)), order);
  }
  return acc * x.spacing();
}

} // namespace deconvq::theory
