#include "deconvq/kernels.hpp"

#include <cmath>
#include <vector>

namespace deconvq::kernels {

namespace {

double weight_at(std::span<const double> weights, std::size_t j)
{
  return weights.empty() ? 1.0 : weights[j];
}

} // namespace

namespace reference {

void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out)
{
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double u = u0 + static_cast<double>(k) * du;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double w = weight_at(weights, j);
      re += w * std::cos(u * points[j]);
      im += w * std::sin(u * points[j]);
    }
    out[k] = {re, im};
  }
}

void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out)
{
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double t = points[j];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double u = u0 + static_cast<double>(k) * du;
      const double c = std::cos(u * t);
      const double s = std::sin(u * t);
      re += coeffs[k].real() * c - coeffs[k].imag() * s;
      im += coeffs[k].real() * s + coeffs[k].imag() * c;
    }
    out[j] = {re, im};
  }
}

} // namespace reference

namespace portable {

void over_points(std::span<const double> points,
                 std::span<const double> weights,
                 double u0,
                 double du,
                 std::span<cplx> out)
{
  const std::size_t n = points.size();
  std::vector<double> zr(n), zi(n), sr(n), si(n);
  for (std::size_t j = 0; j < n; ++j) {
    sr[j] = std::cos(du * points[j]);
    si[j] = std::sin(du * points[j]);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k % kAnchorInterval == 0) {
      const double u = u0 + static_cast<double>(k) * du;
      for (std::size_t j = 0; j < n; ++j) {
        zr[j] = std::cos(u * points[j]);
        zi[j] = std::sin(u * points[j]);
      }
    }
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weight_at(weights, j);
      re += w * zr[j];
      im += w * zi[j];
      const double r = zr[j] * sr[j] - zi[j] * si[j];
      zi[j] = zr[j] * si[j] + zi[j] * sr[j];
      zr[j] = r;
    }
    out[k] = {re, im};
  }
}

void over_freqs(std::span<const cplx> coeffs,
                double u0,
                double du,
                std::span<const double> points,
                std::span<cplx> out)
{
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double t = points[j];
    const double sr = std::cos(du * t);
    const double si = std::sin(du * t);
    double zr = 0.0;
    double zi = 0.0;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (k % kAnchorInterval == 0) {
        const double u = u0 + static_cast<double>(k) * du;
        zr = std::cos(u * t);
        zi = std::sin(u * t);
      }
      const double cr = coeffs[k].real();
      const double ci = coeffs[k].imag();
      re += cr * zr - ci * zi;
      im += cr * zi + ci * zr;
      const double r = zr * sr - zi * si;
      zi = zr * si + zi * sr;
      zr = r;
    }
    out[j] = {re, im};
  }
}

} // namespace portable

} // namespace deconvq::kernels
