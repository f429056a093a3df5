#pragma once

#include "deconvq/spectral.hpp"

namespace deconvq::theory {

struct SmoothnessParams
{
  double alpha = 1.0;
  double beta = 2.0;
  double R = 1.0;
  double r = 1.0;
  double zeta = 1.0;
  double gamma = 4.0;

  void validate() const;
};

//! Largest integer strictly smaller than alpha (so <1> = 0, <1.5> = 1).
int floor_strict(double alpha);

//! psi_k(alpha, beta): k^{-1/2} for beta < 1/2, (log k / k)^{1/2} at exactly
//! 1/2, k^{-(alpha+1)/(2 alpha + 2 beta + 1)} above.
double rate_psi(double k, double alpha, double beta);

//! (n ^ m)^{-1 / (2 alpha + 2 max(beta, 1/2) + 1)}
double oracle_bandwidth(double n, double m, double alpha, double beta);

//! D b^{alpha+1} with D = (R / (<alpha>+1)! + 2 zeta^{-alpha-1}) * kernel_moment.
double bias_bound(double b, double alpha, double R, double zeta, double kernel_moment);

//! int |K(x)| |x|^order dx for the flat-top kernel, by synthesis of K on a
//! wide grid and trapezoid quadrature.
double kernel_abs_moment(const KernelSpec& spec, double order);

} // namespace deconvq::theory
