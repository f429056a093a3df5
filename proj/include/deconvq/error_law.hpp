#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace deconvq {

//! Closed-form error laws with known characteristic functions.
struct ErrorLaw
{
  enum class Family
  {
    laplace,           // scale s: phi(u) = 1 / (1 + s^2 u^2)
    laplace_self_conv, // Laplace(s) * Laplace(s): phi(u) = 1 / (1 + s^2 u^2)^2
    gaussian,          // sd sigma: phi(u) = exp(-sigma^2 u^2 / 2)
    gamma              // shape k, scale eta: phi(u) = (1 - i eta u)^(-k)
  };

  Family family = Family::laplace;
  double scale = 1.0; // s, sigma or eta
  double shape = 1.0; // gamma only

  static ErrorLaw laplace(double s);
  static ErrorLaw laplace_self_conv(double s);
  static ErrorLaw gaussian(double sigma);
  static ErrorLaw gamma(double shape, double scale);

  //! Parses "laplace:1", "laplace_self_conv:1" (alias "laplace2"),
  //! "gaussian:0.5", "gamma:2,1".
  static ErrorLaw parse(std::string_view text);

  std::string to_string() const;

  void validate() const;

  friend bool operator==(const ErrorLaw&, const ErrorLaw&) = default;
};

std::complex<double> known_charfn(const ErrorLaw& law, double u);

} // namespace deconvq
