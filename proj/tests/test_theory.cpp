#include "deconvq/theory.hpp"

#include <doctest.h>

#include <cmath>

using namespace deconvq;
using namespace deconvq::theory;

TEST_CASE("strict floor")
{
  CHECK(floor_strict(1.0) == 0);
  CHECK(floor_strict(1.5) == 1);
  CHECK(floor_strict(2.0) == 1);
  CHECK(floor_strict(0.3) == 0);
  CHECK(floor_strict(3.0000001) == 3);
}

TEST_CASE("rate function")
{
  CHECK(rate_psi(100, 1.0, 0.3) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(rate_psi(1000, 1.0, 2.0) == doctest::Approx(std::pow(1000.0, -2.0 / 7.0)).epsilon(1e-15));
  CHECK(rate_psi(1000, 1.0, 2.0) == doctest::Approx(0.138950).epsilon(1e-6));
  const double e2 = std::exp(2.0);
  CHECK(rate_psi(e2, 1.0, 0.5) == doctest::Approx(std::sqrt(2.0 / e2)).epsilon(1e-14));
  CHECK(rate_psi(e2, 1.0, 0.5) == doctest::Approx(0.520260).epsilon(1e-6));
  CHECK(rate_psi(e2, 1.0, 0.5) == doctest::Approx(0.520130).epsilon(1e-3));
  // Exact equality selects the middle branch; a neighbour does not.
  CHECK(rate_psi(1000, 1.0, std::nextafter(0.5, 1.0)) != rate_psi(1000, 1.0, 0.5));

  for (const double beta : {0.2, 0.5, 1.0, 4.0}) {
    for (const double alpha : {0.6, 1.0, 2.5}) {
      double prev = INFINITY;
      for (double k = 3; k < 1e7; k *= 1.7) {
        const double r = rate_psi(k, alpha, beta);
        CHECK(r <= prev);
        prev = r;
      }
    }
  }
}

TEST_CASE("oracle bandwidth")
{
  CHECK(oracle_bandwidth(1000, 1000, 1.0, 2.0) == doctest::Approx(0.372759).epsilon(1e-6));
  CHECK(oracle_bandwidth(1000, 1e6, 1.0, 2.0) == oracle_bandwidth(1000, 1000, 1.0, 2.0));
  CHECK(oracle_bandwidth(1000, 1000, 1.0, 0.3) == doctest::Approx(0.177828).epsilon(1e-6));
  CHECK(oracle_bandwidth(1000, 1000, 1.0, 0.2) == oracle_bandwidth(1000, 1000, 1.0, 0.4));
  CHECK(oracle_bandwidth(500, 2000, 1.3, 2.0) == oracle_bandwidth(2000, 500, 1.3, 2.0));
  double prev = INFINITY;
  for (double n = 10; n < 1e8; n *= 3) {
    const double b = oracle_bandwidth(n, 2 * n, 1.0, 2.0);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("bias bound")
{
  CHECK(bias_bound(0.5, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(bias_bound(0.5, 1.0, 1.0, 1.0, 2.0) == 2.0 * bias_bound(0.5, 1.0, 1.0, 1.0, 1.0));
  // <1.5> = 1, so D = R / 2! + 2 zeta^{-2.5}.
  CHECK(bias_bound(0.25, 1.5, 2.0, 0.5, 1.0) ==
        doctest::Approx((2.0 / 2.0 + 2.0 * std::pow(0.5, -2.5)) * std::pow(0.25, 2.5)).epsilon(1e-14));
  double prev = INFINITY;
  for (double b = 0.9; b > 1e-4; b *= 0.8) {
    const double v = bias_bound(b, 1.0, 1.0, 1.0, 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-7);
}

TEST_CASE("kernel moments")
{
  const KernelSpec spec;
  // Zeroth absolute moment is at least the integral of K, which is 1.
  const double m0 = kernel_abs_moment(spec, 0.0);
  CHECK(m0 >= 1.0 - 1e-6);
  const double m2 = kernel_abs_moment(spec, 2.0);
  CHECK(std::isfinite(m2));
  CHECK(m2 > 0.0);
}

TEST_CASE("smoothness parameters")
{
  SmoothnessParams p;
  CHECK_NOTHROW(p.validate());
  p.gamma = 0.0;
  CHECK_NOTHROW(p.validate());
  p.alpha = 0.0;
  CHECK_THROWS(p.validate());
}
