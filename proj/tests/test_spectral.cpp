#include "deconvq/error.hpp"
#include "deconvq/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace deconvq;

namespace {

std::vector<double> random_sample(std::size_t n, std::uint64_t seed, double spread = 3.0)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, spread);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

} // namespace

TEST_CASE("frequency grid is symmetric")
{
  for (const std::size_t n : {16u, 17u, 4097u}) {
    const FreqGrid g(2.5, n);
    CHECK(g.spacing() > 0.0);
    CHECK(g.node(0) == -2.5);
    CHECK(g.node(n - 1) == 2.5);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(g.node(g.mirror(k)) == -g.node(k));
    }
    CHECK(g.has_zero() == (n % 2 == 1));
  }
  CHECK_THROWS_AS(FreqGrid(1.0, 8), Error);
  CHECK_THROWS_AS(FreqGrid(0.0, 64), Error);
}

TEST_CASE("ecf examples")
{
  const FreqGrid g(3.0, 33);
  SUBCASE("point mass at zero")
  {
    const std::vector<double> s{0.0};
    const auto cf = ecf(s, g);
    for (const auto& v : cf.values) {
      CHECK(v == cplx(1.0, 0.0));
    }
  }
  SUBCASE("symmetric pair gives cosine")
  {
    const std::vector<double> s{1.0, -1.0};
    const auto cf = ecf(s, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::abs(cf.values[k] - std::cos(g.node(k))) < 1e-14);
    }
  }
  SUBCASE("value at the origin")
  {
    const std::vector<double> s{1.0, 2.0, 3.0};
    const auto cf = ecf(s, g);
    CHECK(cf.values[g.half_begin()] == cplx(1.0, 0.0));
  }
  CHECK_THROWS_AS(ecf(std::vector<double>{}, g), Error);
}

TEST_CASE("ecf invariants on random samples")
{
  const auto s = random_sample(300, 5);
  for (const std::size_t n : {64u, 65u, 1025u}) {
    const FreqGrid g(4.0, n);
    const auto cf = ecf(s, g);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(cf.values[g.mirror(k)] == std::conj(cf.values[k]));
      CHECK(std::abs(cf.values[k]) <= 1.0 + 1e-12);
      CHECK(cf.retained(k));
      CHECK(std::abs(cf.values[k] - oracle::ecf(s, g.node(k))) < 1e-12);
    }
    if (g.has_zero()) {
      CHECK(std::abs(cf.values[g.half_begin()] - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("ecf modulation under shift")
{
  const auto s = random_sample(200, 9);
  auto shifted = s;
  for (auto& v : shifted) v += 1.7;
  const FreqGrid g(5.0, 257);
  const auto a = ecf(s, g);
  const auto b = ecf(shifted, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(b.values[k] - std::polar(1.0, g.node(k) * 1.7) * a.values[k]) < 1e-12);
  }
}

TEST_CASE("truncated error ecf")
{
  const FreqGrid g(2.0, 17);
  SUBCASE("zero sample keeps everything")
  {
    const std::vector<double> s{0.0, 0.0, 0.0, 0.0};
    const auto cf = ecf_error_truncated(s, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(cf.values[k] == cplx(1.0, 0.0));
      CHECK(cf.retained(k));
    }
  }
  SUBCASE("exact cancellation at u = 1 is masked")
  {
    const double pi = std::numbers::pi;
    const std::vector<double> s{0.0, pi, 0.0, pi};
    const FreqGrid g1(1.0, 17);
    const auto cf = ecf_error_truncated(s, g1);
    CHECK(std::abs(cf.values.back()) < 1e-15);
    CHECK_FALSE(cf.retained(g1.size() - 1));
    CHECK_FALSE(cf.retained(0));
    CHECK(cf.retained(g1.half_begin()));
  }
  SUBCASE("mask is symmetric")
  {
    const auto s = random_sample(50, 3, 2.0);
    const FreqGrid g2(6.0, 301);
    const auto cf = ecf_error_truncated(s, g2);
    for (std::size_t k = 0; k < g2.size(); ++k) {
      CHECK(cf.mask[k] == cf.mask[g2.mirror(k)]);
      CHECK(cf.retained(k) == (std::abs(cf.values[k]) >= 1.0 / std::sqrt(50.0)));
    }
  }
  CHECK_THROWS_AS(ecf_error_truncated(std::vector<double>{1.0}, g), Error);
}

TEST_CASE("known characteristic functions")
{
  CHECK(known_charfn(ErrorLaw::laplace(1.0), 1.0) == cplx(0.5, 0.0));
  CHECK(std::abs(known_charfn(ErrorLaw::laplace_self_conv(1.0), 1.0) - 0.25) < 1e-15);
  CHECK(known_charfn(ErrorLaw::gaussian(2.0), 0.0) == cplx(1.0, 0.0));
  CHECK(std::abs(known_charfn(ErrorLaw::gaussian(2.0), 1.0) - std::exp(-2.0)) < 1e-15);
  // Gamma(k, eta): (1 - i eta u)^{-k}
  const cplx g = known_charfn(ErrorLaw::gamma(2.0, 0.5), 1.5);
  CHECK(std::abs(g - std::pow(cplx(1.0, -0.75), -2.0)) < 1e-14);
  CHECK_THROWS_AS(ErrorLaw::laplace(0.0).validate(), Error);
  CHECK_THROWS_AS(ErrorLaw::gaussian(-1.0).validate(), Error);

  const FreqGrid grid(10.0, 101);
  for (const auto& law : {ErrorLaw::laplace(0.7), ErrorLaw::gamma(3.0, 0.4), ErrorLaw::gaussian(0.3)}) {
    const auto cf = known_charfn_grid(law, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(cf.values[grid.mirror(k)] - std::conj(cf.values[k])) < 1e-12);
      CHECK(std::abs(cf.values[k]) <= 1.0 + 1e-12);
      CHECK(cf.retained(k) == (std::abs(cf.values[k]) > 0.0));
    }
  }
}

TEST_CASE("error law parsing")
{
  CHECK(ErrorLaw::parse("laplace:1") == ErrorLaw::laplace(1.0));
  CHECK(ErrorLaw::parse("laplace2:0.5") == ErrorLaw::laplace_self_conv(0.5));
  CHECK(ErrorLaw::parse("normal:2") == ErrorLaw::gaussian(2.0));
  CHECK(ErrorLaw::parse("gamma:2,0.5") == ErrorLaw::gamma(2.0, 0.5));
  for (const auto& law : {ErrorLaw::laplace(1.5), ErrorLaw::gamma(2.0, 3.0), ErrorLaw::gaussian(0.25)}) {
    CHECK(ErrorLaw::parse(law.to_string()) == law);
  }
  CHECK_THROWS_AS(ErrorLaw::parse("cauchy:1"), Error);
  CHECK_THROWS_AS(ErrorLaw::parse("laplace:-1"), Error);
  CHECK_THROWS_AS(ErrorLaw::parse("laplace"), Error);
}

TEST_CASE("flat-top kernel")
{
  const KernelSpec spec;
  CHECK(kernel_ft(spec, 0.0) == 1.0);
  CHECK(kernel_ft(spec, 1.2) == 0.0);
  CHECK(kernel_ft(spec, 0.25) == 1.0);
  CHECK(kernel_ft(spec, 1.0) == 0.0);
  CHECK(kernel_ft(spec, 0.5) == 1.0);

  for (const double c : {0.2, 0.5, 0.8}) {
    const KernelSpec s{c};
    for (double u = -1.3; u <= 1.3; u += 0.0137) {
      const double v = kernel_ft(s, u);
      CHECK(v == kernel_ft(s, -u));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(std::abs(v - oracle::flat_top(c, u)) < 1e-15);
    }
    // No jump across the edges of the transition band.
    for (const double edge : {c, 1.0}) {
      CHECK(std::abs(kernel_ft(s, edge + 1e-6) - kernel_ft(s, edge - 1e-6)) < 1e-6);
    }
  }
  CHECK_THROWS_AS(KernelSpec{0.0}.validate(), Error);
  CHECK_THROWS_AS(KernelSpec{1.0}.validate(), Error);
}

TEST_CASE("truncation pair")
{
  using namespace truncation;
  CHECK(a_c(-1.0) == 1.0);
  CHECK(a_c(0.0) == 0.0);
  CHECK(a_c(-5.0) == 1.0);
  CHECK(a_c(3.0) == 0.0);
  CHECK(a_s(-1.5) == 0.0);
  CHECK(a_s(0.5) == 0.0);
  CHECK(a_s(-1e-12) == doctest::Approx(1.0));
  for (double x = -1.2; x <= 0.2; x += 0.01) {
    const double ind = x <= 0.0 ? 1.0 : 0.0;
    CHECK(std::abs(a_s(x) - (ind - a_c(x))) < 1e-15);
    CHECK(std::abs(a_s(x) - oracle::a_s(x)) < 1e-15);
  }
}

TEST_CASE("Fourier transform of a_s")
{
  const FreqGrid grid(40.0, 401);
  const auto fa = truncation::fourier_a_s(grid);
  CHECK(std::abs(fa[grid.half_begin()] - 0.5) < 1e-13);
  // Spot checks against adaptive Simpson.
  for (const std::size_t k : {0u, 57u, 180u, 200u, 333u, 400u}) {
    const double u = grid.node(k);
    const cplx expect = oracle::simpson_complex(
      [&](double x) { return std::polar(oracle::a_s(x), u * x); }, -1.0, 0.0, 64, 1e-13);
    CHECK(std::abs(fa[k] - expect) < 1e-9);
  }
  // Decay bound |fa_s(u)| (1 + |u|) is finite and resolution-stable.
  auto decay = [&](const std::vector<cplx>& v) {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      m = std::max(m, std::abs(v[k]) * (1.0 + std::abs(grid.node(k))));
    }
    return m;
  };
  const double d1 = decay(fa);
  const double d2 = decay(truncation::fourier_a_s(grid, 1024));
  CHECK(std::isfinite(d1));
  CHECK(std::abs(d1 - d2) / d2 < 1e-4);

  const auto cached = truncation::fourier_a_s_cached(grid);
  CHECK(*cached == fa);
  CHECK(truncation::fourier_a_s_cached(grid).get() == cached.get());
}

TEST_CASE("inverse Fourier synthesis")
{
  const double pi = std::numbers::pi;
  SUBCASE("rectangle")
  {
    const FreqGrid g(1.0, 4097);
    CharFnGrid rect{g, std::vector<cplx>(g.size(), 1.0), std::vector<std::uint8_t>(g.size(), 1),
                    CharFnKind::known_error, 0};
    const UniformGrid x{0.0, pi, 2};
    const auto vals = inverse_fourier_grid(rect, x);
    CHECK(vals[0] == doctest::Approx(1.0 / pi).epsilon(1e-12));
    CHECK(std::abs(vals[1]) < 1e-7);
  }
  SUBCASE("flat-top kernel at zero")
  {
    const FreqGrid g(1.0, 4097);
    const KernelSpec spec;
    CharFnGrid k{g, {}, std::vector<std::uint8_t>(g.size(), 1), CharFnKind::known_error, 0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      k.values.push_back(kernel_ft(spec, g.node(i)));
    }
    const auto vals = inverse_fourier_grid(k, UniformGrid{-1.0, 0.0, 2});
    const double expect = oracle::simpson([&](double u) { return oracle::flat_top(0.5, u); }, -1.0, 1.0, 1e-13) /
                          (2.0 * pi);
    CHECK(std::abs(vals[1] - expect) < 1e-6);
  }
  SUBCASE("masked nodes contribute nothing")
  {
    const FreqGrid g(2.0, 65);
    CharFnGrid v{g, std::vector<cplx>(g.size(), 1.0), std::vector<std::uint8_t>(g.size(), 1),
                 CharFnKind::known_error, 0};
    auto masked = v;
    for (std::size_t i = 0; i < 10; ++i) {
      masked.mask[i] = masked.mask[g.mirror(i)] = 0;
      masked.values[i] = masked.values[g.mirror(i)] = cplx(1e6, 3.0);
    }
    for (std::size_t i = 0; i < 10; ++i) {
      v.values[i] = v.values[g.mirror(i)] = 0.0;
    }
    const UniformGrid x{-3.0, 3.0, 31};
    const auto a = inverse_fourier_grid(v, x);
    const auto b = inverse_fourier_grid(masked, x);
    for (std::size_t i = 0; i < x.n; ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-15);
    }
  }
  SUBCASE("hermitian violation is rejected")
  {
    const FreqGrid g(1.0, 33);
    CharFnGrid v{g, std::vector<cplx>(g.size(), cplx(0.0, 1.0)), std::vector<std::uint8_t>(g.size(), 1),
                 CharFnKind::known_error, 0};
    CHECK_THROWS_AS(inverse_fourier_grid(v, UniformGrid{0.0, 1.0, 4}), Error);
  }
  SUBCASE("synthesis of an ecf matches direct evaluation")
  {
    const auto s = random_sample(40, 21, 1.0);
    const FreqGrid g(3.0, 513);
    const auto cf = ecf(s, g);
    const std::vector<double> pts{-2.0, 0.1, 1.3};
    const auto got = hermitian_synthesis(g, cf.values, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        acc += g.weight(k) * (std::polar(1.0, -g.node(k) * pts[i]) * cf.values[k]).real();
      }
      CHECK(std::abs(got[i] - acc / (2.0 * pi)) < 1e-12);
    }
  }
}

TEST_CASE("B_eps check")
{
  SUBCASE("constant CF")
  {
    const FreqGrid g(10.0, 65);
    CharFnGrid cf{g, std::vector<cplx>(g.size(), 1.0), std::vector<std::uint8_t>(g.size(), 1),
                  CharFnKind::error_ecf, 100};
    const auto r = check_b_eps(cf, 0.1);
    CHECK(r.holds);
    CHECK(r.threshold == doctest::Approx(0.1 * std::pow(std::log(10.0), 1.5)).epsilon(1e-14));
    CHECK(r.threshold == doctest::Approx(0.34935).epsilon(1e-4));
    CHECK(r.margin == doctest::Approx(1.0 - r.threshold));
  }
  SUBCASE("a zero inside the band fails")
  {
    const FreqGrid g(10.0, 65);
    CharFnGrid cf{g, std::vector<cplx>(g.size(), 1.0), std::vector<std::uint8_t>(g.size(), 1),
                  CharFnKind::error_ecf, 100};
    cf.values[40] = cf.values[g.mirror(40)] = 0.0;
    CHECK_FALSE(check_b_eps(cf, 0.1).holds);
  }
  SUBCASE("threshold vanishes as b approaches 1")
  {
    const FreqGrid g(1.1, 65);
    CharFnGrid cf{g, std::vector<cplx>(g.size(), 1e-3), std::vector<std::uint8_t>(g.size(), 1),
                  CharFnKind::error_ecf, 100};
    CHECK(check_b_eps(cf, 1.0 - 1e-9).holds);
  }
  SUBCASE("grid must cover the band")
  {
    const FreqGrid g(5.0, 65);
    CharFnGrid cf{g, std::vector<cplx>(g.size(), 1.0), std::vector<std::uint8_t>(g.size(), 1),
                  CharFnKind::error_ecf, 100};
    CHECK_THROWS_AS(check_b_eps(cf, 0.1), Error);
  }
}

TEST_CASE("error spectra")
{
  const auto s = random_sample(64, 17, 1.0);
  const auto emp = ErrorSpectrum::empirical(s);
  CHECK(emp.mode() == ErrorMode::unknown_error);
  CHECK(emp.sample_size() == 64);
  CHECK(emp.is_retained(0.125));
  CHECK_FALSE(emp.is_retained(0.12));

  const FreqGrid g(3.0, 129);
  const auto a = emp.on_grid(g);
  const auto b = ecf_error_truncated(s, g);
  CHECK(a.values == b.values);
  CHECK(a.mask == b.mask);

  const auto known = ErrorSpectrum::known(ErrorLaw::laplace(1.0));
  CHECK(known.mode() == ErrorMode::known_error);
  CHECK(known.sample_size() == 0);
  const auto inj = ErrorSpectrum::injected(ErrorLaw::laplace(1.0), 1000);
  CHECK(inj.mode() == ErrorMode::unknown_error);
  const auto kv = known.on_grid(g);
  const auto iv = inj.on_grid(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(kv.values[k] == iv.values[k]);
  }
}
