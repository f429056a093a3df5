#include "deconvq/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace deconvq::kernels;

namespace {

std::vector<const KernelTable*> fast_tables()
{
  std::vector<const KernelTable*> out{&portable_table()};
  if (avx2_table() != nullptr && cpu_supports_avx2()) {
    out.push_back(avx2_table());
  }
  return out;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

} // namespace

TEST_CASE("reference over_points matches the defining sum")
{
  const std::vector<double> t{0.3, -1.7, 2.5};
  const std::vector<double> w{0.5, 0.25, 0.25};
  std::vector<cplx> out(5);
  reference::over_points(t, w, -2.0, 1.0, out);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double u = -2.0 + static_cast<double>(k);
    cplx expect = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      expect += w[j] * std::polar(1.0, u * t[j]);
    }
    CHECK(std::abs(out[k] - expect) < 1e-15);
  }
}

TEST_CASE("fast backends agree with the reference backend")
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pt(-40.0, 40.0);
  std::uniform_real_distribution<double> wt(-1.0, 1.0);

  // Sizes straddle the vector width, the anchor interval and its multiples.
  for (const std::size_t nf : {1u, 7u, 8u, 9u, 127u, 128u, 129u, 1000u, 4097u}) {
    for (const std::size_t np : {1u, 3u, 8u, 17u, 250u}) {
      std::vector<double> t(np);
      std::vector<double> w(np);
      std::vector<cplx> c(nf);
      for (auto& v : t) v = pt(rng);
      for (auto& v : w) v = wt(rng);
      for (auto& v : c) v = {wt(rng), wt(rng)};
      const double u0 = -3.0;
      const double du = 6.0 / static_cast<double>(nf > 1 ? nf - 1 : 1);

      std::vector<cplx> ref_p(nf);
      std::vector<cplx> ref_f(np);
      reference::over_points(t, w, u0, du, ref_p);
      reference::over_freqs(c, u0, du, t, ref_f);

      for (const auto* table : fast_tables()) {
        CAPTURE(table->name);
        CAPTURE(nf);
        CAPTURE(np);
        std::vector<cplx> got_p(nf);
        std::vector<cplx> got_f(np);
        table->over_points(t, w, u0, du, got_p);
        table->over_freqs(c, u0, du, t, got_f);
        // Phase drift of the recurrence is bounded by the anchor interval.
        CHECK(max_abs_diff(got_p, ref_p) < 1e-11 * static_cast<double>(np));
        CHECK(max_abs_diff(got_f, ref_f) < 1e-11 * static_cast<double>(nf));
      }
    }
  }
}

TEST_CASE("empty inputs produce zeros")
{
  for (const auto* table : fast_tables()) {
    std::vector<cplx> out(4, cplx(7.0, 7.0));
    table->over_points({}, {}, 0.0, 1.0, out);
    for (const auto& v : out) {
      CHECK(v == cplx(0.0, 0.0));
    }
  }
}

TEST_CASE("backend selection can be forced and restored")
{
  const Backend original = active().backend;
  force_backend(Backend::reference);
  CHECK(active().backend == Backend::reference);
  force_backend(Backend::portable);
  CHECK(active().backend == Backend::portable);
  force_backend(original);
  CHECK(active().backend == original);
}
