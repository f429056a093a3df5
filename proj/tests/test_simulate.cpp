#include "deconvq/error.hpp"
#include "deconvq/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

using namespace deconvq;
using namespace deconvq::sim;

namespace {

double mean(const std::vector<double>& v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v)
{
  const double m = mean(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

ScenarioConfig small_config()
{
  ScenarioConfig cfg;
  cfg.name = "small";
  cfg.n = 300;
  cfg.m = 300;
  cfg.replications = 4;
  cfg.taus = {0.25, 0.5, 0.75};
  cfg.master_seed = 99;
  return cfg;
}

} // namespace

TEST_CASE("seed derivation")
{
  CHECK(mix64(0) == 0);
  CHECK(child_seed(42, 0) != child_seed(42, 1));
  CHECK(child_seed(42, 0) != child_seed(43, 0));
  CHECK(child_seed(7, 3) == mix64(7 + 4 * 0x9E3779B97F4A7C15ULL));
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform_open());
  }
}

TEST_CASE("signal sampler")
{
  CHECK(std::abs(mean(sample_signal(SignalLaw{1, 1.0}, 100000, 1)) - 1.0) <= 0.02);
  CHECK(std::abs(mean(sample_signal(SignalLaw{2, 1.0}, 100000, 2)) - 2.0) <= 0.03);
  CHECK(sample_signal(SignalLaw{2, 1.0}, 50, 3) == sample_signal(SignalLaw{2, 1.0}, 50, 3));
  const auto draws = sample_signal(SignalLaw{1, 1.0}, 1000, 4);
  CHECK(std::all_of(draws.begin(), draws.end(), [](double x) { return x > 0.0; }));
  CHECK_THROWS_AS(sample_signal(SignalLaw{0, 1.0}, 10, 1), Error);
  CHECK_THROWS_AS(sample_signal(SignalLaw{1, -1.0}, 10, 1), Error);
  CHECK_THROWS_AS(sample_signal(SignalLaw{1, 1.0}, 0, 1), Error);
  CHECK(SignalLaw::parse("gamma:2,1.5").shape == 2);
  CHECK(SignalLaw::parse("gamma:2,1.5").scale == 1.5);
  CHECK_THROWS_AS(SignalLaw::parse("gamma:1.5,1"), Error);
  CHECK_THROWS_AS(SignalLaw::parse("beta:1,1"), Error);
}

TEST_CASE("error sampler")
{
  const auto lap = sample_error(ErrorLaw::laplace(1.0), 100000, 5);
  CHECK(std::abs(variance(lap) - 2.0) <= 0.1);
  auto sorted = lap;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::abs(sorted[sorted.size() / 2]) <= 0.02);
  const auto conv = sample_error(ErrorLaw::laplace_self_conv(1.0), 100000, 6);
  CHECK(std::abs(variance(conv) - 4.0) <= 0.2);
  CHECK(sample_error(ErrorLaw::laplace(1.0), 20, 7) == sample_error(ErrorLaw::laplace(1.0), 20, 7));
  CHECK_THROWS_AS(sample_error(ErrorLaw::laplace(0.0), 10, 1), Error);
}

TEST_CASE("true quantiles")
{
  CHECK(true_quantile(SignalLaw{1, 1.0}, 0.5) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(true_quantile(SignalLaw{1, 1.0}, 0.9) == doctest::Approx(2.302585).epsilon(1e-6));
  const double q2 = true_quantile(SignalLaw{2, 1.0}, 0.5);
  CHECK(q2 == doctest::Approx(1.678347).epsilon(1e-6));
  CHECK(std::abs(1.0 - std::exp(-q2) * (1.0 + q2) - 0.5) < 1e-10);
  CHECK(true_quantile(SignalLaw{2, 3.0}, 0.5) == doctest::Approx(3.0 * q2).epsilon(1e-10));
  CHECK_THROWS_AS(true_quantile(SignalLaw{1, 1.0}, 1.0), Error);
}

TEST_CASE("scenario config text format")
{
  const auto cfg = ScenarioConfig::parse(
    "# comment line\n"
    "name = demo\n"
    "n = 500   # trailing comment\n"
    "m = 400\n"
    "signal = gamma:2,1\n"
    "error = laplace2:1\n"
    "taus = 0.1,0.5,0.9\n"
    "reps = 12\n"
    "seed = 7\n"
    "delta = 0.2\n"
    "kernel_c = 0.4\n");
  CHECK(cfg.name == "demo");
  CHECK(cfg.n == 500);
  CHECK(cfg.m == 400);
  CHECK(cfg.signal.shape == 2);
  CHECK(cfg.error == ErrorLaw::laplace_self_conv(1.0));
  CHECK(cfg.taus == std::vector<double>{0.1, 0.5, 0.9});
  CHECK(cfg.replications == 12);
  CHECK(cfg.master_seed == 7);
  CHECK(cfg.estimator.delta == 0.2);
  CHECK(cfg.estimator.density.kernel.flat_radius == 0.4);

  const auto again = ScenarioConfig::parse(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());

  CHECK_THROWS_WITH_AS(ScenarioConfig::parse("bogus = 1\n"), doctest::Contains("bogus"), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse("n 5\n"), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse("reps = 0\n"), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse("taus = 0.5,0.3\n"), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse("n = ten\n"), Error);
}

TEST_CASE("replication draws are independent of schedule")
{
  const auto cfg = small_config();
  const auto a = draw_replication(cfg, 2);
  const auto b = draw_replication(cfg, 2);
  CHECK(a.y == b.y);
  CHECK(a.error_sample == b.error_sample);
  CHECK(a.y != draw_replication(cfg, 3).y);
  CHECK(a.y.size() == 300);
  CHECK(a.error_sample.size() == 300);
}

TEST_CASE("experiment is deterministic across thread counts")
{
  const auto cfg = small_config();
  const auto one = run_experiment(cfg, 1);
  const auto many = run_experiment(cfg, 3);
  CHECK(to_csv(one) == to_csv(many));
  CHECK(one.adaptive_errors == many.adaptive_errors);
  CHECK(one.naive_errors == many.naive_errors);
  for (std::size_t t = 0; t < cfg.taus.size(); ++t) {
    const auto& row = one.rows[t];
    CHECK(row.adaptive_rmse >= 0.0);
    double acc = 0.0;
    for (const double e : one.adaptive_errors[t]) acc += e * e;
    CHECK(std::abs(row.adaptive_rmse * row.adaptive_rmse - acc / 4.0) <= 1e-12);
  }
  CHECK(to_csv(one).rfind("tau,adaptive_rmse,naive_rmse,failures\n", 0) == 0);
}

TEST_CASE("single replication without measurement error")
{
  ScenarioConfig cfg;
  cfg.n = 2000;
  cfg.m = 50;
  cfg.zero_error = true;
  cfg.replications = 1;
  cfg.taus = {0.5};
  cfg.master_seed = 5;
  const auto table = run_experiment(cfg, 1);
  const auto rep = draw_replication(cfg, 0);
  const auto direct = adaptive_quantiles(rep.y, ErrorSpectrum::empirical(rep.error_sample), cfg.taus, cfg.estimator);
  CHECK(table.rows[0].adaptive_rmse == std::abs(direct.results[0].q - std::log(2.0)));
}

TEST_CASE("failed replications are counted")
{
  ScenarioConfig cfg = small_config();
  cfg.n = 3;
  cfg.replications = 2;
  const auto table = run_experiment(cfg, 1);
  CHECK(table.rows[0].failures == 2);
  CHECK(table.failure_messages.size() == 2);
  CHECK(std::isnan(table.rows[0].adaptive_rmse));
  CHECK(std::isfinite(table.rows[0].naive_rmse));
}

TEST_CASE("reference preset")
{
  const auto preset = table1_preset(50, 1);
  REQUIRE(preset.size() == 4);
  for (const auto& c : preset) {
    CHECK(c.replications == 50);
    CHECK(c.master_seed == 1);
    CHECK(c.n == 1000);
    CHECK(c.m == 1000);
    CHECK(c.taus.size() == 9);
  }
  CHECK(preset[0].error == ErrorLaw::laplace(1.0));
  CHECK(preset[2].error == ErrorLaw::laplace_self_conv(1.0));
  CHECK(preset[1].signal.shape == 2);
}

TEST_CASE("worker count honours the environment")
{
  setenv("DECONVQ_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("DECONVQ_THREADS", "0", 1);
  CHECK(worker_count() >= 1);
  unsetenv("DECONVQ_THREADS");
  CHECK(worker_count() >= 1);
}
