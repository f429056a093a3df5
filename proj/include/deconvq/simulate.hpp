#pragma once

#include "deconvq/adaptive.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace deconvq::sim {

//! Gamma(shape, scale) signal; integer shape (sum of exponentials).
struct SignalLaw
{
  int shape = 1;
  double scale = 1.0;

  //! "gamma:1,1"
  static SignalLaw parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
};

//! splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

//! Seed of replication `index`: mix64(master + (index + 1) * golden gamma).
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index);

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  //! Uniform on the open interval (0, 1), 53 random bits.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

std::vector<double> sample_signal(const SignalLaw& law, std::size_t count, Rng& rng);
std::vector<double> sample_signal(const SignalLaw& law, std::size_t count, std::uint64_t seed);

//! Laplace by inverse CDF, Laplace self-convolution as a sum of two draws,
//! Gaussian by Box-Muller.
std::vector<double> sample_error(const ErrorLaw& law, std::size_t count, Rng& rng);
std::vector<double> sample_error(const ErrorLaw& law, std::size_t count, std::uint64_t seed);

double true_quantile(const SignalLaw& law, double tau);

struct ScenarioConfig
{
  std::string name = "scenario";
  std::size_t n = 1000;
  std::size_t m = 1000;
  SignalLaw signal;
  ErrorLaw error = ErrorLaw::laplace(1.0);
  //! Degenerate fixture: eps = eps* = 0.
  bool zero_error = false;
  std::vector<double> taus{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t replications = 200;
  std::uint64_t master_seed = 42;
  AdaptiveConfig estimator;

  void validate() const;

  //! Line-oriented `key = value` with `#` comments.
  static ScenarioConfig parse(std::string_view text);
  static ScenarioConfig load(const std::filesystem::path& path);
  std::string to_text() const;
};

struct RmseRow
{
  double tau = 0.0;
  double adaptive_rmse = 0.0;
  double naive_rmse = 0.0;
  std::size_t failures = 0;
};

struct RmseTable
{
  std::string scenario;
  std::vector<RmseRow> rows;
  //! [tau][replication]; NaN marks a failed adaptive estimate.
  std::vector<std::vector<double>> adaptive_errors;
  std::vector<std::vector<double>> naive_errors;
  std::vector<std::string> failure_messages;
};

//! Observations of one replication (exposed for tests).
struct Replication
{
  std::vector<double> y;
  std::vector<double> error_sample;
};
Replication draw_replication(const ScenarioConfig& config, std::size_t index);

//! Worker count from DECONVQ_THREADS (unset or 0: hardware concurrency).
unsigned worker_count();

RmseTable run_experiment(const ScenarioConfig& config, unsigned threads = 0);

std::string to_csv(const RmseTable& table);
std::string to_json_text(const std::vector<RmseTable>& tables, const std::vector<ScenarioConfig>& configs);

//! The four signal/error combinations of the reference simulation study.
std::vector<ScenarioConfig> table1_preset(std::size_t replications, std::uint64_t seed);

} // namespace deconvq::sim
