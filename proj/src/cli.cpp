#include "deconvq/cli.hpp"

#include "deconvq/report.hpp"
#include "deconvq/samples.hpp"
#include "deconvq/simulate.hpp"
#include "deconvq/theory.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace deconvq {

namespace {

namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_file(const fs::path& path, const std::string& text)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  }
}

struct EstimateArgs
{
  std::string data;
  std::string column = "y";
  std::string errors;
  std::string error_column = "eps";
  std::string paired;
  std::string known_error;
  std::vector<double> taus{0.5};
  std::optional<double> bandwidth;
  double delta = 0.1;
  double kernel_c = 0.5;
  std::size_t grid_points = 4097;
  std::string out;
  std::string format = "json";
};

RunReport cmd_estimate(const EstimateArgs& a)
{
  const int sources = int(!a.errors.empty()) + int(!a.paired.empty()) + int(!a.known_error.empty());
  if (sources != 1) {
    fail(ErrorCode::usage, "exactly one of --errors, --paired, --known-error is required");
  }
  if (!a.paired.empty() && !a.data.empty()) {
    fail(ErrorCode::usage, "--paired supplies the observations; drop --data");
  }
  if (a.paired.empty() && a.data.empty()) {
    fail(ErrorCode::usage, "--data is required unless --paired is given");
  }

  RunReport report;
  ObservationSet obs;
  if (!a.paired.empty()) {
    obs = paired_to_deconv(load_paired_csv(a.paired));
    report.inputs.data_source = a.paired + " (paired mean)";
    report.inputs.error_source = a.paired + " (paired half difference)";
  } else {
    auto y = load_column_or_only_csv(a.data, a.column);
    report.inputs.data_source = a.data;
    if (!a.errors.empty()) {
      obs = ObservationSet::with_error_sample(std::move(y), load_column_or_only_csv(a.errors, a.error_column));
      report.inputs.error_source = a.errors;
    } else {
      const auto law = ErrorLaw::parse(a.known_error);
      obs = ObservationSet::with_known_error(std::move(y), law);
      report.inputs.error_source = law.to_string();
    }
  }
  obs.validate();

  AdaptiveConfig cfg;
  cfg.delta = a.delta;
  cfg.density.kernel.flat_radius = a.kernel_c;
  cfg.density.freq_points = a.grid_points;
  if (a.bandwidth) {
    cfg.candidates = std::vector<double>{*a.bandwidth};
  }
  cfg.validate();

  const auto spectrum = error_spectrum(obs);
  report.inputs.n = obs.n();
  report.inputs.m = obs.m();
  report.inputs.mode = obs.has_error_sample() ? "unknown_error" : "known_error";
  auto& s = report.settings;
  s.taus = a.taus;
  s.delta = cfg.delta;
  s.kernel_c = cfg.density.kernel.flat_radius;
  s.ratio = cfg.ratio;
  s.b_max = cfg.b_max;
  s.n_cap = cfg.n_cap;
  s.freq_points = cfg.density.freq_points;
  s.x_points = cfg.density.x_points;
  s.tail_tol = cfg.density.tail_tol;
  s.bandwidth = a.bandwidth;

  auto run = adaptive_quantiles(obs.y, spectrum, a.taus, cfg);
  report.grid = std::move(run.grid);
  report.results = std::move(run.results);
  return report;
}

struct SimulateArgs
{
  std::string config;
  std::optional<std::string> signal;
  std::optional<std::string> error;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::optional<long long> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> taus;
  bool table1 = false;
  std::string out_dir = "results";
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
  if (a.reps && *a.reps < 1) {
    fail(ErrorCode::invalid_argument, "--reps must be at least 1");
  }
  std::vector<sim::ScenarioConfig> configs;
  if (a.table1) {
    if (!a.config.empty() || a.signal || a.error) {
      fail(ErrorCode::usage, "--paper-table1 fixes the scenarios; drop --config, --signal, --error");
    }
    configs = sim::table1_preset(a.reps ? static_cast<std::size_t>(*a.reps) : 200, a.seed.value_or(42));
  } else {
    configs.push_back(a.config.empty() ? sim::ScenarioConfig{} : sim::ScenarioConfig::load(a.config));
  }
  for (auto& c : configs) {
    if (a.signal) {
      c.signal = sim::SignalLaw::parse(*a.signal);
    }
    if (a.error) {
      c.error = ErrorLaw::parse(*a.error);
    }
    if (a.n) {
      c.n = *a.n;
    }
    if (a.m) {
      c.m = *a.m;
    }
    if (a.reps) {
      c.replications = static_cast<std::size_t>(*a.reps);
    }
    if (a.seed) {
      c.master_seed = *a.seed;
    }
    if (a.taus) {
      c.taus = *a.taus;
    }
    c.validate();
  }

  std::vector<sim::RmseTable> tables;
  const fs::path dir(a.out_dir);
  for (const auto& c : configs) {
    tables.push_back(sim::run_experiment(c));
    write_file(dir / (c.name + ".csv"), sim::to_csv(tables.back()));
    out << c.name << "\n" << sim::to_csv(tables.back());
    for (const auto& msg : tables.back().failure_messages) {
      out << "failed " << msg << "\n";
    }
  }
  write_file(dir / "rmse.json", sim::to_json_text(tables, configs));
}

std::string dump(const nlohmann::ordered_json& j)
{
  return j.dump(2) + "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Deconvolution quantile estimation with adaptive bandwidth selection", "deconvq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate quantiles of the error-free signal");
  estimate->add_option("--data", est.data, "CSV with the observations (column y, or a single column)");
  estimate->add_option("--column", est.column, "Observation column name")->capture_default_str();
  estimate->add_option("--errors", est.errors, "CSV with an error sample (column eps, or a single column)");
  estimate->add_option("--error-column", est.error_column, "Error sample column name")->capture_default_str();
  estimate->add_option("--paired", est.paired, "CSV with repeated measurements y1,y2");
  estimate->add_option("--known-error", est.known_error, "Known error law, e.g. laplace:1");
  estimate->add_option("--tau", est.taus, "Quantile levels")->delimiter(',')->capture_default_str();
  estimate->add_option("--bandwidth", est.bandwidth, "Fixed bandwidth (bypasses adaptation)");
  estimate->add_option("--delta", est.delta, "Interval inflation parameter")->capture_default_str();
  estimate->add_option("--kernel-c", est.kernel_c, "Flat-top radius of the kernel")->capture_default_str();
  estimate->add_option("--grid-points", est.grid_points, "Frequency grid points")->capture_default_str();
  estimate->add_option("--out", est.out, "Write the report here instead of stdout");
  estimate->add_option("--format", est.format, "json or csv")
    ->check(CLI::IsMember({"json", "csv"}))
    ->capture_default_str();

  SimulateArgs simargs;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo RMSE study");
  simulate->add_option("--config", simargs.config, "Scenario file (key = value lines)");
  simulate->add_option("--signal", simargs.signal, "Signal law, e.g. gamma:1,1");
  simulate->add_option("--error", simargs.error, "Error law, e.g. laplace:1");
  simulate->add_option("--n", simargs.n, "Sample size");
  simulate->add_option("--m", simargs.m, "Error sample size");
  simulate->add_option("--reps", simargs.reps, "Replications");
  simulate->add_option("--seed", simargs.seed, "Master seed");
  simulate->add_option("--taus", simargs.taus, "Quantile levels")->delimiter(',');
  simulate->add_flag("--paper-table1", simargs.table1, "Run the four reference scenarios");
  simulate->add_option("--out-dir", simargs.out_dir, "Output directory")->capture_default_str();

  auto* inspect = app.add_subcommand("inspect", "Theoretical quantities and bandwidth grids");
  inspect->require_subcommand(1);

  double k = 0.0;
  double alpha = 1.0;
  double beta = 2.0;
  auto* rate = inspect->add_subcommand("rate", "Minimax rate psi_k");
  rate->add_option("--k", k, "Sample size")->required();
  rate->add_option("--alpha", alpha, "Smoothness")->required();
  rate->add_option("--beta", beta, "Ill-posedness")->required();

  double n = 0.0;
  double m = 0.0;
  auto* oracle = inspect->add_subcommand("oracle-bandwidth", "Rate-optimal deterministic bandwidth");
  oracle->add_option("--n", n, "Sample size")->required();
  oracle->add_option("--m", m, "Error sample size")->required();
  oracle->add_option("--alpha", alpha, "Smoothness")->required();
  oracle->add_option("--beta", beta, "Ill-posedness")->required();

  double b = 0.0;
  double R = 1.0;
  double zeta = 1.0;
  std::optional<double> moment;
  double kernel_c = 0.5;
  auto* bias = inspect->add_subcommand("bias-bound", "Deterministic bias bound D b^(alpha+1)");
  bias->add_option("--b", b, "Bandwidth")->required();
  bias->add_option("--alpha", alpha, "Smoothness")->required();
  bias->add_option("--R", R, "Hoelder radius")->capture_default_str();
  bias->add_option("--zeta", zeta, "Neighbourhood radius")->capture_default_str();
  bias->add_option("--kernel-moment", moment, "int |K(x)| |x|^(alpha+1) dx (computed when omitted)");
  bias->add_option("--kernel-c", kernel_c, "Flat-top radius used to compute the moment")->capture_default_str();

  EstimateArgs gridargs;
  AdaptiveConfig gridcfg;
  auto* grid = inspect->add_subcommand("grid", "Bandwidth ladder and I(b) trace for a data set");
  grid->add_option("--data", gridargs.data, "CSV with the observations")->required();
  grid->add_option("--column", gridargs.column, "Observation column name")->capture_default_str();
  grid->add_option("--errors", gridargs.errors, "CSV with an error sample");
  grid->add_option("--error-column", gridargs.error_column, "Error sample column name")->capture_default_str();
  grid->add_option("--known-error", gridargs.known_error, "Known error law");
  grid->add_option("--ratio", gridcfg.ratio, "Geometric ratio")->capture_default_str();
  grid->add_option("--b-max", gridcfg.b_max, "Largest bandwidth")->capture_default_str();
  grid->add_option("--n-cap", gridcfg.n_cap, "Ladder length")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    err << error_json_text(ErrorCode::usage, e.what());
    return kExitUsage;
  }

  try {
    if (*estimate) {
      const auto report = cmd_estimate(est);
      const auto text = est.format == "json" ? to_json_text(report) : to_csv(report);
      if (est.out.empty()) {
        out << text;
      } else {
        write_file(est.out, text);
      }
    } else if (*simulate) {
      cmd_simulate(simargs, out);
    } else if (*rate) {
      nlohmann::ordered_json j{{"k", k}, {"alpha", alpha}, {"beta", beta},
                               {"rate", theory::rate_psi(k, alpha, beta)}};
      if (beta != 0.5 && std::abs(beta - 0.5) < 1e-6) {
        j["note"] = "beta is near 1/2; the logarithmic branch applies only at exactly 1/2";
      }
      out << dump(j);
    } else if (*oracle) {
      out << dump({{"n", n}, {"m", m}, {"alpha", alpha}, {"beta", beta},
                   {"bandwidth", theory::oracle_bandwidth(n, m, alpha, beta)}});
    } else if (*bias) {
      KernelSpec spec;
      spec.flat_radius = kernel_c;
      const double mom = moment ? *moment : theory::kernel_abs_moment(spec, alpha + 1.0);
      out << dump({{"b", b}, {"alpha", alpha}, {"R", R}, {"zeta", zeta}, {"kernel_moment", mom},
                   {"bound", theory::bias_bound(b, alpha, R, zeta, mom)}});
    } else if (*grid) {
      if (gridargs.errors.empty() == gridargs.known_error.empty()) {
        fail(ErrorCode::usage, "exactly one of --errors, --known-error is required");
      }
      auto y = load_column_or_only_csv(gridargs.data, gridargs.column);
      const auto obs = gridargs.errors.empty()
                         ? ObservationSet::with_known_error(std::move(y), ErrorLaw::parse(gridargs.known_error))
                         : ObservationSet::with_error_sample(
                             std::move(y), load_column_or_only_csv(gridargs.errors, gridargs.error_column));
      obs.validate();
      const auto g = build_bandwidth_grid(error_spectrum(obs), obs.n(), obs.m(), gridcfg);
      const auto cands = g.candidates();
      out << dump({{"n", obs.n()},
                   {"m", obs.m()},
                   {"ratio", g.ratio},
                   {"b_max", gridcfg.b_max},
                   {"n_cap", gridcfg.n_cap},
                   {"ladder", g.ladder},
                   {"integral_trace", g.integral_trace},
                   {"j_tilde_index", g.j_tilde_index},
                   {"candidates", std::vector<double>(cands.begin(), cands.end())}});
    }
  } catch (const Error& e) {
    err << error_json_text(e.code(), e.what());
    return e.code() == ErrorCode::usage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << error_json_text(ErrorCode::numerical, e.what());
    return kExitFailure;
  }
  return 0;
}

} // namespace deconvq
