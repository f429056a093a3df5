#include "deconvq/simulate.hpp"

#include "deconvq/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace deconvq::sim {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
T parse_value(std::string_view text, std::string_view key)
{
  T value{};
  text = trim(text);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::parse, "config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text, std::string_view key)
{
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(parse_value<double>(text.substr(start, comma - start), key));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

std::string fmt_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double gamma_cdf_integer(int shape, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  double term = 1.0;
  double sum = 1.0;
  for (int i = 1; i < shape; ++i) {
    term *= x / i;
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

} // namespace

SignalLaw SignalLaw::parse(std::string_view text)
{
  const auto colon = text.find(':');
  const auto comma = text.find(',');
  if (text.substr(0, colon) != "gamma" || colon == std::string_view::npos || comma == std::string_view::npos) {
    fail(ErrorCode::parse, "signal law must look like gamma:shape,scale");
  }
  SignalLaw law;
  const double shape = parse_value<double>(text.substr(colon + 1, comma - colon - 1), "signal");
  law.scale = parse_value<double>(text.substr(comma + 1), "signal");
  if (shape != std::floor(shape) || shape < 1.0 || shape > 1000.0) {
    fail(ErrorCode::invalid_argument, "signal gamma shape must be a positive integer");
  }
  law.shape = static_cast<int>(shape);
  law.validate();
  return law;
}

std::string SignalLaw::to_string() const
{
  return "gamma:" + std::to_string(shape) + "," + fmt_double(scale);
}

void SignalLaw::validate() const
{
  if (shape < 1 || !(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorCode::invalid_argument, "signal law needs integer shape >= 1 and positive scale");
  }
}

std::uint64_t mix64(std::uint64_t x)
{
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index)
{
  return mix64(master_seed + (index + 1) * kGoldenGamma);
}

std::vector<double> sample_signal(const SignalLaw& law, std::size_t count, Rng& rng)
{
  law.validate();
  if (count < 1) {
    fail(ErrorCode::invalid_argument, "sample count must be positive");
  }
  std::vector<double> out(count);
  for (auto& v : out) {
    double s = 0.0;
    for (int i = 0; i < law.shape; ++i) {
      s -= law.scale * std::log(rng.uniform_open());
    }
    v = s;
  }
  return out;
}

std::vector<double> sample_signal(const SignalLaw& law, std::size_t count, std::uint64_t seed)
{
  Rng rng(seed);
  return sample_signal(law, count, rng);
}

std::vector<double> sample_error(const ErrorLaw& law, std::size_t count, Rng& rng)
{
  law.validate();
  if (count < 1) {
    fail(ErrorCode::invalid_argument, "sample count must be positive");
  }
  auto laplace = [&]() {
    const double u = rng.uniform_open();
    return u < 0.5 ? law.scale * std::log(2.0 * u) : -law.scale * std::log(2.0 * (1.0 - u));
  };
  std::vector<double> out(count);
  for (auto& v : out) {
    switch (law.family) {
      case ErrorLaw::Family::laplace:
        v = laplace();
        break;
      case ErrorLaw::Family::laplace_self_conv:
        v = laplace();
        v += laplace();
        break;
      case ErrorLaw::Family::gaussian: {
        const double r = std::sqrt(-2.0 * std::log(rng.uniform_open()));
        v = law.scale * r * std::cos(2.0 * std::numbers::pi * rng.uniform_open());
        break;
      }
      case ErrorLaw::Family::gamma:
        fail(ErrorCode::invalid_argument, "gamma error sampling is not supported");
    }
  }
  return out;
}

std::vector<double> sample_error(const ErrorLaw& law, std::size_t count, std::uint64_t seed)
{
  Rng rng(seed);
  return sample_error(law, count, rng);
}

double true_quantile(const SignalLaw& law, double tau)
{
  law.validate();
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::invalid_argument, "tau must lie in (0, 1)");
  }
  if (law.shape == 1) {
    return -law.scale * std::log1p(-tau);
  }
  double lo = 0.0;
  double hi = 1.0;
  while (gamma_cdf_integer(law.shape, hi) < tau) {
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (gamma_cdf_integer(law.shape, mid) < tau ? lo : hi) = mid;
  }
  return law.scale * 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- config

void ScenarioConfig::validate() const
{
  signal.validate();
  error.validate();
  estimator.validate();
  if (n < 3 || m < 2) {
    fail(ErrorCode::invalid_argument, "scenario needs n >= 3 and m >= 2");
  }
  if (replications < 1) {
    fail(ErrorCode::invalid_argument, "replications must be at least 1");
  }
  if (taus.empty()) {
    fail(ErrorCode::invalid_argument, "scenario needs at least one tau");
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0) || (i > 0 && !(taus[i] > taus[i - 1]))) {
      fail(ErrorCode::invalid_argument, "taus must be strictly ascending in (0, 1)");
    }
  }
}

ScenarioConfig ScenarioConfig::parse(std::string_view text)
{
  ScenarioConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::parse, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto& est = cfg.estimator;
    if (key == "name") {
      cfg.name = std::string(value);
    } else if (key == "n") {
      cfg.n = parse_value<std::size_t>(value, key);
    } else if (key == "m") {
      cfg.m = parse_value<std::size_t>(value, key);
    } else if (key == "signal") {
      cfg.signal = SignalLaw::parse(value);
    } else if (key == "error") {
      cfg.error = ErrorLaw::parse(value);
    } else if (key == "zero_error") {
      cfg.zero_error = value == "true" || value == "1";
    } else if (key == "taus") {
      cfg.taus = parse_list(value, key);
    } else if (key == "replications" || key == "reps") {
      cfg.replications = parse_value<std::size_t>(value, key);
    } else if (key == "seed") {
      cfg.master_seed = parse_value<std::uint64_t>(value, key);
    } else if (key == "delta") {
      est.delta = parse_value<double>(value, key);
    } else if (key == "kernel_c") {
      est.density.kernel.flat_radius = parse_value<double>(value, key);
    } else if (key == "ratio") {
      est.ratio = parse_value<double>(value, key);
    } else if (key == "b_max") {
      est.b_max = parse_value<double>(value, key);
    } else if (key == "n_cap") {
      est.n_cap = parse_value<std::size_t>(value, key);
    } else if (key == "freq_points") {
      est.density.freq_points = parse_value<std::size_t>(value, key);
    } else if (key == "x_points") {
      est.density.x_points = parse_value<std::size_t>(value, key);
    } else if (key == "tail_tol") {
      est.density.tail_tol = parse_value<double>(value, key);
    } else {
      fail(ErrorCode::parse, "invalid config key '" + std::string(key) + "' on line " + std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::io, "cannot open config '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ScenarioConfig::to_text() const
{
  std::ostringstream os;
  os << "name = " << name << "\n"
     << "n = " << n << "\n"
     << "m = " << m << "\n"
     << "signal = " << signal.to_string() << "\n"
     << "error = " << error.to_string() << "\n"
     << "zero_error = " << (zero_error ? "true" : "false") << "\n"
     << "taus = ";
  for (std::size_t i = 0; i < taus.size(); ++i) {
    os << (i ? "," : "") << fmt_double(taus[i]);
  }
  os << "\n"
     << "replications = " << replications << "\n"
     << "seed = " << master_seed << "\n"
     << "delta = " << fmt_double(estimator.delta) << "\n"
     << "kernel_c = " << fmt_double(estimator.density.kernel.flat_radius) << "\n"
     << "ratio = " << fmt_double(estimator.ratio) << "\n"
     << "b_max = " << fmt_double(estimator.b_max) << "\n"
     << "n_cap = " << estimator.n_cap << "\n"
     << "freq_points = " << estimator.density.freq_points << "\n"
     << "x_points = " << estimator.density.x_points << "\n"
     << "tail_tol = " << fmt_double(estimator.density.tail_tol) << "\n";
  return os.str();
}

// ---------------------------------------------------------------- engine

Replication draw_replication(const ScenarioConfig& config, std::size_t index)
{
  Rng rng(child_seed(config.master_seed, index));
  Replication rep;
  rep.y = sample_signal(config.signal, config.n, rng);
  if (config.zero_error) {
    rep.error_sample.assign(config.m, 0.0);
    return rep;
  }
  const auto eps = sample_error(config.error, config.n, rng);
  for (std::size_t j = 0; j < config.n; ++j) {
    rep.y[j] += eps[j];
  }
  rep.error_sample = sample_error(config.error, config.m, rng);
  return rep;
}

unsigned worker_count()
{
  if (const char* env = std::getenv("DECONVQ_THREADS")) {
    const auto v = std::strtoul(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RmseTable run_experiment(const ScenarioConfig& config, unsigned threads)
{
  config.validate();
  const std::size_t reps = config.replications;
  const std::size_t nt = config.taus.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> truth(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    truth[t] = true_quantile(config.signal, config.taus[t]);
  }

  RmseTable table;
  table.scenario = config.name;
  table.adaptive_errors.assign(nt, std::vector<double>(reps, nan));
  table.naive_errors.assign(nt, std::vector<double>(reps, nan));
  std::vector<std::string> messages(reps);

  auto work = [&](std::size_t r) {
    const auto rep = draw_replication(config, r);
    std::vector<double> sorted = rep.y;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t t = 0; t < nt; ++t) {
      table.naive_errors[t][r] = sorted_quantile(sorted, config.taus[t]) - truth[t];
    }
    try {
      const auto spectrum = ErrorSpectrum::empirical(rep.error_sample);
      const auto run = adaptive_quantiles(rep.y, spectrum, config.taus, config.estimator);
      for (std::size_t t = 0; t < nt; ++t) {
        table.adaptive_errors[t][r] = run.results[t].q - truth[t];
      }
    } catch (const Error& e) {
      messages[r] = "replication " + std::to_string(r) + ": " + e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : worker_count(),
                                                           static_cast<unsigned>(reps)));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) {
      work(r);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t r = next++; r < reps; r = next++) {
          work(r);
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  for (auto& msg : messages) {
    if (!msg.empty()) {
      table.failure_messages.push_back(std::move(msg));
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    RmseRow row;
    row.tau = config.taus[t];
    double sa = 0.0;
    double sn = 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double ea = table.adaptive_errors[t][r];
      if (std::isnan(ea)) {
        ++row.failures;
      } else {
        sa += ea * ea;
        ++ok;
      }
      sn += table.naive_errors[t][r] * table.naive_errors[t][r];
    }
    row.adaptive_rmse = ok ? std::sqrt(sa / static_cast<double>(ok)) : nan;
    row.naive_rmse = std::sqrt(sn / static_cast<double>(reps));
    table.rows.push_back(row);
  }
  return table;
}

std::string to_csv(const RmseTable& table)
{
  std::string out = "tau,adaptive_rmse,naive_rmse,failures\n";
  for (const auto& row : table.rows) {
    out += fmt_double(row.tau) + "," + fmt_double(row.adaptive_rmse) + "," + fmt_double(row.naive_rmse) +
           "," + std::to_string(row.failures) + "\n";
  }
  return out;
}

std::string to_json_text(const std::vector<RmseTable>& tables, const std::vector<ScenarioConfig>& configs)
{
  nlohmann::ordered_json doc;
  doc["scenarios"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    nlohmann::ordered_json s;
    s["name"] = tables[i].scenario;
    if (i < configs.size()) {
      nlohmann::ordered_json echo;
      std::istringstream lines(configs[i].to_text());
      for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        echo[line.substr(0, eq)] = line.substr(eq + 3);
      }
      s["config"] = std::move(echo);
    }
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : tables[i].rows) {
      rows.push_back({{"tau", row.tau},
                      {"adaptive_rmse", row.adaptive_rmse},
                      {"naive_rmse", row.naive_rmse},
                      {"failures", row.failures}});
    }
    s["rows"] = std::move(rows);
    s["failure_messages"] = tables[i].failure_messages;
    doc["scenarios"].push_back(std::move(s));
  }
  return doc.dump(2) + "\n";
}

std::vector<ScenarioConfig> table1_preset(std::size_t replications, std::uint64_t seed)
{
  std::vector<ScenarioConfig> out;
  const std::pair<ErrorLaw, const char*> errors[] = {{ErrorLaw::laplace(1.0), "beta2"},
                                                     {ErrorLaw::laplace_self_conv(1.0), "beta4"}};
  for (const auto& [law, tag] : errors) {
    for (const int k : {1, 2}) {
      ScenarioConfig cfg;
      cfg.name = "k" + std::to_string(k) + "_" + tag;
      cfg.signal = SignalLaw{k, 1.0};
      cfg.error = law;
      cfg.replications = replications;
      cfg.master_seed = seed;
      out.push_back(cfg);
    }
  }
  return out;
}

} // namespace deconvq::sim
