// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Optional arguments restrict the run to the listed criterion numbers.

#include "deconvq/adaptive.hpp"
#include "deconvq/cli.hpp"
#include "deconvq/error.hpp"
#include "deconvq/estimators.hpp"
#include "deconvq/simulate.hpp"
#include "deconvq/theory.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace deconvq;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<double> contaminated_gamma(std::size_t n, std::uint64_t seed)
{
  auto y = sim::sample_signal(sim::SignalLaw{1, 1.0}, n, seed);
  const auto e = sim::sample_error(ErrorLaw::laplace(1.0), n, seed + 1000);
  for (std::size_t j = 0; j < n; ++j) y[j] += e[j];
  return y;
}

double density_oracle(const std::vector<double>& y, const std::vector<double>& eps, double b, double x)
{
  const double thr = 1.0 / std::sqrt(static_cast<double>(eps.size()));
  auto integrand = [&](double u) {
    const auto pe = oracle::ecf(eps, u);
    if (std::abs(pe) < thr) {
      return 0.0;
    }
    return (std::polar(1.0, -u * x) * oracle::ecf(y, u) * oracle::flat_top(0.5, b * u) / pe).real();
  };
  return oracle::simpson_pieces(integrand, -1.0 / b, 1.0 / b, 64, 1e-9) / (2.0 * kPi);
}

// Reference simulation tables, computed once and shared by criteria 1-3.
class Table1Cache
{
public:
  const sim::RmseTable& get(const std::string& name)
  {
    auto it = tables_.find(name);
    if (it != tables_.end()) {
      return it->second;
    }
    for (const auto& cfg : sim::table1_preset(200, 42)) {
      if (cfg.name == name) {
        return tables_.emplace(name, sim::run_experiment(cfg)).first->second;
      }
    }
    throw std::runtime_error("unknown scenario " + name);
  }

  static const sim::RmseRow& row(const sim::RmseTable& t, double tau)
  {
    for (const auto& r : t.rows) {
      if (std::abs(r.tau - tau) < 1e-12) {
        return r;
      }
    }
    throw std::runtime_error("missing tau row");
  }

private:
  std::map<std::string, sim::RmseTable> tables_;
};

Table1Cache table1;

Outcome criterion1()
{
  const auto& t = table1.get("k1_beta2");
  const auto& mid = Table1Cache::row(t, 0.5);
  const auto& low = Table1Cache::row(t, 0.1);
  const bool pass = mid.adaptive_rmse >= 0.09 && mid.adaptive_rmse <= 0.28 && low.adaptive_rmse <= 0.6 &&
                    low.naive_rmse >= 1.5 * low.adaptive_rmse;
  return {pass,
          "rmse(0.5) = " + fmt("%.4f", mid.adaptive_rmse) + " in [0.09, 0.28]; rmse(0.1) = " +
            fmt("%.4f", low.adaptive_rmse) + " <= 0.6; naive(0.1) = " + fmt("%.4f", low.naive_rmse) +
            " >= 1.5x; failures " + std::to_string(mid.failures + low.failures)};
}

Outcome criterion2()
{
  const double k1 = Table1Cache::row(table1.get("k1_beta2"), 0.5).adaptive_rmse;
  const double k2 = Table1Cache::row(table1.get("k2_beta2"), 0.5).adaptive_rmse;
  return {k2 <= k1 + 0.03, "rmse(k=2) = " + fmt("%.4f", k2) + " <= rmse(k=1) + 0.03 = " + fmt("%.4f", k1 + 0.03)};
}

Outcome criterion3()
{
  const double b2 = Table1Cache::row(table1.get("k1_beta2"), 0.5).adaptive_rmse;
  const double b4 = Table1Cache::row(table1.get("k1_beta4"), 0.5).adaptive_rmse;
  return {b4 >= b2 - 0.02,
          "rmse(beta=4) = " + fmt("%.4f", b4) + " >= rmse(beta=2) - 0.02 = " + fmt("%.4f", b2 - 0.02)};
}

Outcome criterion4()
{
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(50, 2000);
  std::size_t held = 0;
  double worst = 0.0;
  for (int fixture = 0; fixture < 50; ++fixture) {
    const std::size_t n = size(rng);
    const auto y = contaminated_gamma(n, 500 + fixture);
    const auto eps = sim::sample_error(ErrorLaw::laplace(1.0), n, 900 + fixture);
    const auto errors = ErrorSpectrum::empirical(eps);
    const AdaptiveConfig cfg;
    std::vector<double> choices;
    try {
      const auto grid = build_bandwidth_grid(errors, n, n, cfg);
      const auto c = grid.candidates();
      choices.assign(c.begin(), c.end());
      if (choices.empty()) {
        choices = grid.ladder;
      }
    } catch (const Error&) {
      for (int j = 1; j <= static_cast<int>(cfg.n_cap); ++j) {
        choices.push_back(cfg.b_max * std::pow(cfg.ratio, j - static_cast<int>(cfg.n_cap)));
      }
    }
    const double b = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
    const auto est = density_estimate(y, errors, b);
    if (est.b_eps && est.b_eps->holds) {
      ++held;
      worst = std::max(worst, std::abs(est.F_vals.back() - 1.0));
    }
  }
  return {held > 0 && worst <= 5e-3,
          "max |F_last - 1| = " + fmt("%.2e", worst) + " <= 5e-3 over " + std::to_string(held) +
            "/50 fixtures where B_eps holds"};
}

Outcome criterion5()
{
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int fixture = 0; fixture < 5; ++fixture) {
    const std::size_t n = 40 + 10 * fixture;
    const auto y = contaminated_gamma(n, 300 + fixture);
    const auto eps = sim::sample_error(ErrorLaw::laplace(1.0), n, 400 + fixture);
    const double b = std::uniform_real_distribution<double>(0.45, 0.95)(rng);
    const auto est = density_estimate(y, ErrorSpectrum::empirical(eps), b);
    const double lo = naive_quantile(y, 0.1);
    const double hi = naive_quantile(y, 0.9);
    std::uniform_real_distribution<double> at(lo, hi);
    for (int k = 0; k < 10; ++k) {
      const double x = at(rng);
      const double expect = density_oracle(y, eps, b, x);
      worst = std::max(worst, std::abs(est.density_at(x) - expect) / std::abs(expect));
    }
  }
  return {worst <= 1e-4, "max relative difference " + fmt("%.2e", worst) + " <= 1e-4 at 50 points"};
}

Outcome criterion6()
{
  const auto eps = sim::sample_error(ErrorLaw::laplace(1.0), 200, 50);
  const auto y = contaminated_gamma(50, 51);
  const double b = 0.6;
  const double q = 0.8;
  const auto est = density_estimate(y, ErrorSpectrum::empirical(eps), b);
  const double got = sigma_x(y, *est.spectral, q);

  const double thr = 1.0 / std::sqrt(200.0);
  const int nodes = 4001;
  std::vector<double> us(nodes);
  std::vector<std::complex<double>> inv(nodes);
  for (int k = 0; k < nodes; ++k) {
    us[k] = -1.0 / b + 2.0 / b * k / (nodes - 1);
    const auto pe = oracle::ecf(eps, us[k]);
    inv[k] = std::abs(pe) >= thr ? oracle::flat_top(0.5, b * us[k]) / pe : 0.0;
  }
  auto deconv_kernel = [&](double x) {
    auto f = [&](double u) {
      const double pos = (u + 1.0 / b) / (2.0 / b) * (nodes - 1);
      const auto k = std::min<int>(nodes - 2, static_cast<int>(pos));
      const double t = pos - k;
      return (std::polar(1.0, -u * x) * ((1.0 - t) * inv[k] + t * inv[k + 1])).real();
    };
    return oracle::simpson_pieces(f, -1.0 / b, 1.0 / b, 32, 1e-9) / (2.0 * kPi);
  };
  double acc = 0.0;
  for (const double yj : y) {
    const double xi = oracle::simpson_pieces(
      [&](double x) { return oracle::a_s(x) * deconv_kernel(x + q - yj); }, -1.0, 0.0, 4, 1e-7);
    acc += xi * xi;
  }
  const double expect = std::sqrt(acc) / 50.0;
  const double rel_x = std::abs(got - expect) / expect;

  auto twice = eps;
  twice.insert(twice.end(), eps.begin(), eps.end());
  const auto y_big = contaminated_gamma(300, 61);
  double rel_eps = 0.0;
  for (const double bw : {0.6, 0.8, 0.95}) {
    const auto a = density_estimate(y_big, ErrorSpectrum::empirical(eps), bw);
    const auto d = density_estimate(y_big, ErrorSpectrum::empirical(twice), bw);
    const double base = sigma_eps(*a.spectral);
    if (a.spectral->error_cf.mask != d.spectral->error_cf.mask || base <= 0.0) {
      return {false, "duplication changed the truncation mask or sigma_eps vanished"};
    }
    rel_eps = std::max(rel_eps, std::abs(sigma_eps(*d.spectral) * std::sqrt(2.0) / base - 1.0));
  }
  return {rel_x <= 1e-3 && rel_eps <= 1e-12,
          "sigma_X relative difference " + fmt("%.2e", rel_x) + " <= 1e-3; sigma_eps duplication ratio error " +
            fmt("%.2e", rel_eps) + " <= 1e-12"};
}

Outcome criterion7()
{
  const auto law = ErrorLaw::laplace(1.0);
  double worst = 0.0;
  std::size_t nodes = 0;
  for (const std::uint64_t seed : {14u, 15u, 16u}) {
    const auto y = contaminated_gamma(400, seed);
    DensityConfig cfg;
    cfg.x_range = std::pair{-8.0, 10.0};
    for (const double b : {0.5, 0.75, 0.95}) {
      const auto known = density_estimate(y, ErrorSpectrum::known(law), b, cfg);
      const auto injected = density_estimate(y, ErrorSpectrum::injected(law, 1000), b, cfg);
      if (known.f_vals.size() != injected.f_vals.size()) {
        return {false, "spatial grids differ"};
      }
      for (std::size_t i = 0; i < known.f_vals.size(); ++i) {
        worst = std::max(worst, std::abs(known.f_vals[i] - injected.f_vals[i]));
        worst = std::max(worst, std::abs(known.F_vals[i] - injected.F_vals[i]));
      }
      nodes += known.f_vals.size();
    }
  }
  return {worst <= 1e-10, "max node difference " + fmt("%.2e", worst) + " <= 1e-10 over " + std::to_string(nodes) +
                            " nodes"};
}

Outcome criterion8()
{
  const sim::SignalLaw signal{1, 1.0};
  const auto law = ErrorLaw::laplace(1.0);
  const double truth = sim::true_quantile(signal, 0.5);
  std::vector<double> medians;
  std::string detail;
  for (const std::size_t n : {500u, 2000u, 8000u}) {
    const double b = std::min(1.0 - 1e-6, theory::oracle_bandwidth(n, n, 1.0, 2.0));
    std::vector<double> errs;
    for (std::size_t r = 0; r < 100; ++r) {
      sim::Rng rng(sim::child_seed(8000 + n, r));
      auto y = sim::sample_signal(signal, n, rng);
      const auto e = sim::sample_error(law, n, rng);
      for (std::size_t j = 0; j < n; ++j) y[j] += e[j];
      const auto est = density_estimate(y, ErrorSpectrum::known(law), b);
      errs.push_back(std::abs(quantile_estimate(est, QuantileRequest{0.5, std::nullopt}).q - truth));
    }
    medians.push_back(naive_quantile(errs, 0.5));
    detail += "n=" + std::to_string(n) + ": " + fmt("%.4f", medians.back()) + "  ";
  }
  bool pass = true;
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
    pass = pass && medians[i + 1] <= 1.25 * medians[i];
  }
  const double slope = (std::log(medians.back()) - std::log(medians.front())) / (std::log(8000.0) - std::log(500.0));
  pass = pass && slope < 0.0;
  return {pass, detail + "slope " + fmt("%.3f", slope) + " < 0"};
}

Outcome criterion9()
{
  bool pass = lepski_select(std::vector<Interval>{{0, 2}, {1, 3}, {2.5, 4}}) == 1;
  pass = pass && lepski_select(std::vector<Interval>{{-3, 3}, {-2, 2.5}, {-1, 1}, {-0.5, 0.1}}) == 3;
  pass = pass && lepski_select(std::vector<Interval>{{0, 1}, {2, 3}, {0, 1}}) == 0;
  pass = pass && lepski_select(std::vector<Interval>{{0, 1}, {1, 2}}) == 1;

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(-50.0, 50.0);
  std::uniform_real_distribution<double> w(0.01, 2.0);
  int trials = 0;
  for (; trials < 500; ++trials) {
    std::vector<Interval> iv;
    double centre = 0.0;
    for (int i = 0; i < 8; ++i) {
      centre += c(rng) / 100.0;
      const double h = w(rng);
      iv.push_back({centre - h, centre + h});
    }
    const auto pick = lepski_select(iv);
    const double shift = std::ldexp(std::round(c(rng) * 8.0), -3);
    auto moved = iv;
    for (auto& x : moved) {
      x.lo += shift;
      x.hi += shift;
    }
    pass = pass && lepski_select(moved) == pick;
    pass = pass && lepski_select(std::vector<Interval>{iv.front()}) == 0;
  }
  return {pass, "hand-built lists, " + std::to_string(trials) + " translation and single-interval trials"};
}

std::map<std::string, std::string> read_dir(const fs::path& dir)
{
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files[entry.path().filename().string()] = buf.str();
  }
  return files;
}

Outcome criterion10()
{
  const auto root = fs::temp_directory_path() / ("deconvq_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  const auto config = root / "det.cfg";
  std::ofstream(config) << "name = det\nn = 300\nm = 300\nsignal = gamma:1,1\nerror = laplace:1\n"
                           "taus = 0.25, 0.5, 0.75\nreps = 8\nseed = 11\n";
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* threads : {"1", "4", "1"}) {
    setenv("DECONVQ_THREADS", threads, 1);
    const auto dir = root / ("run" + std::to_string(runs.size()));
    std::ostringstream out;
    std::ostringstream err;
    const int rc = run_cli({"simulate", "--config", config.string(), "--out-dir", dir.string()}, out, err);
    if (rc != 0) {
      fs::remove_all(root);
      return {false, "simulate exited with " + std::to_string(rc) + ": " + err.str()};
    }
    runs.push_back(read_dir(dir));
  }
  unsetenv("DECONVQ_THREADS");
  fs::remove_all(root);
  const bool pass = !runs[0].empty() && runs[0] == runs[1] && runs[0] == runs[2];
  return {pass, std::to_string(runs[0].size()) + " output files compared across DECONVQ_THREADS = 1, 4, 1"};
}

} // namespace

int main(int argc, char** argv)
{
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    wanted.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.contains(id)) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
