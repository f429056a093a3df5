#include "deconvq/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace deconvq {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view error_code_name(ErrorCode code)
{
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::uninformative: return "uninformative";
    case ErrorCode::empty_grid: return "empty_grid";
    case ErrorCode::no_valid_candidate: return "no_valid_candidate";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

namespace {

// JSON has no NaN or infinity; those travel as strings.
ordered_json real(double v)
{
  if (std::isfinite(v)) {
    return v;
  }
  if (std::isnan(v)) {
    return "nan";
  }
  return v > 0 ? "inf" : "-inf";
}

double real_of(const json& j)
{
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") {
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
  }
  fail(ErrorCode::parse, "report: expected a real number, got " + j.dump());
}

ordered_json reals(const std::vector<double>& v)
{
  auto out = ordered_json::array();
  for (const double x : v) {
    out.push_back(real(x));
  }
  return out;
}

std::vector<double> reals_of(const json& j)
{
  std::vector<double> out;
  for (const auto& x : j) {
    out.push_back(real_of(x));
  }
  return out;
}

ordered_json record_json(const CandidateRecord& r)
{
  ordered_json j;
  j["bandwidth"] = real(r.bandwidth);
  j["q"] = real(r.q);
  j["residual"] = real(r.residual);
  j["f_at_q"] = real(r.f_at_q);
  j["sigma_x"] = real(r.sigma_x);
  j["sigma_eps"] = real(r.sigma_eps);
  j["run_max_x"] = real(r.run_max_x);
  j["run_max_eps"] = real(r.run_max_eps);
  j["Sigma"] = real(r.Sigma);
  j["interval"] = {real(r.lo), real(r.hi)};
  j["valid"] = r.valid;
  j["note"] = r.note;
  j["b_eps_holds"] = r.b_eps_holds;
  j["b_eps_margin"] = real(r.b_eps_margin);
  j["mass"] = real(r.mass);
  return j;
}

CandidateRecord record_of(const json& j)
{
  CandidateRecord r;
  r.bandwidth = real_of(j.at("bandwidth"));
  r.q = real_of(j.at("q"));
  r.residual = real_of(j.at("residual"));
  r.f_at_q = real_of(j.at("f_at_q"));
  r.sigma_x = real_of(j.at("sigma_x"));
  r.sigma_eps = real_of(j.at("sigma_eps"));
  r.run_max_x = real_of(j.at("run_max_x"));
  r.run_max_eps = real_of(j.at("run_max_eps"));
  r.Sigma = real_of(j.at("Sigma"));
  r.lo = real_of(j.at("interval").at(0));
  r.hi = real_of(j.at("interval").at(1));
  r.valid = j.at("valid").get<bool>();
  r.note = j.at("note").get<std::string>();
  r.b_eps_holds = j.at("b_eps_holds").get<bool>();
  r.b_eps_margin = real_of(j.at("b_eps_margin"));
  r.mass = real_of(j.at("mass"));
  return r;
}

} // namespace

ordered_json to_json(const RunReport& report)
{
  ordered_json doc;
  doc["version"] = report.version;

  const auto& in = report.inputs;
  doc["inputs"] = {{"n", in.n},
                   {"m", in.m},
                   {"mode", in.mode},
                   {"data_source", in.data_source},
                   {"error_source", in.error_source}};

  const auto& s = report.settings;
  ordered_json settings;
  settings["taus"] = reals(s.taus);
  settings["delta"] = real(s.delta);
  settings["kernel_c"] = real(s.kernel_c);
  settings["ratio"] = real(s.ratio);
  settings["b_max"] = real(s.b_max);
  settings["n_cap"] = s.n_cap;
  settings["freq_points"] = s.freq_points;
  settings["x_points"] = s.x_points;
  settings["tail_tol"] = real(s.tail_tol);
  settings["bandwidth"] = s.bandwidth ? real(*s.bandwidth) : ordered_json(nullptr);
  doc["settings"] = std::move(settings);

  doc["grid"] = {{"ratio", real(report.grid.ratio)},
                 {"ladder", reals(report.grid.ladder)},
                 {"integral_trace", reals(report.grid.integral_trace)},
                 {"j_tilde_index", report.grid.j_tilde_index}};

  auto results = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json j;
    j["tau"] = real(r.tau);
    j["q"] = real(r.q);
    j["Sigma"] = real(r.Sigma);
    j["bandwidth"] = real(r.bandwidth);
    j["selected"] = r.selected;
    auto trace = ordered_json::array();
    for (const auto& rec : r.trace) {
      trace.push_back(record_json(rec));
    }
    j["trace"] = std::move(trace);
    j["warnings"] = r.warnings;
    results.push_back(std::move(j));
  }
  doc["results"] = std::move(results);
  return doc;
}

RunReport report_from_json(const json& doc)
{
  try {
    RunReport report;
    report.version = doc.at("version").get<std::string>();

    const auto& in = doc.at("inputs");
    report.inputs.n = in.at("n").get<std::size_t>();
    report.inputs.m = in.at("m").get<std::size_t>();
    report.inputs.mode = in.at("mode").get<std::string>();
    report.inputs.data_source = in.at("data_source").get<std::string>();
    report.inputs.error_source = in.at("error_source").get<std::string>();

    const auto& s = doc.at("settings");
    auto& out = report.settings;
    out.taus = reals_of(s.at("taus"));
    out.delta = real_of(s.at("delta"));
    out.kernel_c = real_of(s.at("kernel_c"));
    out.ratio = real_of(s.at("ratio"));
    out.b_max = real_of(s.at("b_max"));
    out.n_cap = s.at("n_cap").get<std::size_t>();
    out.freq_points = s.at("freq_points").get<std::size_t>();
    out.x_points = s.at("x_points").get<std::size_t>();
    out.tail_tol = real_of(s.at("tail_tol"));
    if (!s.at("bandwidth").is_null()) {
      out.bandwidth = real_of(s.at("bandwidth"));
    }

    const auto& g = doc.at("grid");
    report.grid.ratio = real_of(g.at("ratio"));
    report.grid.ladder = reals_of(g.at("ladder"));
    report.grid.integral_trace = reals_of(g.at("integral_trace"));
    report.grid.j_tilde_index = g.at("j_tilde_index").get<std::size_t>();

    for (const auto& j : doc.at("results")) {
      QuantileResult r;
      r.tau = real_of(j.at("tau"));
      r.q = real_of(j.at("q"));
      r.Sigma = real_of(j.at("Sigma"));
      r.bandwidth = real_of(j.at("bandwidth"));
      r.selected = j.at("selected").get<std::size_t>();
      for (const auto& rec : j.at("trace")) {
        r.trace.push_back(record_of(rec));
      }
      r.warnings = j.at("warnings").get<std::vector<std::string>>();
      report.results.push_back(std::move(r));
    }
    return report;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed report: ") + e.what());
  }
}

std::string to_json_text(const RunReport& report)
{
  return to_json(report).dump(2) + "\n";
}

RunReport parse_report(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(doc);
}

std::string to_csv(const RunReport& report)
{
  std::string out = "tau,q,Sigma,bandwidth,lo,hi,candidates,warnings\n";
  char buf[256];
  for (const auto& r : report.results) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu\n", r.tau, r.q, r.Sigma,
                  r.bandwidth, r.q - r.Sigma, r.q + r.Sigma, r.trace.size(), r.warnings.size());
    out += buf;
  }
  return out;
}

std::string error_json_text(ErrorCode code, std::string_view message)
{
  ordered_json doc;
  doc["error"] = {{"code", std::string(error_code_name(code))}, {"message", std::string(message)}};
  return doc.dump(2) + "\n";
}

} // namespace deconvq
