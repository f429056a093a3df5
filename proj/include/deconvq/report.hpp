#pragma once

#include "deconvq/adaptive.hpp"
#include "deconvq/error.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deconvq {

inline constexpr std::string_view kVersion = "0.1.0";

//! Everything needed to reconstruct an estimate run from its output.
struct RunReport
{
  std::string version{kVersion};

  struct Inputs
  {
    std::size_t n = 0;
    //! Error sample size; 0 with a known error law.
    std::size_t m = 0;
    std::string mode;
    std::string data_source;
    std::string error_source;

    friend bool operator==(const Inputs&, const Inputs&) = default;
  } inputs;

  struct Settings
  {
    std::vector<double> taus;
    double delta = 0.1;
    double kernel_c = 0.5;
    double ratio = 1.15;
    double b_max = 1.0 - 1e-6;
    std::size_t n_cap = 40;
    std::size_t freq_points = 4097;
    std::size_t x_points = 8192;
    double tail_tol = 5e-3;
    //! Set when adaptation was bypassed.
    std::optional<double> bandwidth;

    friend bool operator==(const Settings&, const Settings&) = default;
  } settings;

  BandwidthGrid grid;
  std::vector<QuantileResult> results;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

nlohmann::ordered_json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

std::string to_json_text(const RunReport& report);
RunReport parse_report(std::string_view text);

//! One row per tau: tau,q,Sigma,bandwidth,lo,hi,candidates,warnings.
std::string to_csv(const RunReport& report);

//! {"error": {"code": ..., "message": ...}}
std::string error_json_text(ErrorCode code, std::string_view message);

} // namespace deconvq
