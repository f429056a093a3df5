#pragma once

#include "deconvq/error_law.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace deconvq {

//! Main sample Y plus the source of error information: either an auxiliary
//! error sample eps* or a known law. No independence between the two is assumed.
struct ObservationSet
{
  std::vector<double> y;
  std::variant<std::vector<double>, ErrorLaw> error_source;
  std::string label;

  static ObservationSet with_error_sample(std::vector<double> y,
                                          std::vector<double> eps,
                                          std::string label = {});
  static ObservationSet with_known_error(std::vector<double> y,
                                         const ErrorLaw& law,
                                         std::string label = {});

  bool has_error_sample() const { return std::holds_alternative<std::vector<double>>(error_source); }
  const std::vector<double>& error_sample() const { return std::get<std::vector<double>>(error_source); }
  const ErrorLaw& known_law() const { return std::get<ErrorLaw>(error_source); }
  std::size_t n() const { return y.size(); }
  //! Error sample size; 0 for a known law.
  std::size_t m() const { return has_error_sample() ? error_sample().size() : 0; }

  void validate() const;
};

//! Two repeated measurements per subject.
struct PairedSample
{
  std::vector<double> y1;
  std::vector<double> y2;

  void validate() const;
};

//! Reads the named column of a comma-separated file with one header row.
//! Errors name the offending data row (1-based, header excluded).
std::vector<double> load_column_csv(const std::filesystem::path& path, const std::string& column);

//! Like load_column_csv, but a file with exactly one column is accepted
//! whatever its header says.
std::vector<double> load_column_or_only_csv(const std::filesystem::path& path,
                                            const std::string& column);

//! Reads columns y1,y2.
PairedSample load_paired_csv(const std::filesystem::path& path);

//! Repeated-measurement transform: y = (y1 + y2)/2, eps* = (y1 - y2)/2.
ObservationSet paired_to_deconv(const PairedSample& pairs);

//! Sample quantile with linear interpolation between order statistics at
//! position (n-1)*tau.
double naive_quantile(std::span<const double> y, double tau);

//! Same on already sorted data.
double sorted_quantile(std::span<const double> sorted, double tau);

} // namespace deconvq
