#include "deconvq/samples.hpp"

#include "deconvq/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace deconvq {

namespace {

void require_finite(std::span<const double> values, const char* what)
{
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::invalid_argument,
           std::string(what) + " contains a non-finite value at index " + std::to_string(i));
    }
  }
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return cells;
}

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

// Parses only the requested columns; indices refer to the header.
CsvTable read_columns(const std::filesystem::path& path,
                      const std::vector<std::string>& wanted,
                      bool accept_single_column)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  CsvTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      break;
    }
  }
  if (line_no == 0 || trim(line).empty()) {
    fail(ErrorCode::parse, "'" + path.string() + "': missing header row");
  }
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  for (const auto cell : split(line)) {
    table.header.emplace_back(cell);
  }

  std::vector<std::size_t> index;
  for (const auto& name : wanted) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      if (accept_single_column && table.header.size() == 1 && wanted.size() == 1) {
        index.push_back(0);
        continue;
      }
      fail(ErrorCode::parse, "'" + path.string() + "': missing column '" + name + "'");
    }
    index.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  table.columns.resize(wanted.size());

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    ++row;
    const auto cells = split(line);
    for (std::size_t c = 0; c < index.size(); ++c) {
      const auto where = "'" + path.string() + "' row " + std::to_string(row) + " (line " +
                         std::to_string(line_no) + ")";
      if (index[c] >= cells.size()) {
        fail(ErrorCode::parse, where + ": missing cell for column '" + wanted[c] + "'");
      }
      const auto cell = cells[index[c]];
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        fail(ErrorCode::parse, where + ": cannot parse '" + std::string(cell) + "' as a real number");
      }
      table.columns[c].push_back(value);
    }
  }
  if (row == 0) {
    fail(ErrorCode::parse, "'" + path.string() + "': no rows");
  }
  return table;
}

} // namespace

ObservationSet ObservationSet::with_error_sample(std::vector<double> y,
                                                 std::vector<double> eps,
                                                 std::string label)
{
  ObservationSet obs{std::move(y), std::move(eps), std::move(label)};
  obs.validate();
  return obs;
}

ObservationSet ObservationSet::with_known_error(std::vector<double> y,
                                                const ErrorLaw& law,
                                                std::string label)
{
  ObservationSet obs{std::move(y), law, std::move(label)};
  obs.validate();
  return obs;
}

void ObservationSet::validate() const
{
  if (y.size() < 2) {
    fail(ErrorCode::invalid_argument, "observation sample needs at least 2 values");
  }
  require_finite(y, "observation sample");
  if (has_error_sample()) {
    if (error_sample().size() < 2) {
      fail(ErrorCode::invalid_argument, "error sample needs at least 2 values");
    }
    require_finite(error_sample(), "error sample");
  } else {
    known_law().validate();
  }
}

void PairedSample::validate() const
{
  if (y1.size() != y2.size()) {
    fail(ErrorCode::invalid_argument, "paired sample columns differ in length");
  }
  if (y1.size() < 2) {
    fail(ErrorCode::invalid_argument, "paired sample needs at least 2 pairs");
  }
  require_finite(y1, "paired sample y1");
  require_finite(y2, "paired sample y2");
}

std::vector<double> load_column_csv(const std::filesystem::path& path, const std::string& column)
{
  return std::move(read_columns(path, {column}, false).columns.front());
}

std::vector<double> load_column_or_only_csv(const std::filesystem::path& path,
                                            const std::string& column)
{
  return std::move(read_columns(path, {column}, true).columns.front());
}

PairedSample load_paired_csv(const std::filesystem::path& path)
{
  auto table = read_columns(path, {"y1", "y2"}, false);
  PairedSample pairs{std::move(table.columns[0]), std::move(table.columns[1])};
  pairs.validate();
  return pairs;
}

ObservationSet paired_to_deconv(const PairedSample& pairs)
{
  pairs.validate();
  std::vector<double> y(pairs.y1.size()), eps(pairs.y1.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = (pairs.y1[j] + pairs.y2[j]) / 2.0;
    eps[j] = (pairs.y1[j] - pairs.y2[j]) / 2.0;
  }
  return ObservationSet::with_error_sample(std::move(y), std::move(eps), "paired");
}

double sorted_quantile(std::span<const double> sorted, double tau)
{
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::invalid_argument, "tau must lie in (0, 1)");
  }
  if (sorted.empty()) {
    fail(ErrorCode::invalid_argument, "quantile of an empty sample");
  }
  const double h = static_cast<double>(sorted.size() - 1) * tau;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) {
    return sorted[lo];
  }
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double naive_quantile(std::span<const double> y, double tau)
{
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, tau);
}

} // namespace deconvq
