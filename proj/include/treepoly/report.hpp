#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace treepoly {

using Cell = std::variant<double, long long, std::string>;

/// One comparison against a theory reference. Informational checks are
/// reported but do not affect ExperimentReport::passed().
struct Check {
  std::string name;
  std::string reference;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool informational = false;
};

struct ExperimentReport {
  std::string id;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<Check> checks;

  bool passed() const;
  const Check* find_check(std::string_view name) const;
  /// Index of `column` in `columns`; throws std::out_of_range.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view column_name) const;
};

/// `header_comment` (without the leading "# ") goes on the first line, then
/// the column header, then one line per row. Doubles use 17 significant
/// digits; lines end in LF.
std::string to_csv(const ExperimentReport& report, std::string_view header_comment);

nlohmann::ordered_json to_json(const ExperimentReport& report);

}  // namespace treepoly
