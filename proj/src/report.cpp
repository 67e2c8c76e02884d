#include "treepoly/report.hpp"

#include <stdexcept>

#include "treepoly/strings.hpp"

namespace treepoly {

bool ExperimentReport::passed() const {
  for (const auto& c : checks) {
    if (!c.informational && !c.passed) return false;
  }
  return true;
}

const Check* ExperimentReport::find_check(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::size_t ExperimentReport::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column '" + std::string(name) + "' in " + id);
}

double ExperimentReport::number(std::size_t row, std::string_view column_name) const {
  const auto& cell = rows.at(row).at(column(column_name));
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* i = std::get_if<long long>(&cell)) return static_cast<double>(*i);
  throw std::invalid_argument("column '" + std::string(column_name) +
                              "' is not numeric");
}

namespace {

std::string render(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  const auto& text = std::get<std::string>(cell);
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch == '\n' ? ' ' : ch;
  }
  return quoted + '"';
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* i = std::get_if<long long>(&cell)) return *i;
  return std::get<std::string>(cell);
}

}  // namespace

std::string to_csv(const ExperimentReport& report, std::string_view header_comment) {
  std::string out = "# ";
  out += header_comment;
  out += '\n';
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i) out += ',';
    out += report.columns[i];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += render(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.id;
  j["parameters"] = report.parameters;
  j["summary"] = report.summary;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["reference"] = c.reference;
    cj["observed"] = c.observed;
    cj["expected"] = c.expected;
    cj["tolerance"] = c.tolerance;
    cj["passed"] = c.passed;
    cj["informational"] = c.informational;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  j["passed"] = report.passed();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json rj;
    for (std::size_t i = 0; i < row.size() && i < report.columns.size(); ++i) {
      rj[report.columns[i]] = cell_json(row[i]);
    }
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace treepoly
