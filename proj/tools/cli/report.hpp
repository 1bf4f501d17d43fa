#pragma once

// Tabular command output rendered as CSV or JSON.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "platoon/risk.hpp"

namespace platoon::cli {

using Cell = std::variant<double, std::string>;

enum class Format { Csv, Json };

struct Report {
  std::vector<std::pair<std::string, Cell>> summary;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::string key, Cell value) { summary.emplace_back(std::move(key), std::move(value)); }
};

/// Zero -> 0, Infinite -> inf.
Cell risk_cell(const RiskValue& r);

/// Numbers use `digits` significant digits; infinities render as "inf".
std::string format_number(double v, int digits);

/// CSV: optional "# generated <UTC time>" line, "# key,value" summary lines,
/// then a header row and data rows. JSON: {"summary", "columns", "rows"}.
std::string render(const Report& report, Format format, int digits, bool timestamp);

}  // namespace platoon::cli
