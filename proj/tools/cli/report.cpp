#include "cli/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include <json.hpp>

namespace platoon::cli {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_cell(const Cell& c, int digits) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d, digits);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

nlohmann::ordered_json json_cell(const Cell& c, int digits) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_number(*d, digits);
    return std::stod(format_number(*d, digits));
  }
  return std::get<std::string>(c);
}

}  // namespace

Cell risk_cell(const RiskValue& r) { return r.as_double(); }

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string render(const Report& report, Format format, int digits, bool timestamp) {
  if (format == Format::Json) {
    nlohmann::ordered_json out;
    if (timestamp) out["generated"] = utc_now();
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.summary) summary[k] = json_cell(v, digits);
    out["summary"] = summary;
    out["columns"] = report.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const auto& c : row) r.push_back(json_cell(c, digits));
      rows.push_back(r);
    }
    out["rows"] = rows;
    return out.dump(2) + "\n";
  }
  std::ostringstream os;
  if (timestamp) os << "# generated " << utc_now() << "\n";
  for (const auto& [k, v] : report.summary) os << "# " << k << "," << csv_cell(v, digits) << "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    os << (i ? "," : "") << report.columns[i];
  }
  if (!report.columns.empty()) os << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i], digits);
    os << "\n";
  }
  return os.str();
}

}  // namespace platoon::cli
