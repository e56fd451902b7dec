#pragma once

// Machine-readable experiment reports.
//
// JSON object with the fixed key order
//   {op, params, lhs, rhs, bound, ratio, slack, pass, seed, wall_ms}
// and a CSV twin (one header line, one data line, params packed into a single
// semicolon-joined cell).  Numeric cells carry 17 significant digits so the
// doubles round-trip exactly; byte-identical output for identical inputs is a
// hard requirement (wall_ms excepted), so emission is hand-rolled rather than
// delegated to a serializer with its own formatting ideas.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cotype/errors.hpp"

namespace cotype {

struct Report {
  std::string op;
  std::vector<std::pair<std::string, std::string>> params;  // canonical order
  std::optional<double> lhs;
  std::optional<double> rhs;
  std::optional<double> bound;
  std::optional<double> ratio;
  std::optional<double> slack;
  bool pass = false;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

namespace detail {

inline std::string json_number_or_null(const std::optional<double>& v) {
  if (!v) return "null";
  const double d = *v;
  if (std::isnan(d)) return "null";
  if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
  return format_g17(d);
}

}  // namespace detail

inline std::string to_json(const Report& r) {
  std::string out = "{\"op\":\"" + json_escape(r.op) + "\",\"params\":{";
  bool first = true;
  for (const auto& [k, v] : r.params) {
    if (!first) out += ",";
    first = false;
    out += "\"" + json_escape(k) + "\":\"" + json_escape(v) + "\"";
  }
  out += "},\"lhs\":" + detail::json_number_or_null(r.lhs);
  out += ",\"rhs\":" + detail::json_number_or_null(r.rhs);
  out += ",\"bound\":" + detail::json_number_or_null(r.bound);
  out += ",\"ratio\":" + detail::json_number_or_null(r.ratio);
  out += ",\"slack\":" + detail::json_number_or_null(r.slack);
  out += std::string(",\"pass\":") + (r.pass ? "true" : "false");
  out += ",\"seed\":" + std::to_string(r.seed);
  out += ",\"wall_ms\":" + format_g17(r.wall_ms);
  out += "}\n";
  return out;
}

inline std::string csv_escape(const std::string& s) {
  bool needs_quote = false;
  for (const char c : s) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs_quote = true;
      break;
    }
  }
  if (!needs_quote) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string to_csv(const Report& r) {
  std::string params;
  for (const auto& [k, v] : r.params) {
    if (!params.empty()) params += ";";
    params += k + "=" + v;
  }
  auto cell = [](const std::optional<double>& v) -> std::string {
    if (!v || std::isnan(*v)) return "";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return format_g17(*v);
  };
  std::string out = "op,params,lhs,rhs,bound,ratio,slack,pass,seed,wall_ms\n";
  out += csv_escape(r.op) + "," + csv_escape(params) + "," + cell(r.lhs) + "," + cell(r.rhs) +
         "," + cell(r.bound) + "," + cell(r.ratio) + "," + cell(r.slack) + "," +
         (r.pass ? "true" : "false") + "," + std::to_string(r.seed) + "," +
         format_g17(r.wall_ms) + "\n";
  return out;
}

}  // namespace cotype
