#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "deception/rational.hpp"

namespace deception::cli {

using OrderedJson = nlohmann::ordered_json;

// Shortest round-trip text for a double; "inf", "-inf" and "nan" otherwise.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

inline OrderedJson json_number(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return v == 0.0 ? 0.0 : v;
}

// One table cell: exact values travel as text, floats keep full precision.
using Cell = std::variant<std::string, double, std::int64_t, bool>;

inline Cell exact(const Rational& r) { return to_string(canonical(r)); }

inline std::string cell_text(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return format_double(*d);
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<bool>(c) ? "true" : "false";
}

inline OrderedJson cell_json(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return json_number(*d);
  if (auto i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<bool>(c);
}

// Rows of a result. Column names carry their unit (_nats, _bits, _prob) where one applies.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width differs from the header");
    rows.push_back(std::move(row));
  }
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_field(t.columns[i]);
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
    out << '\n';
  }
}

inline OrderedJson table_json(const Table& t) {
  OrderedJson rows = OrderedJson::array();
  for (const auto& row : t.rows) {
    OrderedJson r = OrderedJson::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Everything a subcommand produces: the artifact (rows plus optional JSON extras) and
// the one-line summary.
struct Report {
  std::string command;
  std::string model;
  OrderedJson parameters = OrderedJson::object();
  Table table;
  OrderedJson extras = OrderedJson::object();
  std::string summary;
  bool ok = true;  // false: a check failed, exit nonzero

  OrderedJson json() const {
    OrderedJson doc = OrderedJson::object();
    doc["schema"] = 1;
    doc["command"] = command;
    if (!model.empty()) doc["model"] = model;
    doc["parameters"] = parameters;
    doc["rows"] = table_json(table);
    for (const auto& [k, v] : extras.items()) doc[k] = v;
    return doc;
  }
};

}  // namespace deception::cli
