#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "deception/prob_core.hpp"
#include "deception/rational.hpp"

namespace deception {

// Problem instance read from a model file.
struct Model {
  std::string name;
  JointPmf p;
  DistortionSpec spec;
  std::optional<Rational> delta;  // default distortion level, if the file gives one
};

class ModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

using Json = nlohmann::json;

inline std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line, column = 1;
    else ++column;
  }
  return {line, column};
}

class ModelReader {
 public:
  explicit ModelReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ModelError(source_ + ": field " + field + ": " + what);
  }

  Rational rational(const Json& v, const std::string& field) const {
    if (v.is_number())
      fail(field, "numbers are not accepted; write the value as a string such as \"9/20\"");
    if (!v.is_string()) fail(field, "expected a rational string");
    try {
      return parse_rational(v.get<std::string>());
    } catch (const ValidationError& e) {
      fail(field, e.what());
    }
  }

  Alphabet alphabet(const Json& doc, const std::string& field) const {
    if (!doc.contains(field)) fail(field, "missing");
    const Json& v = doc.at(field);
    if (v.is_number_integer()) {
      const auto size = v.get<long long>();
      if (size < 1 || size > 1'000'000) fail(field, "alphabet size must be a positive integer");
      return Alphabet(static_cast<int>(size));
    }
    if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of labels or a positive size");
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(field + "[" + std::to_string(i) + "]", "labels must be strings");
      labels.push_back(v[i].get<std::string>());
    }
    try {
      return Alphabet(std::move(labels));
    } catch (const ValidationError& e) {
      fail(field, e.what());
    }
  }

  // rows x cols rationals, as nested rows or one flat row-major array.
  std::vector<Rational> table(const Json& doc, const std::string& field, int rows, int cols) const {
    if (!doc.contains(field)) fail(field, "missing");
    const Json& v = doc.at(field);
    if (!v.is_array()) fail(field, "expected an array");
    std::vector<Rational> out;
    const auto expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (!v.empty() && v[0].is_array()) {
      if (v.size() != static_cast<std::size_t>(rows))
        fail(field, "has " + std::to_string(v.size()) + " rows, expected " + std::to_string(rows));
      for (std::size_t r = 0; r < v.size(); ++r) {
        const std::string row_field = field + "[" + std::to_string(r) + "]";
        if (!v[r].is_array()) fail(row_field, "expected an array");
        if (v[r].size() != static_cast<std::size_t>(cols))
          fail(row_field, "has " + std::to_string(v[r].size()) + " entries, expected " + std::to_string(cols));
        for (std::size_t c = 0; c < v[r].size(); ++c)
          out.push_back(rational(v[r][c], row_field + "[" + std::to_string(c) + "]"));
      }
    } else {
      if (v.size() != expected)
        fail(field, "has " + std::to_string(v.size()) + " entries, expected " + std::to_string(expected));
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(rational(v[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  std::string source_;
};

}  // namespace detail

inline Model parse_model(const std::string& text, const std::string& source = "model") {
  detail::Json doc;
  try {
    doc = detail::Json::parse(text);
  } catch (const detail::Json::parse_error& e) {
    const auto [line, column] = detail::line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (auto at = what.find("] "); at != std::string::npos) what = what.substr(at + 2);
    throw ModelError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }
  const detail::ModelReader in(source);
  if (!doc.is_object()) throw ModelError(source + ": top level must be a JSON object");

  static const std::vector<std::string> known{"schema", "name", "x_alphabet", "y_alphabet", "xhat_alphabet",
                                              "P",      "d",    "delta"};
  for (const auto& item : doc.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) in.fail(item.key(), "unknown field");
  if (doc.contains("schema") && doc.at("schema") != 1) in.fail("schema", "only schema 1 is supported");

  std::string name = "model";
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) in.fail("name", "expected a string");
    name = doc.at("name").get<std::string>();
  }
  const Alphabet x = in.alphabet(doc, "x_alphabet");
  const Alphabet y = in.alphabet(doc, "y_alphabet");
  const Alphabet xhat = in.alphabet(doc, "xhat_alphabet");

  auto mass = in.table(doc, "P", x.size(), y.size());
  Rational sum(0);
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (sgn(mass[i]) < 0) in.fail("P", "entry " + std::to_string(i) + " is negative");
    sum += mass[i];
  }
  if (sum != 1) in.fail("P", "entries sum to " + to_string(sum) + ", not 1");
  auto table = in.table(doc, "d", x.size(), xhat.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    if (sgn(table[i]) < 0) in.fail("d", "entry " + std::to_string(i) + " is negative");

  std::optional<Rational> delta;
  if (doc.contains("delta")) {
    delta = in.rational(doc.at("delta"), "delta");
    if (sgn(*delta) < 0) in.fail("delta", "must be >= 0");
  }
  return Model{name, JointPmf::exact(x, y, std::move(mass)), DistortionSpec(x, xhat, std::move(table)), delta};
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(path + ": cannot open model file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str(), path);
}

}  // namespace deception
