#pragma once

// Path-aware JSON reading helpers. Every failure becomes a ParseError whose
// locus is the JSON pointer of the offending field.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "critmatrix/decimal.hpp"
#include "critmatrix/errors.hpp"
#include "json.hpp"

namespace critmatrix::detail {

using json = nlohmann::json;

/// Parses text; syntax errors carry "line L, column C" as locus.
json ParseJsonText(std::string_view text);

class JsonReader {
 public:
  JsonReader(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const json& node() const { return *node_; }
  const std::string& path() const { return path_; }

  JsonReader At(std::string_view key) const;
  std::optional<JsonReader> Find(std::string_view key) const;
  JsonReader At(std::size_t index) const;
  std::size_t ArraySize() const;
  bool IsNull() const { return node_->is_null(); }

  std::string String() const;
  Decimal DecimalValue() const;
  double Number() const;
  int Int() const;
  bool Bool() const;

  std::string OptString(std::string_view key, std::string fallback = {}) const;
  double OptNumber(std::string_view key, double fallback) const;
  int OptInt(std::string_view key, int fallback) const;

  [[noreturn]] void Fail(const std::string& message) const;

 private:
  const json* node_;
  std::string path_;
};

}  // namespace critmatrix::detail
