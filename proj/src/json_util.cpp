#include "json_util.hpp"

#include <cmath>

namespace critmatrix::detail {

json ParseJsonText(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    const std::string locus = "line " + std::to_string(line) + ", column " + std::to_string(column);
    throw ParseError("malformed JSON at " + locus + ": " + e.what(), locus);
  }
}

void JsonReader::Fail(const std::string& message) const {
  const std::string where = path_.empty() ? "/" : path_;
  throw ParseError(message + " at " + where, where);
}

JsonReader JsonReader::At(std::string_view key) const {
  if (!node_->is_object()) Fail("expected an object");
  auto it = node_->find(std::string(key));
  if (it == node_->end()) Fail("missing field \"" + std::string(key) + "\"");
  return JsonReader(*it, path_ + "/" + std::string(key));
}

std::optional<JsonReader> JsonReader::Find(std::string_view key) const {
  if (!node_->is_object()) Fail("expected an object");
  auto it = node_->find(std::string(key));
  if (it == node_->end() || it->is_null()) return std::nullopt;
  return JsonReader(*it, path_ + "/" + std::string(key));
}

JsonReader JsonReader::At(std::size_t index) const {
  if (!node_->is_array()) Fail("expected an array");
  if (index >= node_->size()) Fail("index out of range");
  return JsonReader((*node_)[index], path_ + "/" + std::to_string(index));
}

std::size_t JsonReader::ArraySize() const {
  if (!node_->is_array()) Fail("expected an array");
  return node_->size();
}

std::string JsonReader::String() const {
  if (!node_->is_string()) Fail("expected a string");
  return node_->get<std::string>();
}

Decimal JsonReader::DecimalValue() const {
  if (!node_->is_string()) Fail("expected a decimal string such as \"0.02\"");
  try {
    return Decimal::Parse(node_->get_ref<const std::string&>());
  } catch (const DomainError& e) {
    Fail(e.what());
  }
}

double JsonReader::Number() const {
  if (!node_->is_number()) Fail("expected a number");
  const double value = node_->get<double>();
  if (!std::isfinite(value)) Fail("expected a finite number");
  return value;
}

int JsonReader::Int() const {
  if (!node_->is_number_integer()) Fail("expected an integer");
  return node_->get<int>();
}

bool JsonReader::Bool() const {
  if (!node_->is_boolean()) Fail("expected true or false");
  return node_->get<bool>();
}

std::string JsonReader::OptString(std::string_view key, std::string fallback) const {
  auto field = Find(key);
  return field ? field->String() : fallback;
}

double JsonReader::OptNumber(std::string_view key, double fallback) const {
  auto field = Find(key);
  return field ? field->Number() : fallback;
}

int JsonReader::OptInt(std::string_view key, int fallback) const {
  auto field = Find(key);
  return field ? field->Int() : fallback;
}

}  // namespace critmatrix::detail
