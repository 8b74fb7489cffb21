#include "critmatrix/decimal.hpp"

#include <cstdlib>

#include "critmatrix/errors.hpp"

namespace critmatrix {

Decimal Decimal::FromInt(std::int64_t value) {
  std::int64_t units = 0;
  if (__builtin_mul_overflow(value, kUnitsPerOne, &units))
    throw DomainError("decimal overflow converting " + std::to_string(value));
  return Decimal(units);
}

std::optional<Decimal> Decimal::TryParse(std::string_view text) {
  try {
    return Parse(text);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

Decimal Decimal::Parse(std::string_view text) {
  const std::string quoted = "\"" + std::string(text) + "\"";
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t whole = 0;
  std::size_t int_digits = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    if (__builtin_mul_overflow(whole, 10, &whole) ||
        __builtin_add_overflow(whole, text[pos] - '0', &whole))
      throw DomainError("decimal out of range: " + quoted);
    ++pos;
    ++int_digits;
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (frac_digits == kScale)
        throw DomainError("more than 9 fractional digits in " + quoted);
      frac = frac * 10 + (text[pos] - '0');
      ++frac_digits;
      ++pos;
    }
    if (frac_digits == 0) throw DomainError("missing fractional digits in " + quoted);
  }
  if (int_digits == 0 && frac_digits == 0) throw DomainError("not a decimal: " + quoted);
  if (pos != text.size()) throw DomainError("trailing characters in " + quoted);
  for (int i = frac_digits; i < kScale; ++i) frac *= 10;

  std::int64_t units = 0;
  if (__builtin_mul_overflow(whole, kUnitsPerOne, &units) ||
      __builtin_add_overflow(units, frac, &units))
    throw DomainError("decimal out of range: " + quoted);
  return Decimal(negative ? -units : units);
}

std::string Decimal::ToString() const {
  if (units_ == 0) return "0";
  // |INT64_MIN| is not representable; such values never arise from Parse.
  const bool negative = units_ < 0;
  const std::uint64_t magnitude =
      negative ? static_cast<std::uint64_t>(-(units_ + 1)) + 1 : static_cast<std::uint64_t>(units_);
  const std::uint64_t whole = magnitude / kUnitsPerOne;
  std::uint64_t frac = magnitude % kUnitsPerOne;

  std::string out = negative ? "-" : "";
  out += std::to_string(whole);
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, kScale - digits.size(), '0');
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

Decimal Decimal::operator+(Decimal other) const {
  std::int64_t out = 0;
  if (__builtin_add_overflow(units_, other.units_, &out)) throw DomainError("decimal overflow in addition");
  return Decimal(out);
}

Decimal Decimal::operator-(Decimal other) const {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(units_, other.units_, &out)) throw DomainError("decimal overflow in subtraction");
  return Decimal(out);
}

Decimal Decimal::operator-() const { return Decimal(0) - *this; }

Decimal Decimal::operator*(std::int64_t factor) const {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(units_, factor, &out)) throw DomainError("decimal overflow in scaling");
  return Decimal(out);
}

}  // namespace critmatrix
