#pragma once

/// @file decimal.hpp
/// Exact signed decimal with nine fractional digits.
///
/// Probabilities, impact values and criticalities are all carried in this
/// type so that sums and differences are exact: 0.32 - 0.32 is zero, not a
/// binary residue. Values are stored as an integer count of 1e-9 units.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace critmatrix {

class Decimal {
 public:
  static constexpr int kScale = 9;
  static constexpr std::int64_t kUnitsPerOne = 1'000'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal FromUnits(std::int64_t units) { return Decimal(units); }
  static Decimal FromInt(std::int64_t value);

  /// Parses "[-+]digits[.digits]" with at most nine fractional digits.
  /// Throws DomainError on malformed text, too many digits, or overflow.
  static Decimal Parse(std::string_view text);
  static std::optional<Decimal> TryParse(std::string_view text);

  /// Canonical text: no exponent, no trailing fractional zeros, "0" for zero.
  std::string ToString() const;

  constexpr std::int64_t units() const { return units_; }
  double ToDouble() const { return static_cast<double>(units_) / kUnitsPerOne; }
  constexpr bool IsZero() const { return units_ == 0; }
  constexpr bool IsNegative() const { return units_ < 0; }

  Decimal operator+(Decimal other) const;
  Decimal operator-(Decimal other) const;
  Decimal operator-() const;
  Decimal& operator+=(Decimal other) { return *this = *this + other; }
  Decimal& operator-=(Decimal other) { return *this = *this - other; }

  /// Exact scaling by an integer count (e.g. 0.1 x out-degree).
  Decimal operator*(std::int64_t factor) const;

  constexpr auto operator<=>(const Decimal&) const = default;

 private:
  constexpr explicit Decimal(std::int64_t units) : units_(units) {}

  std::int64_t units_ = 0;
};

/// True iff 0 <= d <= 1.
constexpr bool IsProbability(Decimal d) {
  return d.units() >= 0 && d.units() <= Decimal::kUnitsPerOne;
}

}  // namespace critmatrix
