#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace carserver {

/// Fixed-point decimal with six fractional digits, stored as an integer
/// count of millionths. Used for rates, latencies, bandwidths and money so
/// that sums and comparisons are exact.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 1'000'000;
  static constexpr int kFractionDigits = 6;

  constexpr Decimal() = default;

  static constexpr Decimal from_units(std::int64_t units) { return Decimal(units * kScale); }
  static constexpr Decimal from_raw(std::int64_t micros) { return Decimal(micros); }

  /// Accepts `[-]digits[.digits]` with at most six fractional digits.
  /// No exponent, no leading '+', no surrounding whitespace.
  static std::optional<Decimal> parse(std::string_view text);

  constexpr std::int64_t raw() const { return micros_; }
  constexpr bool is_integral() const { return micros_ % kScale == 0; }
  constexpr std::int64_t integral_part() const { return micros_ / kScale; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }

  /// Canonical text: no trailing fractional zeros, no leading zeros.
  std::string to_string() const;

  constexpr Decimal operator+(Decimal o) const { return Decimal(micros_ + o.micros_); }
  constexpr Decimal operator-(Decimal o) const { return Decimal(micros_ - o.micros_); }
  constexpr Decimal operator*(std::int64_t k) const { return Decimal(micros_ * k); }
  constexpr Decimal& operator+=(Decimal o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Decimal& operator-=(Decimal o) {
    micros_ -= o.micros_;
    return *this;
  }

  constexpr auto operator<=>(const Decimal&) const = default;

 private:
  constexpr explicit Decimal(std::int64_t micros) : micros_(micros) {}

  std::int64_t micros_ = 0;
};

}  // namespace carserver
