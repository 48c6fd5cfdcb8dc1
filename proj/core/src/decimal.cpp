#include "carserver/decimal.hpp"

#include <limits>

namespace carserver {

std::optional<Decimal> Decimal::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    ++i;
  }
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max() / kScale;
  std::int64_t whole = 0;
  std::size_t whole_digits = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    whole = whole * 10 + (text[i] - '0');
    if (whole > kMax) return std::nullopt;
    ++i;
    ++whole_digits;
  }
  if (whole_digits == 0) return std::nullopt;
  std::int64_t frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    int frac_digits = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      if (++frac_digits > kFractionDigits) return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
      ++i;
    }
    if (frac_digits == 0) return std::nullopt;
    for (int k = frac_digits; k < kFractionDigits; ++k) frac *= 10;
  }
  if (i != text.size()) return std::nullopt;
  std::int64_t micros = whole * kScale + frac;
  return Decimal(negative ? -micros : micros);
}

std::string Decimal::to_string() const {
  std::int64_t v = micros_;
  std::string out;
  if (v < 0) {
    out.push_back('-');
    v = -v;
  }
  out += std::to_string(v / kScale);
  std::int64_t frac = v % kScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, kFractionDigits - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out.push_back('.');
    out += digits;
  }
  return out;
}

}  // namespace carserver
