// Copyright 2026 The txfix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TXFIX_DECIMAL_HPP_
#define TXFIX_DECIMAL_HPP_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace txfix {

// Fixed-scale decimal: mantissa * 10^-scale with 0 <= scale <= 4.
//
// The scale is part of the value: "2.50" and "2.5" are numerically equal
// but are different values, so a parsed amount serializes back to exactly
// the text it came from. Use compare() for numeric ordering.
class Decimal {
 public:
  static constexpr int kMaxScale = 4;

  constexpr Decimal() = default;
  Decimal(std::int64_t mantissa, int scale);

  // Accepts an optional sign, digits and an optional fractional part of at
  // most kMaxScale digits. Throws txmodel.BadDecimal.
  static Decimal parse(std::string_view text);

  static Decimal from_units(std::int64_t units, int scale) {
    return Decimal(units, scale);
  }

  std::int64_t mantissa() const { return mantissa_; }
  int scale() const { return scale_; }

  // Mantissa expressed at scale kMaxScale.
  std::int64_t units4() const;
  double to_double() const;
  std::string to_string() const;

  // Exact rescale to a scale >= this->scale().
  Decimal rescaled(int scale) const;

  // Same scale as the wider operand.
  Decimal operator+(const Decimal& other) const;
  Decimal operator-(const Decimal& other) const;

  // Numeric three-way comparison, ignoring scale.
  static std::strong_ordering compare(const Decimal& a, const Decimal& b);

  friend bool operator==(const Decimal&, const Decimal&) = default;

 private:
  std::int64_t mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace txfix

#endif  // TXFIX_DECIMAL_HPP_
