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

#include "txfix/decimal.hpp"

#include <algorithm>
#include <limits>

#include "txfix/error.hpp"

namespace txfix {
namespace {

constexpr std::int64_t kPow10[] = {1, 10, 100, 1000, 10000};

std::int64_t scale_up(std::int64_t mantissa, int from, int to) {
  const std::int64_t factor = kPow10[to - from];
  if (mantissa > std::numeric_limits<std::int64_t>::max() / factor ||
      mantissa < std::numeric_limits<std::int64_t>::min() / factor) {
    fail("txmodel.BadDecimal", "decimal overflow");
  }
  return mantissa * factor;
}

}  // namespace

Decimal::Decimal(std::int64_t mantissa, int scale)
    : mantissa_(mantissa), scale_(scale) {
  if (scale < 0 || scale > kMaxScale) {
    fail("txmodel.BadDecimal", "scale out of range: " + std::to_string(scale));
  }
}

Decimal Decimal::parse(std::string_view text) {
  if (text.empty()) fail("txmodel.BadDecimal", "empty decimal");
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t mantissa = 0;
  int scale = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_dot) fail("txmodel.BadDecimal", "bad decimal: " + std::string(text));
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') {
      fail("txmodel.BadDecimal", "bad decimal: " + std::string(text));
    }
    seen_digit = true;
    if (seen_dot && ++scale > kMaxScale) {
      fail("txmodel.BadDecimal", "too many fractional digits: " + std::string(text));
    }
    if (mantissa > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
      fail("txmodel.BadDecimal", "decimal overflow: " + std::string(text));
    }
    mantissa = mantissa * 10 + (c - '0');
  }
  if (!seen_digit || (seen_dot && scale == 0)) {
    fail("txmodel.BadDecimal", "bad decimal: " + std::string(text));
  }
  return Decimal(negative ? -mantissa : mantissa, scale);
}

std::int64_t Decimal::units4() const {
  return scale_up(mantissa_, scale_, kMaxScale);
}

double Decimal::to_double() const {
  return static_cast<double>(mantissa_) / static_cast<double>(kPow10[scale_]);
}

std::string Decimal::to_string() const {
  const bool negative = mantissa_ < 0;
  // Magnitude as unsigned to survive INT64_MIN.
  std::uint64_t magnitude = negative
                                ? ~static_cast<std::uint64_t>(mantissa_) + 1
                                : static_cast<std::uint64_t>(mantissa_);
  std::string digits = std::to_string(magnitude);
  if (scale_ > 0) {
    if (digits.size() <= static_cast<std::size_t>(scale_)) {
      digits.insert(0, scale_ + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - scale_, 1, '.');
  }
  return negative ? "-" + digits : digits;
}

Decimal Decimal::rescaled(int scale) const {
  if (scale < scale_ || scale > kMaxScale) {
    fail("txmodel.BadDecimal", "cannot rescale exactly");
  }
  return Decimal(scale_up(mantissa_, scale_, scale), scale);
}

Decimal Decimal::operator+(const Decimal& other) const {
  const int scale = std::max(scale_, other.scale_);
  return Decimal(rescaled(scale).mantissa_ + other.rescaled(scale).mantissa_,
                 scale);
}

Decimal Decimal::operator-(const Decimal& other) const {
  const int scale = std::max(scale_, other.scale_);
  return Decimal(rescaled(scale).mantissa_ - other.rescaled(scale).mantissa_,
                 scale);
}

std::strong_ordering Decimal::compare(const Decimal& a, const Decimal& b) {
  return a.units4() <=> b.units4();
}

}  // namespace txfix
