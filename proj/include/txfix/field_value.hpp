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

#ifndef TXFIX_FIELD_VALUE_HPP_
#define TXFIX_FIELD_VALUE_HPP_

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "txfix/decimal.hpp"

namespace txfix {

struct Missing {
  friend bool operator==(const Missing&, const Missing&) = default;
};

struct Text {
  std::string value;
  friend bool operator==(const Text&, const Text&) = default;
};

// A categorical value drawn from a named vocabulary ("tender_type").
struct Code {
  std::string vocabulary;
  std::string value;
  friend bool operator==(const Code&, const Code&) = default;
};

using FieldValue = std::variant<Missing, Text, Decimal, Code>;

inline bool is_missing(const FieldValue& v) {
  return std::holds_alternative<Missing>(v);
}

// Text encoding used by the TLOG attribute column and the PLOG value
// columns:
//
//   Missing          ""                 (empty)
//   Text("a b")      "t:a b"
//   Decimal(12.50)   "n:12.50"
//   Code(v, "CASH")  "c:v:CASH"
//
// '%', ';', '=' and ':' inside strings are percent-escaped so the encoded
// value can sit inside a "name=value;..." list.
std::string encode_field_value(const FieldValue& value);
FieldValue decode_field_value(std::string_view text);

// Human-readable form without type tags, for logs and error messages.
std::string display(const FieldValue& value);

std::string percent_escape(std::string_view raw);
std::string percent_unescape(std::string_view escaped);

// Named closed vocabularies: name -> ordered list of codes.
using VocabularyMap = std::map<std::string, std::vector<std::string>, std::less<>>;

}  // namespace txfix

#endif  // TXFIX_FIELD_VALUE_HPP_
