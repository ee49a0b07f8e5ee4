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

#include "txfix/field_value.hpp"

#include "txfix/error.hpp"

namespace txfix {
namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string percent_escape(std::string_view raw) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size());
  for (const char c : raw) {
    if (c == '%' || c == ';' || c == '=' || c == ':') {
      out.push_back('%');
      out.push_back(kHex[(static_cast<unsigned char>(c) >> 4) & 0xF]);
      out.push_back(kHex[static_cast<unsigned char>(c) & 0xF]);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string percent_unescape(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    if (escaped[i] != '%') {
      out.push_back(escaped[i]);
      continue;
    }
    if (i + 2 >= escaped.size()) {
      fail("txmodel.BadFieldValue", "truncated escape in: " + std::string(escaped));
    }
    const int hi = hex_digit(escaped[i + 1]);
    const int lo = hex_digit(escaped[i + 2]);
    if (hi < 0 || lo < 0) {
      fail("txmodel.BadFieldValue", "bad escape in: " + std::string(escaped));
    }
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

std::string encode_field_value(const FieldValue& value) {
  return std::visit(
      Overloaded{
          [](const Missing&) { return std::string(); },
          [](const Text& t) { return "t:" + percent_escape(t.value); },
          [](const Decimal& d) { return "n:" + d.to_string(); },
          [](const Code& c) {
            return "c:" + percent_escape(c.vocabulary) + ":" +
                   percent_escape(c.value);
          },
      },
      value);
}

FieldValue decode_field_value(std::string_view text) {
  if (text.empty()) return Missing{};
  if (text.size() < 2 || text[1] != ':') {
    fail("txmodel.BadFieldValue", "untagged value: " + std::string(text));
  }
  const std::string_view body = text.substr(2);
  switch (text[0]) {
    case 't':
      return Text{percent_unescape(body)};
    case 'n':
      return Decimal::parse(body);
    case 'c': {
      const auto colon = body.find(':');
      if (colon == std::string_view::npos || colon == 0) {
        fail("txmodel.BadFieldValue", "code without vocabulary: " + std::string(text));
      }
      return Code{percent_unescape(body.substr(0, colon)),
                  percent_unescape(body.substr(colon + 1))};
    }
    default:
      fail("txmodel.BadFieldValue", "unknown value tag: " + std::string(text));
  }
}

std::string display(const FieldValue& value) {
  return std::visit(Overloaded{
                        [](const Missing&) { return std::string("<missing>"); },
                        [](const Text& t) { return t.value; },
                        [](const Decimal& d) { return d.to_string(); },
                        [](const Code& c) { return c.value; },
                    },
                    value);
}

}  // namespace txfix
