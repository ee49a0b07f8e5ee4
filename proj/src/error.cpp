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

#include "txfix/error.hpp"

namespace txfix {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

std::string_view Error::reason() const noexcept {
  std::string_view code = code_;
  const auto dot = code.find('.');
  return dot == std::string_view::npos ? code : code.substr(dot + 1);
}

void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace txfix
