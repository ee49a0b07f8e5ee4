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

#ifndef TXFIX_ERROR_HPP_
#define TXFIX_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace txfix {

// Every failure raised by the library carries a module-qualified code such
// as "txmodel.DanglingParent" so the CLI and the service can report it in a
// machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message);

  const std::string& code() const noexcept { return code_; }

  // The part after the module prefix ("DanglingParent").
  std::string_view reason() const noexcept;

 private:
  std::string code_;
};

[[noreturn]] void fail(std::string code, const std::string& message);

}  // namespace txfix

#endif  // TXFIX_ERROR_HPP_
