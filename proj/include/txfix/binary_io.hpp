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

#ifndef TXFIX_BINARY_IO_HPP_
#define TXFIX_BINARY_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace txfix {

// Little-endian byte sink used by the feature file and model payloads.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view b) { out_.append(b); }
  // u64 length prefix followed by the bytes.
  void blob(std::string_view b);

  const std::string& data() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

// Bounds-checked reader; throws `<error_code>` on truncation.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string error_code)
      : data_(data), error_code_(std::move(error_code)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64();
  double f64();
  std::string_view bytes(std::size_t n);
  std::string blob();

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string error_code_;
};

std::string read_file_bytes(const std::filesystem::path& path);

// Writes via a temporary sibling and rename(2) so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace txfix

#endif  // TXFIX_BINARY_IO_HPP_
