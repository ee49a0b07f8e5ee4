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

#ifndef TXFIX_CSV_HPP_
#define TXFIX_CSV_HPP_

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace txfix::csv {

// RFC 4180 reader: comma separated, '"' quoting with "" as an escaped
// quote, quoted fields may span lines. Accepts LF or CRLF line endings.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next record. Returns false at end of input. Throws
  // io.MalformedCsv on an unterminated quote.
  bool next(std::vector<std::string>& fields);

  // 1-based line on which the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t next_line_ = 1;
  std::size_t record_line_ = 0;
};

// Quotes a field only when it contains ',', '"', CR or LF. Records end
// with a single LF.
void write_row(std::ostream& out, std::span<const std::string> fields);

std::string quote_if_needed(const std::string& field);

}  // namespace txfix::csv

#endif  // TXFIX_CSV_HPP_
