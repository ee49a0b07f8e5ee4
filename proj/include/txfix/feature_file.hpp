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

// Self-describing columnar feature file.
//
//   magic    8 bytes  "TXFIXFT\0"
//   version  u32      1
//   reserved u32      0
//   header   u64 length + JSON text (kind, fingerprints, columns, labels,
//            ratios, seed)
//   rows     u64
//   columns  for each column, `rows` little-endian f64 values, in order:
//            key_store, key_date (days since 1970-01-01), key_index,
//            key_ts (seconds since epoch), split, each feature column,
//            then one column per label (detection) or `target`.

#ifndef TXFIX_FEATURE_FILE_HPP_
#define TXFIX_FEATURE_FILE_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "txfix/features.hpp"

namespace txfix {

inline constexpr std::uint32_t kFeatureFileVersion = 1;

std::string serialize_dataset(const Dataset& ds);
// Throws features.CorruptFile.
Dataset deserialize_dataset(std::string_view bytes);

void write_feature_file(const Dataset& ds, const std::filesystem::path& path);

struct ExpectedFingerprints {
  std::optional<std::string> schema;
  std::optional<std::string> taxonomy;
};

// Throws features.FingerprintMismatch when the file was produced under a
// different schema or taxonomy than expected, io.UnreadableSource,
// features.CorruptFile.
Dataset read_feature_file(const std::filesystem::path& path,
                          const ExpectedFingerprints& expected = {});

// One row per sample: key, split, feature columns, labels or target.
void export_csv(const Dataset& ds, std::ostream& out);

}  // namespace txfix

#endif  // TXFIX_FEATURE_FILE_HPP_
