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


// Seeded generator of retail transactions with injected tender type code
// errors, in post-correction form: the TLOG holds corrected values and the
// PLOG holds ERROR_LOGGED plus the FIELD_CHANGED entries that fixed them.
//
// Tender types follow from the entry method (and, for CHIP, the tender
// amount). EASY errors replace the type with one the entry method cannot
// produce; HARD errors replace it with any other type.

#ifndef TXFIX_SYNTH_HPP_
#define TXFIX_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "txfix/replay.hpp"
#include "txfix/txmodel.hpp"

namespace txfix {

enum class Learnability { kEasy, kHard };

struct InjectedError {
  int tender_ordinal = 1;  // taxonomy class tender<k>
  double rate = 0.0;       // per transaction that has the tender
  Learnability learnability = Learnability::kEasy;
};

struct GeneratorProfile {
  std::uint64_t seed = 42;
  std::uint32_t store_count = 10;
  std::uint32_t transactions_per_store = 1000;
  std::uint32_t days = 5;
  std::string start_date = "2026-03-02";
  double item_geometric_p = 0.25;
  std::uint32_t max_items = 24;
  std::vector<double> tender_count_weights = {0.5, 0.4, 0.1};
  std::uint32_t product_count = 200;
  double return_rate = 0.05;
  double item_discount_rate = 0.1;
  double txn_discount_rate = 0.05;
  std::vector<InjectedError> errors = {{1, 0.15, Learnability::kEasy},
                                       {2, 0.08, Learnability::kEasy},
                                       {3, 0.07, Learnability::kEasy}};
  double two_step_rate = 0.05;   // per injected error
  double error_only_rate = 0.01; // per transaction without injected errors

  // The acceptance corpus: 10 stores x 1,000 transactions, EASY errors.
  static GeneratorProfile easy();
  // Same shape with HARD errors.
  static GeneratorProfile hard();
  // Missing keys take the easy() values. Throws synth.InvalidProfile.
  static GeneratorProfile from_json(const nlohmann::json& j);
  static GeneratorProfile load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  // Throws synth.InvalidProfile.
  void validate() const;
};

struct GroundTruthEntry {
  TransactionKey key;
  int tender_ordinal = 1;
  RowId row_id = 0;
  std::string erroneous_value;
  std::string correct_value;
  friend bool operator==(const GroundTruthEntry&, const GroundTruthEntry&) = default;
};

struct Corpus {
  std::string tlog;      // tlog.csv bytes
  std::string plog;      // plog.csv bytes
  std::string manifest;  // ground_truth.csv bytes
  std::vector<GroundTruthEntry> truth;
  std::size_t transaction_count = 0;
};

// Throws synth.InvalidProfile.
Corpus generate_corpus(const GeneratorProfile& profile);
// Writes tlog.csv, plog.csv, ground_truth.csv into `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::string format_ground_truth(std::span<const GroundTruthEntry> truth);
// Throws synth.BadManifest.
std::vector<GroundTruthEntry> parse_ground_truth(std::string_view text);

struct OracleMismatch {
  TransactionKey key;
  std::string detail;
};

struct OracleReport {
  std::size_t checked = 0;  // manifest entries
  std::vector<OracleMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

// Compares reconstructions against the manifest: every injected entry must
// be recovered exactly, and reconstructions must not change fields the
// manifest does not list.
OracleReport oracle_check(std::span<const GroundTruthEntry> truth,
                          std::span<const ReconstructionResult> results);

}  // namespace txfix

#endif  // TXFIX_SYNTH_HPP_
