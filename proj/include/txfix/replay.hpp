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

// Recovers the erroneous version of a corrected transaction by undoing its
// PLOG change history.

#ifndef TXFIX_REPLAY_HPP_
#define TXFIX_REPLAY_HPP_

#include <span>
#include <string>
#include <vector>

#include "txfix/logstore.hpp"
#include "txfix/txmodel.hpp"

namespace txfix {

struct SkippedEntry {
  ChangeLogEntry entry;
  std::string reason;
};

struct ReconstructionResult {
  Transaction erroneous;
  Transaction corrected;
  // FIELD_CHANGED entries that were inverted, ascending sequence, so that
  // applying them forward over `erroneous` yields `corrected`.
  std::vector<ChangeLogEntry> applied;
  std::vector<SkippedEntry> skipped;
  // ERROR_LOGGED entries, passed through untouched.
  std::vector<ChangeLogEntry> errors;
};

// Inverts FIELD_CHANGED entries newest first, setting each field back to its
// old_value. An entry whose new_value does not match the current field value
// is skipped and reported. Throws replay.UnknownRowInHistory and
// replay.UnsortedHistory.
ReconstructionResult reconstruct(const Transaction& corrected,
                                 std::span<const ChangeLogEntry> history);

// Sets field <- new_value for each change in order.
Transaction apply_forward(const Transaction& erroneous,
                          std::span<const ChangeLogEntry> changes);

// Sets field <- old_value for one FIELD_CHANGED entry.
Transaction invert_entry(const Transaction& txn, const ChangeLogEntry& entry);

// True iff applying `applied` forward over `erroneous` is field-identical to
// `corrected`.
bool verify_roundtrip(const ReconstructionResult& result);

}  // namespace txfix

#endif  // TXFIX_REPLAY_HPP_
