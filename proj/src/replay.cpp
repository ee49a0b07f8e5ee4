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

#include "txfix/replay.hpp"

#include <fmt/format.h>

#include "txfix/error.hpp"

namespace txfix {

Transaction invert_entry(const Transaction& txn, const ChangeLogEntry& entry) {
  const auto* change = entry.change();
  if (change == nullptr) return txn;
  return txn.with_field(change->row_id, change->field_name, change->old_value);
}

Transaction apply_forward(const Transaction& erroneous,
                          std::span<const ChangeLogEntry> changes) {
  Transaction out = erroneous;
  for (const auto& entry : changes) {
    if (const auto* change = entry.change()) {
      out = out.with_field(change->row_id, change->field_name, change->new_value);
    }
  }
  return out;
}

ReconstructionResult reconstruct(const Transaction& corrected,
                                 std::span<const ChangeLogEntry> history) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].sequence <= history[i - 1].sequence) {
      fail("replay.UnsortedHistory", "history of " + to_string(corrected.key()) +
                                         " is not in ascending sequence order");
    }
  }
  for (const auto& entry : history) {
    const auto* change = entry.change();
    if (change != nullptr && corrected.find(change->row_id) == nullptr) {
      fail("replay.UnknownRowInHistory",
           fmt::format("row {} of {} (sequence {})", change->row_id,
                       to_string(corrected.key()), entry.sequence));
    }
  }

  ReconstructionResult result{corrected, corrected, {}, {}, {}};
  std::vector<ChangeLogEntry> inverted;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    const auto* change = it->change();
    if (change == nullptr) continue;
    const auto current = result.erroneous.get_field(change->row_id, change->field_name);
    if (current != change->new_value) {
      result.skipped.push_back(
          {*it, fmt::format("field {} of row {} is {}, entry says new value {}",
                            change->field_name, change->row_id, display(current),
                            display(change->new_value))});
      continue;
    }
    result.erroneous = invert_entry(result.erroneous, *it);
    inverted.push_back(*it);
  }
  result.applied.assign(inverted.rbegin(), inverted.rend());
  for (const auto& entry : history) {
    if (entry.is_error()) result.errors.push_back(entry);
  }
  return result;
}

bool verify_roundtrip(const ReconstructionResult& result) {
  return apply_forward(result.erroneous, result.applied) == result.corrected;
}

}  // namespace txfix
