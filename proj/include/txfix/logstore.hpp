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

// TLOG/PLOG tables: parsing, validation, persistence and key-based queries.
//
// File formats (UTF-8, RFC 4180 quoting, LF line endings, header row):
//
//   tlog.csv  store_number,business_date,transaction_index,timestamp,
//             row_id,qualifier,parent_row_id,attributes
//   plog.csv  store_number,business_date,transaction_index,timestamp,
//             sequence,kind,error_code,task_name,row_id,field_name,
//             old_value,new_value,logged_at
//
// `attributes` is "NAME=VALUE;NAME=VALUE" with names in ascending order and
// values in the encode_field_value() form. PLOG old/new values use the same
// encoding; blank means Missing. Columns that do not apply to a kind are
// blank (error_code/task_name for ERROR_LOGGED; row_id, field_name,
// old_value, new_value for FIELD_CHANGED; task_name is optional there).

#ifndef TXFIX_LOGSTORE_HPP_
#define TXFIX_LOGSTORE_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "txfix/txmodel.hpp"

namespace txfix {

struct ErrorLogged {
  std::string error_code;
  std::string task_name;
  friend bool operator==(const ErrorLogged&, const ErrorLogged&) = default;
};

// A field addition has old_value Missing; a removal has new_value Missing.
struct FieldChanged {
  RowId row_id = 0;
  std::string field_name;
  FieldValue old_value;
  FieldValue new_value;
  std::string task_name;
  friend bool operator==(const FieldChanged&, const FieldChanged&) = default;
};

struct ChangeLogEntry {
  TransactionKey key;
  std::uint64_t sequence = 0;
  std::variant<ErrorLogged, FieldChanged> kind;
  Timestamp logged_at{};

  bool is_error() const { return std::holds_alternative<ErrorLogged>(kind); }
  const FieldChanged* change() const { return std::get_if<FieldChanged>(&kind); }

  friend bool operator==(const ChangeLogEntry&, const ChangeLogEntry&) = default;
};

struct RowError {
  std::size_t line = 0;   // 1-based line in the source; 0 when not file-based
  std::string reason;     // "MissingKeyField", "NoOpChange", "OrphanEntry", ...
  std::string detail;
};

struct IngestReport {
  std::size_t rows_added = 0;
  std::size_t duplicates = 0;
  std::size_t quarantined = 0;
  std::vector<RowError> errors;
};

struct CorrectedTransaction {
  Transaction transaction;
  std::vector<ChangeLogEntry> history;  // ascending sequence
};

const std::vector<std::string>& tlog_columns();
const std::vector<std::string>& plog_columns();
std::vector<std::string> format_tlog_row(const TransactionRecord& record);
std::vector<std::string> format_plog_row(const ChangeLogEntry& entry);
std::string encode_attributes(const Attributes& attributes);
Attributes decode_attributes(std::string_view text);

// Thread-safe: concurrent readers, serialized writers.
class LogStore {
 public:
  // In-memory store.
  LogStore() = default;
  // Durable store rooted at `dir` (created if needed). Existing tlog.csv and
  // plog.csv in `dir` are loaded; for tlog.csv the last row per
  // (key, row_id) wins, which is how field updates from feedback persist.
  // Throws logstore.CorruptStore.
  explicit LogStore(std::filesystem::path dir);

  LogStore(const LogStore&) = delete;
  LogStore& operator=(const LogStore&) = delete;

  // Throws logstore.UnreadableSource, logstore.HeaderMismatch. Identical
  // rows already present count as duplicates and are not re-added.
  IngestReport ingest_tlog(std::istream& source);
  IngestReport ingest_plog(std::istream& source);
  // Adds a whole transaction (used for new arrivals at the service).
  IngestReport ingest_transaction(const Transaction& txn);

  // Appends entries with the next sequence numbers and applies
  // FIELD_CHANGED entries to the current TLOG state. When
  // `expected_last_sequence` is set and differs from the stored last
  // sequence, throws logstore.SequenceConflict so the caller can re-read
  // and retry. Also throws logstore.UnknownKey, logstore.NoOpChange,
  // logstore.StaleValue (old_value differs from the current value),
  // txmodel.UnknownRow. Returns the assigned sequences.
  std::vector<std::uint64_t> append_feedback(
      const TransactionKey& key, std::vector<ChangeLogEntry> entries,
      std::optional<std::uint64_t> expected_last_sequence = std::nullopt);

  std::vector<TransactionKey> keys() const;
  bool contains(const TransactionKey& key) const;
  std::optional<Transaction> transaction(const TransactionKey& key) const;
  std::vector<ChangeLogEntry> history(const TransactionKey& key) const;
  std::uint64_t last_sequence(const TransactionKey& key) const;

  // >= 1 ERROR_LOGGED and >= 1 FIELD_CHANGED, ascending key order.
  std::vector<CorrectedTransaction> corrected_transactions() const;
  // No ERROR_LOGGED entries, ascending key order.
  std::vector<Transaction> clean_transactions() const;
  // ERROR_LOGGED but never corrected.
  std::vector<TransactionKey> error_only_keys() const;
  std::vector<ChangeLogEntry> quarantined() const;

  std::size_t transaction_count() const;
  std::size_t tlog_row_count() const;
  std::size_t plog_entry_count() const;

  // Canonical serialization: key order, then row_id / sequence.
  void write_tlog(std::ostream& out) const;
  void write_plog(std::ostream& out) const;

 private:
  struct KeyState {
    std::map<RowId, TransactionRecord> rows;
    std::optional<Transaction> transaction;
    std::vector<ChangeLogEntry> history;
  };

  IngestReport ingest_records(std::vector<std::pair<std::size_t, TransactionRecord>> rows,
                              IngestReport report);
  void append_lines(const std::string& file, const std::vector<std::string>& columns,
                    const std::vector<std::vector<std::string>>& rows) const;
  void load(const std::filesystem::path& dir);

  mutable std::shared_mutex mutex_;
  std::map<TransactionKey, KeyState> keys_;
  std::vector<ChangeLogEntry> quarantine_;
  std::optional<std::filesystem::path> dir_;
  bool loading_ = false;
};

}  // namespace txfix

#endif  // TXFIX_LOGSTORE_HPP_
