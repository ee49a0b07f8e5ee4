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

#include "txfix/logstore.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "txfix/csv.hpp"
#include "txfix/error.hpp"

namespace txfix {
namespace {

constexpr const char* kTlogFile = "tlog.csv";
constexpr const char* kPlogFile = "plog.csv";

// Row-level parse failure; converted to a RowError by the ingest loop.
struct RowProblem {
  std::string reason;
  std::string detail;
};

template <class Int>
Int parse_uint(const std::string& text, const char* what, bool positive) {
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      (positive && value == 0)) {
    throw RowProblem{"BadKeyField", fmt::format("{}: '{}'", what, text)};
  }
  return value;
}

TransactionKey parse_key(const std::vector<std::string>& f) {
  static constexpr const char* kNames[] = {"store_number", "business_date",
                                           "transaction_index", "timestamp"};
  for (int i = 0; i < 4; ++i) {
    if (f[i].empty()) throw RowProblem{"MissingKeyField", kNames[i]};
  }
  TransactionKey key;
  key.store_number = parse_uint<std::uint32_t>(f[0], "store_number", true);
  key.transaction_index = parse_uint<std::uint64_t>(f[2], "transaction_index", true);
  try {
    key.business_date = parse_date(f[1]);
    key.timestamp = parse_timestamp(f[3]);
  } catch (const Error& e) {
    throw RowProblem{"BadKeyField", e.what()};
  }
  return key;
}

std::vector<std::string> key_fields(const TransactionKey& key) {
  return {std::to_string(key.store_number), format_date(key.business_date),
          std::to_string(key.transaction_index), format_timestamp(key.timestamp)};
}

TransactionRecord parse_tlog_row(const std::vector<std::string>& f) {
  if (f.size() != tlog_columns().size()) {
    throw RowProblem{"WrongColumnCount", fmt::format("{} columns", f.size())};
  }
  TransactionRecord r;
  r.key = parse_key(f);
  if (f[4].empty()) throw RowProblem{"MissingField", "row_id"};
  try {
    r.row_id = parse_uint<RowId>(f[4], "row_id", false);
    if (!f[6].empty()) r.parent_row_id = parse_uint<RowId>(f[6], "parent_row_id", false);
  } catch (RowProblem& p) {
    p.reason = "BadRowId";
    throw;
  }
  try {
    r.qualifier = parse_qualifier(f[5]);
    r.attributes = decode_attributes(f[7]);
  } catch (const Error& e) {
    throw RowProblem{std::string(e.reason()), e.what()};
  }
  return r;
}

ChangeLogEntry parse_plog_row(const std::vector<std::string>& f) {
  if (f.size() != plog_columns().size()) {
    throw RowProblem{"WrongColumnCount", fmt::format("{} columns", f.size())};
  }
  ChangeLogEntry e;
  e.key = parse_key(f);
  if (f[4].empty()) throw RowProblem{"MissingField", "sequence"};
  try {
    e.sequence = parse_uint<std::uint64_t>(f[4], "sequence", true);
  } catch (RowProblem& p) {
    p.reason = "BadSequence";
    throw;
  }
  try {
    e.logged_at = parse_timestamp(f[12]);
  } catch (const Error& err) {
    throw RowProblem{"BadTimestamp", err.what()};
  }
  const auto& kind = f[5];
  if (kind == "ERROR_LOGGED") {
    if (f[6].empty()) throw RowProblem{"MissingField", "error_code"};
    for (int i = 8; i <= 11; ++i) {
      if (!f[i].empty()) throw RowProblem{"UnexpectedField", plog_columns()[i]};
    }
    e.kind = ErrorLogged{f[6], f[7]};
  } else if (kind == "FIELD_CHANGED") {
    if (!f[6].empty()) throw RowProblem{"UnexpectedField", "error_code"};
    if (f[8].empty()) throw RowProblem{"MissingField", "row_id"};
    if (f[9].empty()) throw RowProblem{"MissingField", "field_name"};
    FieldChanged c;
    try {
      c.row_id = parse_uint<RowId>(f[8], "row_id", false);
    } catch (RowProblem& p) {
      p.reason = "BadRowId";
      throw;
    }
    c.field_name = f[9];
    try {
      c.old_value = decode_field_value(f[10]);
      c.new_value = decode_field_value(f[11]);
    } catch (const Error& err) {
      throw RowProblem{"BadValue", err.what()};
    }
    c.task_name = f[7];
    if (c.old_value == c.new_value) {
      throw RowProblem{"NoOpChange", fmt::format("{} old == new", c.field_name)};
    }
    e.kind = std::move(c);
  } else {
    throw RowProblem{"BadKind", kind};
  }
  return e;
}

void read_header(csv::Reader& reader, const std::vector<std::string>& expected,
                 const char* table) {
  std::vector<std::string> header;
  if (!reader.next(header)) {
    fail("logstore.HeaderMismatch", fmt::format("{}: missing header row", table));
  }
  if (header != expected) {
    fail("logstore.HeaderMismatch",
         fmt::format("{}: expected columns {}", table, fmt::join(expected, ",")));
  }
}

}  // namespace

const std::vector<std::string>& tlog_columns() {
  static const std::vector<std::string> kColumns = {
      "store_number", "business_date", "transaction_index", "timestamp",
      "row_id",       "qualifier",     "parent_row_id",     "attributes"};
  return kColumns;
}

const std::vector<std::string>& plog_columns() {
  static const std::vector<std::string> kColumns = {
      "store_number", "business_date", "transaction_index", "timestamp", "sequence",
      "kind",         "error_code",    "task_name",         "row_id",    "field_name",
      "old_value",    "new_value",     "logged_at"};
  return kColumns;
}

std::string encode_attributes(const Attributes& attributes) {
  std::string out;
  for (const auto& [name, value] : attributes) {
    if (is_missing(value)) continue;
    if (!out.empty()) out.push_back(';');
    out += percent_escape(name);
    out.push_back('=');
    out += encode_field_value(value);
  }
  return out;
}

Attributes decode_attributes(std::string_view text) {
  Attributes out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    const auto pair = text.substr(start, end - start);
    const auto eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      fail("txmodel.BadAttributes", "expected NAME=VALUE: " + std::string(pair));
    }
    auto name = percent_unescape(pair.substr(0, eq));
    auto value = decode_field_value(pair.substr(eq + 1));
    if (is_missing(value)) {
      fail("txmodel.BadAttributes", "empty value for " + name);
    }
    if (!out.emplace(name, std::move(value)).second) {
      fail("txmodel.BadAttributes", "duplicate attribute " + name);
    }
    start = end + 1;
  }
  return out;
}

std::vector<std::string> format_tlog_row(const TransactionRecord& r) {
  auto f = key_fields(r.key);
  f.push_back(std::to_string(r.row_id));
  f.emplace_back(to_string(r.qualifier));
  f.push_back(r.parent_row_id ? std::to_string(*r.parent_row_id) : std::string());
  f.push_back(encode_attributes(r.attributes));
  return f;
}

std::vector<std::string> format_plog_row(const ChangeLogEntry& e) {
  auto f = key_fields(e.key);
  f.push_back(std::to_string(e.sequence));
  if (const auto* err = std::get_if<ErrorLogged>(&e.kind)) {
    f.insert(f.end(), {"ERROR_LOGGED", err->error_code, err->task_name, "", "", "", ""});
  } else {
    const auto& c = std::get<FieldChanged>(e.kind);
    f.insert(f.end(), {"FIELD_CHANGED", "", c.task_name, std::to_string(c.row_id),
                       c.field_name, encode_field_value(c.old_value),
                       encode_field_value(c.new_value)});
  }
  f.push_back(format_timestamp(e.logged_at));
  return f;
}

LogStore::LogStore(std::filesystem::path dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail("logstore.UnreadableSource", "cannot create " + dir.string());
  load(dir);
  dir_ = std::move(dir);
}

void LogStore::load(const std::filesystem::path& dir) {
  loading_ = true;
  try {
    if (std::ifstream in(dir / kTlogFile); in) {
      csv::Reader reader(in);
      read_header(reader, tlog_columns(), kTlogFile);
      std::vector<std::string> fields;
      while (reader.next(fields)) {
        try {
          auto record = parse_tlog_row(fields);
          auto& state = keys_[record.key];
          state.rows.insert_or_assign(record.row_id, std::move(record));
        } catch (const RowProblem& p) {
          fail("logstore.CorruptStore",
               fmt::format("{} line {}: {} {}", kTlogFile, reader.line(), p.reason, p.detail));
        }
      }
      for (auto& [key, state] : keys_) {
        std::vector<TransactionRecord> rows;
        for (const auto& [id, r] : state.rows) rows.push_back(r);
        state.transaction = Transaction::build(std::move(rows));
      }
    }
    if (std::ifstream in(dir / kPlogFile); in) {
      const auto report = ingest_plog(in);
      if (!report.errors.empty()) {
        const auto& e = report.errors.front();
        fail("logstore.CorruptStore",
             fmt::format("{} line {}: {} {}", kPlogFile, e.line, e.reason, e.detail));
      }
    }
  } catch (const Error& e) {
    loading_ = false;
    if (e.code() == "logstore.CorruptStore") throw;
    fail("logstore.CorruptStore", e.what());
  }
  loading_ = false;
}

void LogStore::append_lines(const std::string& file, const std::vector<std::string>& columns,
                            const std::vector<std::vector<std::string>>& rows) const {
  if (!dir_ || loading_ || rows.empty()) return;
  const auto path = *dir_ / file;
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail("logstore.WriteFailed", "cannot append to " + path.string());
  if (fresh) csv::write_row(out, columns);
  for (const auto& row : rows) csv::write_row(out, row);
  out.flush();
  if (!out) fail("logstore.WriteFailed", "short write to " + path.string());
}

IngestReport LogStore::ingest_tlog(std::istream& source) {
  if (!source.good()) fail("logstore.UnreadableSource", "tlog stream is not readable");
  csv::Reader reader(source);
  read_header(reader, tlog_columns(), "tlog");
  IngestReport report;
  std::vector<std::pair<std::size_t, TransactionRecord>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    try {
      rows.emplace_back(reader.line(), parse_tlog_row(fields));
    } catch (const RowProblem& p) {
      report.errors.push_back({reader.line(), p.reason, p.detail});
    }
  }
  std::unique_lock lock(mutex_);
  return ingest_records(std::move(rows), std::move(report));
}

IngestReport LogStore::ingest_transaction(const Transaction& txn) {
  std::vector<std::pair<std::size_t, TransactionRecord>> rows;
  for (const auto& r : txn.records()) rows.emplace_back(0, r);
  std::unique_lock lock(mutex_);
  return ingest_records(std::move(rows), {});
}

IngestReport LogStore::ingest_records(
    std::vector<std::pair<std::size_t, TransactionRecord>> rows, IngestReport report) {
  std::map<TransactionKey, std::vector<std::pair<std::size_t, TransactionRecord>>> by_key;
  for (auto& row : rows) by_key[row.second.key].push_back(std::move(row));

  std::vector<std::vector<std::string>> persisted;
  for (auto& [key, candidates] : by_key) {
    const auto existing = keys_.find(key);
    std::map<RowId, TransactionRecord> merged;
    if (existing != keys_.end()) merged = existing->second.rows;
    std::set<RowId> added;
    bool conflict = false;
    for (auto& [line, record] : candidates) {
      const auto it = merged.find(record.row_id);
      if (it != merged.end()) {
        if (it->second == record) {
          ++report.duplicates;
        } else {
          report.errors.push_back(
              {line, "ConflictingRow",
               fmt::format("row {} of {} differs from the stored row", record.row_id,
                           to_string(key))});
          conflict = true;
        }
        continue;
      }
      merged.emplace(record.row_id, record);
      added.insert(record.row_id);
    }
    if (added.empty() || conflict) continue;

    std::vector<TransactionRecord> all;
    for (const auto& [id, r] : merged) all.push_back(r);
    try {
      auto txn = Transaction::build(std::move(all));
      auto& state = keys_[key];
      state.rows = std::move(merged);
      state.transaction = std::move(txn);
      report.rows_added += added.size();
      for (const auto& [line, record] : candidates) {
        if (added.erase(record.row_id) > 0) {
          persisted.push_back(format_tlog_row(record));
        }
      }
    } catch (const Error& e) {
      report.errors.push_back({candidates.front().first, std::string(e.reason()), e.what()});
    }
  }
  append_lines(kTlogFile, tlog_columns(), persisted);
  return report;
}

IngestReport LogStore::ingest_plog(std::istream& source) {
  if (!source.good()) fail("logstore.UnreadableSource", "plog stream is not readable");
  csv::Reader reader(source);
  read_header(reader, plog_columns(), "plog");
  IngestReport report;
  std::vector<std::vector<std::string>> persisted;
  std::vector<std::string> fields;

  std::unique_lock lock(mutex_);
  while (reader.next(fields)) {
    ChangeLogEntry entry;
    try {
      entry = parse_plog_row(fields);
    } catch (const RowProblem& p) {
      report.errors.push_back({reader.line(), p.reason, p.detail});
      continue;
    }
    const auto it = keys_.find(entry.key);
    if (it == keys_.end() || it->second.rows.empty()) {
      if (std::find(quarantine_.begin(), quarantine_.end(), entry) == quarantine_.end()) {
        quarantine_.push_back(entry);
      }
      ++report.quarantined;
      report.errors.push_back({reader.line(), "OrphanEntry",
                               "no TLOG rows for " + to_string(entry.key)});
      continue;
    }
    auto& history = it->second.history;
    const std::uint64_t expected = history.size() + 1;
    if (entry.sequence == expected) {
      persisted.push_back(format_plog_row(entry));
      history.push_back(std::move(entry));
      ++report.rows_added;
    } else if (entry.sequence < expected && history[entry.sequence - 1] == entry) {
      ++report.duplicates;
    } else {
      report.errors.push_back(
          {reader.line(), "SequenceGap",
           fmt::format("sequence {} for {}, expected {}", entry.sequence,
                       to_string(entry.key), expected)});
    }
  }
  append_lines(kPlogFile, plog_columns(), persisted);
  return report;
}

std::vector<std::uint64_t> LogStore::append_feedback(
    const TransactionKey& key, std::vector<ChangeLogEntry> entries,
    std::optional<std::uint64_t> expected_last_sequence) {
  std::unique_lock lock(mutex_);
  const auto it = keys_.find(key);
  if (it == keys_.end() || !it->second.transaction) {
    fail("logstore.UnknownKey", to_string(key));
  }
  auto& state = it->second;
  const std::uint64_t last = state.history.size();
  if (expected_last_sequence && *expected_last_sequence != last) {
    fail("logstore.SequenceConflict",
         fmt::format("{}: expected last sequence {}, store has {}", to_string(key),
                     *expected_last_sequence, last));
  }

  Transaction working = *state.transaction;
  std::set<RowId> touched;
  std::vector<std::uint64_t> sequences;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    e.key = key;
    e.sequence = last + i + 1;
    sequences.push_back(e.sequence);
    if (const auto* c = e.change()) {
      if (c->old_value == c->new_value) fail("logstore.NoOpChange", c->field_name);
      const auto current = working.get_field(c->row_id, c->field_name);
      if (current != c->old_value) {
        fail("logstore.StaleValue",
             fmt::format("row {} field {} is {}, entry expects {}", c->row_id, c->field_name,
                         display(current), display(c->old_value)));
      }
      working = working.with_field(c->row_id, c->field_name, c->new_value);
      touched.insert(c->row_id);
    }
  }

  std::vector<std::vector<std::string>> tlog_rows;
  for (const RowId id : touched) {
    const auto& record = working.record(id);
    state.rows.insert_or_assign(id, record);
    tlog_rows.push_back(format_tlog_row(record));
  }
  std::vector<std::vector<std::string>> plog_rows;
  for (const auto& e : entries) plog_rows.push_back(format_plog_row(e));
  // PLOG first: a crash between the two appends leaves an entry whose
  // new_value is not yet in TLOG, which replay reports and skips.
  append_lines(kPlogFile, plog_columns(), plog_rows);
  append_lines(kTlogFile, tlog_columns(), tlog_rows);
  state.transaction = std::move(working);
  for (auto& e : entries) state.history.push_back(std::move(e));
  return sequences;
}

std::vector<TransactionKey> LogStore::keys() const {
  std::shared_lock lock(mutex_);
  std::vector<TransactionKey> out;
  for (const auto& [key, state] : keys_) {
    if (state.transaction) out.push_back(key);
  }
  return out;
}

bool LogStore::contains(const TransactionKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = keys_.find(key);
  return it != keys_.end() && it->second.transaction.has_value();
}

std::optional<Transaction> LogStore::transaction(const TransactionKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = keys_.find(key);
  if (it == keys_.end()) return std::nullopt;
  return it->second.transaction;
}

std::vector<ChangeLogEntry> LogStore::history(const TransactionKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = keys_.find(key);
  return it == keys_.end() ? std::vector<ChangeLogEntry>{} : it->second.history;
}

std::uint64_t LogStore::last_sequence(const TransactionKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = keys_.find(key);
  return it == keys_.end() ? 0 : it->second.history.size();
}

std::vector<CorrectedTransaction> LogStore::corrected_transactions() const {
  std::shared_lock lock(mutex_);
  std::vector<CorrectedTransaction> out;
  for (const auto& [key, state] : keys_) {
    if (!state.transaction) continue;
    const bool has_error = std::any_of(state.history.begin(), state.history.end(),
                                       [](const auto& e) { return e.is_error(); });
    const bool has_change = std::any_of(state.history.begin(), state.history.end(),
                                        [](const auto& e) { return e.change() != nullptr; });
    if (has_error && has_change) out.push_back({*state.transaction, state.history});
  }
  return out;
}

std::vector<Transaction> LogStore::clean_transactions() const {
  std::shared_lock lock(mutex_);
  std::vector<Transaction> out;
  for (const auto& [key, state] : keys_) {
    if (!state.transaction) continue;
    if (std::none_of(state.history.begin(), state.history.end(),
                     [](const auto& e) { return e.is_error(); })) {
      out.push_back(*state.transaction);
    }
  }
  return out;
}

std::vector<TransactionKey> LogStore::error_only_keys() const {
  std::shared_lock lock(mutex_);
  std::vector<TransactionKey> out;
  for (const auto& [key, state] : keys_) {
    if (!state.transaction) continue;
    const bool has_error = std::any_of(state.history.begin(), state.history.end(),
                                       [](const auto& e) { return e.is_error(); });
    const bool has_change = std::any_of(state.history.begin(), state.history.end(),
                                        [](const auto& e) { return e.change() != nullptr; });
    if (has_error && !has_change) out.push_back(key);
  }
  return out;
}

std::vector<ChangeLogEntry> LogStore::quarantined() const {
  std::shared_lock lock(mutex_);
  return quarantine_;
}

std::size_t LogStore::transaction_count() const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(std::count_if(
      keys_.begin(), keys_.end(), [](const auto& kv) { return kv.second.transaction.has_value(); }));
}

std::size_t LogStore::tlog_row_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, state] : keys_) n += state.rows.size();
  return n;
}

std::size_t LogStore::plog_entry_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, state] : keys_) n += state.history.size();
  return n;
}

void LogStore::write_tlog(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  csv::write_row(out, tlog_columns());
  for (const auto& [key, state] : keys_) {
    for (const auto& [id, r] : state.rows) csv::write_row(out, format_tlog_row(r));
  }
}

void LogStore::write_plog(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  csv::write_row(out, plog_columns());
  for (const auto& [key, state] : keys_) {
    for (const auto& e : state.history) csv::write_row(out, format_plog_row(e));
  }
}

}  // namespace txfix
