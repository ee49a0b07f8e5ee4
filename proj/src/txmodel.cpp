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

#include "txfix/txmodel.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include <fmt/format.h>

#include "txfix/error.hpp"

namespace txfix {
namespace {

bool parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return res.ec == std::errc();
}

constexpr std::string_view kQualifierNames[] = {
    "HEADER", "ITEM", "ITEM_DISCOUNT", "TXN_DISCOUNT", "TAX", "TENDER"};

}  // namespace

Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_fixed_int(text, 0, 4, y) || !parse_fixed_int(text, 5, 2, m) ||
      !parse_fixed_int(text, 8, 2, d)) {
    fail("txmodel.BadDate", "expected YYYY-MM-DD: " + std::string(text));
  }
  const Date date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                  std::chrono::day(static_cast<unsigned>(d))};
  if (!date.ok()) fail("txmodel.BadDate", "invalid date: " + std::string(text));
  return date;
}

std::string format_date(const Date& date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                     static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

Timestamp parse_timestamp(std::string_view text) {
  int hh = 0, mm = 0, ss = 0;
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z' || !parse_fixed_int(text, 11, 2, hh) ||
      !parse_fixed_int(text, 14, 2, mm) || !parse_fixed_int(text, 17, 2, ss) ||
      hh > 23 || mm > 59 || ss > 59) {
    fail("txmodel.BadTimestamp", "expected YYYY-MM-DDTHH:MM:SSZ: " + std::string(text));
  }
  Date date;
  try {
    date = parse_date(text.substr(0, 10));
  } catch (const Error&) {
    fail("txmodel.BadTimestamp", "invalid date in timestamp: " + std::string(text));
  }
  return std::chrono::sys_days(date) + std::chrono::hours(hh) +
         std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

std::string format_timestamp(const Timestamp& ts) {
  const auto days = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::hh_mm_ss hms(ts - days);
  return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(Date(days)),
                     hms.hours().count(), hms.minutes().count(),
                     hms.seconds().count());
}

std::strong_ordering operator<=>(const TransactionKey& a, const TransactionKey& b) {
  const auto da = std::chrono::sys_days(a.business_date).time_since_epoch().count();
  const auto db = std::chrono::sys_days(b.business_date).time_since_epoch().count();
  return std::tie(a.store_number, da, a.transaction_index, a.timestamp) <=>
         std::tie(b.store_number, db, b.transaction_index, b.timestamp);
}

std::string to_string(const TransactionKey& key) {
  return fmt::format("{}|{}|{}|{}", key.store_number, format_date(key.business_date),
                     key.transaction_index, format_timestamp(key.timestamp));
}

std::string_view to_string(RecordQualifier q) {
  return kQualifierNames[static_cast<int>(q)];
}

RecordQualifier parse_qualifier(std::string_view text) {
  for (std::size_t i = 0; i < std::size(kQualifierNames); ++i) {
    if (kQualifierNames[i] == text) return static_cast<RecordQualifier>(i);
  }
  fail("txmodel.UnknownQualifier", "unknown record qualifier: " + std::string(text));
}

Transaction Transaction::build(std::vector<TransactionRecord> records) {
  if (records.empty()) fail("txmodel.EmptyTransaction", "no records");
  const TransactionKey key = records.front().key;
  for (const auto& r : records) {
    if (r.key != key) {
      fail("txmodel.MixedKeys", "records of " + to_string(key) + " and " + to_string(r.key));
    }
  }
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.row_id < b.row_id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].row_id == records[i - 1].row_id) {
      fail("txmodel.DuplicateRowId", "row " + std::to_string(records[i].row_id));
    }
  }

  Transaction txn;
  txn.key_ = key;
  txn.records_ = std::move(records);

  std::size_t headers = 0;
  for (std::size_t i = 0; i < txn.records_.size(); ++i) {
    const auto& r = txn.records_[i];
    if (r.qualifier == RecordQualifier::kHeader) {
      ++headers;
      txn.header_index_ = i;
      if (r.parent_row_id) fail("txmodel.BadParent", "header has a parent");
    }
  }
  if (headers == 0) fail("txmodel.NoHeader", "transaction " + to_string(key));
  if (headers > 1) fail("txmodel.MultipleHeaders", "transaction " + to_string(key));

  for (const auto& r : txn.records_) {
    if (r.qualifier == RecordQualifier::kHeader) continue;
    if (!r.parent_row_id || txn.find(*r.parent_row_id) == nullptr) {
      fail("txmodel.DanglingParent",
           fmt::format("row {} references missing parent {}", r.row_id,
                       r.parent_row_id ? std::to_string(*r.parent_row_id) : "<none>"));
    }
  }

  // Every chain must reach the header within size() steps.
  const RowId root = txn.header().row_id;
  for (const auto& r : txn.records_) {
    RowId current = r.row_id;
    std::size_t steps = 0;
    while (current != root) {
      if (++steps > txn.records_.size()) {
        fail("txmodel.CycleDetected", "row " + std::to_string(r.row_id));
      }
      current = *txn.find(current)->parent_row_id;
    }
  }

  for (const auto& r : txn.records_) {
    if (r.qualifier == RecordQualifier::kHeader) continue;
    const auto parent = txn.find(*r.parent_row_id)->qualifier;
    const auto expected = r.qualifier == RecordQualifier::kItemDiscount
                              ? RecordQualifier::kItem
                              : RecordQualifier::kHeader;
    if (parent != expected) {
      fail("txmodel.BadParent",
           fmt::format("{} row {} must hang off {}, not {}", to_string(r.qualifier),
                       r.row_id, to_string(expected), to_string(parent)));
    }
  }
  return txn;
}

const TransactionRecord* Transaction::find(RowId row_id) const {
  const auto it = std::lower_bound(
      records_.begin(), records_.end(), row_id,
      [](const TransactionRecord& r, RowId id) { return r.row_id < id; });
  return it != records_.end() && it->row_id == row_id ? &*it : nullptr;
}

const TransactionRecord& Transaction::record(RowId row_id) const {
  const auto* r = find(row_id);
  if (r == nullptr) {
    fail("txmodel.UnknownRow", fmt::format("row {} not in {}", row_id, to_string(key_)));
  }
  return *r;
}

std::vector<const TransactionRecord*> Transaction::records_of(RecordQualifier q) const {
  std::vector<const TransactionRecord*> out;
  for (const auto& r : records_) {
    if (r.qualifier == q) out.push_back(&r);
  }
  return out;
}

std::vector<const TransactionRecord*> Transaction::children(RowId row_id) const {
  std::vector<const TransactionRecord*> out;
  for (const auto& r : records_) {
    if (r.parent_row_id == row_id) out.push_back(&r);
  }
  return out;
}

std::size_t Transaction::item_count() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [](const auto& r) { return r.qualifier == RecordQualifier::kItem; }));
}

int Transaction::depth() const {
  int best = 0;
  const RowId root = header().row_id;
  for (const auto& r : records_) {
    int d = 0;
    for (RowId current = r.row_id; current != root; current = *find(current)->parent_row_id) {
      ++d;
    }
    best = std::max(best, d);
  }
  return best;
}

int Transaction::ordinal_of(RowId row_id) const {
  const auto& target = record(row_id);
  int ordinal = 0;
  for (const auto& r : records_) {
    if (r.qualifier != target.qualifier) continue;
    ++ordinal;
    if (r.row_id == row_id) return ordinal;
  }
  return ordinal;  // unreachable: target is in records_
}

int Transaction::tender_ordinal(RowId row_id) const {
  if (record(row_id).qualifier != RecordQualifier::kTender) {
    fail("txmodel.NotATender", fmt::format("row {} is {}", row_id,
                                           to_string(record(row_id).qualifier)));
  }
  return ordinal_of(row_id);
}

const TransactionRecord* Transaction::find_by_ordinal(RecordQualifier q, int ordinal) const {
  if (ordinal < 1) return nullptr;
  int seen = 0;
  for (const auto& r : records_) {
    if (r.qualifier == q && ++seen == ordinal) return &r;
  }
  return nullptr;
}

FieldValue Transaction::get_field(RowId row_id, std::string_view field) const {
  const auto& attrs = record(row_id).attributes;
  const auto it = attrs.find(field);
  return it == attrs.end() ? FieldValue(Missing{}) : it->second;
}

Transaction Transaction::with_field(RowId row_id, std::string_view field,
                                    FieldValue value) const {
  const auto index = static_cast<std::size_t>(&record(row_id) - records_.data());
  Transaction copy = *this;
  auto& attrs = copy.records_[index].attributes;
  if (is_missing(value)) {
    if (const auto it = attrs.find(field); it != attrs.end()) attrs.erase(it);
  } else {
    attrs.insert_or_assign(std::string(field), std::move(value));
  }
  return copy;
}

void check_vocabularies(const Transaction& txn, const VocabularyMap& vocabularies) {
  for (const auto& r : txn.records()) {
    for (const auto& [name, value] : r.attributes) {
      const auto* code = std::get_if<Code>(&value);
      if (code == nullptr) continue;
      const auto vocab = vocabularies.find(code->vocabulary);
      if (vocab == vocabularies.end()) {
        fail("txmodel.UnknownVocabulary", code->vocabulary + " (field " + name + ")");
      }
      if (std::find(vocab->second.begin(), vocab->second.end(), code->value) ==
          vocab->second.end()) {
        fail("txmodel.UnknownCode",
             fmt::format("{} not in {} (row {}, field {})", code->value,
                         code->vocabulary, r.row_id, name));
      }
    }
  }
}

}  // namespace txfix
