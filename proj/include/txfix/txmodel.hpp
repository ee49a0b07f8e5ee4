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

// In-memory model of a retail transaction: a validated tree of typed
// records rooted at the header.

#ifndef TXFIX_TXMODEL_HPP_
#define TXFIX_TXMODEL_HPP_

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "txfix/field_value.hpp"

namespace txfix {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DD". Throws txmodel.BadDate.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);
// "YYYY-MM-DDTHH:MM:SSZ" (UTC). Throws txmodel.BadTimestamp.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

// Identity of a transaction within a log store. Orders field by field,
// which for the canonical text forms is also byte order of the fields.
struct TransactionKey {
  std::uint32_t store_number = 0;
  Date business_date{};
  std::uint64_t transaction_index = 0;
  Timestamp timestamp{};

  friend bool operator==(const TransactionKey&, const TransactionKey&) = default;
  friend std::strong_ordering operator<=>(const TransactionKey& a,
                                          const TransactionKey& b);
};

// "store|date|index|timestamp"
std::string to_string(const TransactionKey& key);

enum class RecordQualifier { kHeader, kItem, kItemDiscount, kTxnDiscount, kTax, kTender };

std::string_view to_string(RecordQualifier q);
// Throws txmodel.UnknownQualifier; unknown qualifiers are never skipped.
RecordQualifier parse_qualifier(std::string_view text);

using RowId = std::uint32_t;
using Attributes = std::map<std::string, FieldValue, std::less<>>;

struct TransactionRecord {
  TransactionKey key;
  RowId row_id = 0;
  RecordQualifier qualifier = RecordQualifier::kHeader;
  std::optional<RowId> parent_row_id;
  Attributes attributes;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

// Immutable once built; "mutation" returns a new value.
class Transaction {
 public:
  // Validates and canonicalizes (records sorted by row_id). Throws
  // txmodel.{EmptyTransaction, MixedKeys, DuplicateRowId, NoHeader,
  // MultipleHeaders, DanglingParent, CycleDetected, BadParent}.
  static Transaction build(std::vector<TransactionRecord> records);

  const TransactionKey& key() const { return key_; }
  std::span<const TransactionRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  const TransactionRecord& header() const { return records_[header_index_]; }
  const TransactionRecord* find(RowId row_id) const;
  // Throws txmodel.UnknownRow.
  const TransactionRecord& record(RowId row_id) const;

  // Records with qualifier q, ascending row_id.
  std::vector<const TransactionRecord*> records_of(RecordQualifier q) const;
  std::vector<const TransactionRecord*> children(RowId row_id) const;
  std::size_t item_count() const;

  // Edges on the longest root-to-leaf path (0 for a lone header).
  int depth() const;

  // 1-based position among TENDER records ordered by row_id.
  // Throws txmodel.UnknownRow, txmodel.NotATender.
  int tender_ordinal(RowId row_id) const;
  // Same notion for any qualifier.
  int ordinal_of(RowId row_id) const;
  const TransactionRecord* find_by_ordinal(RecordQualifier q, int ordinal) const;

  // Missing when the attribute is absent. Throws txmodel.UnknownRow.
  FieldValue get_field(RowId row_id, std::string_view field) const;
  // Setting Missing removes the attribute. Throws txmodel.UnknownRow.
  [[nodiscard]] Transaction with_field(RowId row_id, std::string_view field,
                                       FieldValue value) const;

  friend bool operator==(const Transaction& a, const Transaction& b) {
    return a.records_ == b.records_;
  }

 private:
  Transaction() = default;

  TransactionKey key_;
  std::vector<TransactionRecord> records_;
  std::size_t header_index_ = 0;
};

inline Transaction build_transaction(std::vector<TransactionRecord> records) {
  return Transaction::build(std::move(records));
}

// Throws txmodel.UnknownCode for a Code whose vocabulary is declared in
// `vocabularies` but does not contain the value, and txmodel.UnknownVocabulary
// for a Code naming an undeclared vocabulary.
void check_vocabularies(const Transaction& txn, const VocabularyMap& vocabularies);

}  // namespace txfix

#endif  // TXFIX_TXMODEL_HPP_
