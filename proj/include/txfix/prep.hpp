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

// Qualification filter and field normalization ahead of feature extraction.

#ifndef TXFIX_PREP_HPP_
#define TXFIX_PREP_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "txfix/txmodel.hpp"

namespace txfix {

struct FieldRef {
  RecordQualifier qualifier = RecordQualifier::kHeader;
  std::string field;

  // "ITEM.QUANTITY"
  static FieldRef parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const FieldRef&, const FieldRef&) = default;
};

// Config keys (JSON object, every key optional):
//   max_items               integer >= 1, default 20
//   required_fields         ["QUALIFIER.FIELD", ...]
//   consistency_checks      subset of ["totals_reconcile", "tenders_cover_total"]
//   optional_numeric_fields ["QUALIFIER.FIELD", ...] imputed as 0 by normalize()
struct FilterPolicy {
  std::size_t max_items = 20;
  std::vector<FieldRef> required_fields;
  std::vector<std::string> consistency_checks;
  std::vector<FieldRef> optional_numeric_fields;

  static FilterPolicy defaults();
  // Missing keys take the defaults. Throws prep.BadPolicy.
  static FilterPolicy from_json(const nlohmann::json& j);
  static FilterPolicy load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct Rejection {
  std::string code;    // TooManyItems, MissingField, Inconsistent
  std::string detail;  // "ITEM, QUANTITY", "totals_reconcile: ..."
  // "MissingField(ITEM, QUANTITY)"
  std::string to_string() const;
};

struct QualifyResult {
  std::vector<Rejection> reasons;
  bool accepted() const { return reasons.empty(); }
};

// Lists every failed reason. Totals are checked to within one minor
// currency unit (0.01):
//   totals_reconcile     TOTAL_AMOUNT = sum(item EXTENDED_AMOUNT)
//                        - sum(DISCOUNT_AMOUNT) + sum(TAX_AMOUNT)
//   tenders_cover_total  sum(TENDER_AMOUNT) = TOTAL_AMOUNT
QualifyResult qualify(const Transaction& txn, const FilterPolicy& policy);

// Codes trimmed and upper-cased; Text fields named *_DATE canonicalized to
// YYYY-MM-DD and *_TIMESTAMP to YYYY-MM-DDTHH:MM:SSZ; missing optional
// numeric fields set to 0 with a "<FIELD>_IMPUTED" = 1 marker. Idempotent.
// Throws prep.UnparseableValue.
Transaction normalize(const Transaction& txn, const FilterPolicy& policy = FilterPolicy::defaults());

// Accepts YYYY-MM-DD, YYYY/MM/DD, YYYYMMDD and DD.MM.YYYY.
std::string canonical_date(std::string_view text);

}  // namespace txfix

#endif  // TXFIX_PREP_HPP_
