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

#include "txfix/prep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "txfix/error.hpp"
#include "txfix/fields.hpp"

namespace txfix {
namespace {

constexpr std::int64_t kMinorUnit4 = 100;  // 0.01 at scale 4

const std::set<std::string, std::less<>> kKnownChecks = {"totals_reconcile",
                                                         "tenders_cover_total"};

std::int64_t units_or_zero(const FieldValue& v) {
  const auto* d = std::get_if<Decimal>(&v);
  return d == nullptr ? 0 : d->units4();
}

std::int64_t sum_field(const Transaction& txn, RecordQualifier q, std::string_view field) {
  std::int64_t total = 0;
  for (const auto* r : txn.records_of(q)) total += units_or_zero(txn.get_field(r->row_id, field));
  return total;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string trim_upper(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string canonical_timestamp(std::string_view text) {
  const auto t = trim(text);
  std::string candidate = t;
  // "YYYY-MM-DD HH:MM:SS" and "...SS+00:00" variants.
  if (candidate.size() == 19 && (candidate[10] == ' ' || candidate[10] == 'T')) {
    candidate[10] = 'T';
    candidate += 'Z';
  } else if (candidate.size() == 25 && ends_with(candidate, "+00:00")) {
    candidate = candidate.substr(0, 19) + "Z";
    candidate[10] = 'T';
  }
  if (candidate.size() >= 10) {
    try {
      candidate = canonical_date(candidate.substr(0, 10)) + candidate.substr(10);
      return format_timestamp(parse_timestamp(candidate));
    } catch (const Error&) {
    }
  }
  fail("prep.UnparseableValue", "timestamp: " + std::string(text));
}

std::vector<FieldRef> parse_refs(const nlohmann::json& j, const char* key) {
  std::vector<FieldRef> out;
  if (!j.is_array()) fail("prep.BadPolicy", std::string(key) + " must be an array");
  for (const auto& item : j) out.push_back(FieldRef::parse(item.get<std::string>()));
  return out;
}

}  // namespace

FieldRef FieldRef::parse(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot + 1 == text.size()) {
    fail("prep.BadPolicy", "expected QUALIFIER.FIELD: " + std::string(text));
  }
  return {parse_qualifier(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

std::string FieldRef::to_string() const {
  return fmt::format("{}.{}", txfix::to_string(qualifier), field);
}

FilterPolicy FilterPolicy::defaults() {
  using Q = RecordQualifier;
  FilterPolicy p;
  p.required_fields = {
      {Q::kHeader, std::string(fields::kTotalAmount)},
      {Q::kItem, std::string(fields::kProductCode)},
      {Q::kItem, std::string(fields::kQuantity)},
      {Q::kItem, std::string(fields::kUnitPrice)},
      {Q::kItem, std::string(fields::kExtendedAmount)},
      {Q::kTender, std::string(fields::kTenderTypeCode)},
      {Q::kTender, std::string(fields::kTenderAmount)},
  };
  p.consistency_checks = {"totals_reconcile", "tenders_cover_total"};
  p.optional_numeric_fields = {
      {Q::kItemDiscount, std::string(fields::kDiscountAmount)},
      {Q::kTxnDiscount, std::string(fields::kDiscountAmount)},
      {Q::kTax, std::string(fields::kTaxAmount)},
  };
  return p;
}

FilterPolicy FilterPolicy::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("prep.BadPolicy", "policy must be a JSON object");
  FilterPolicy p = defaults();
  try {
    if (j.contains("max_items")) {
      const auto n = j.at("max_items").get<std::int64_t>();
      if (n < 1) fail("prep.BadPolicy", "max_items must be >= 1");
      p.max_items = static_cast<std::size_t>(n);
    }
    if (j.contains("required_fields")) p.required_fields = parse_refs(j.at("required_fields"), "required_fields");
    if (j.contains("optional_numeric_fields")) {
      p.optional_numeric_fields = parse_refs(j.at("optional_numeric_fields"), "optional_numeric_fields");
    }
    if (j.contains("consistency_checks")) {
      p.consistency_checks = j.at("consistency_checks").get<std::vector<std::string>>();
      for (const auto& name : p.consistency_checks) {
        if (!kKnownChecks.contains(name)) fail("prep.BadPolicy", "unknown consistency check " + name);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail("prep.BadPolicy", e.what());
  }
  return p;
}

FilterPolicy FilterPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("prep.BadPolicy", "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail("prep.BadPolicy", path.string() + ": " + e.what());
  }
}

nlohmann::json FilterPolicy::to_json() const {
  auto refs = [](const std::vector<FieldRef>& v) {
    std::vector<std::string> out;
    for (const auto& r : v) out.push_back(r.to_string());
    return out;
  };
  return {{"max_items", max_items},
          {"required_fields", refs(required_fields)},
          {"consistency_checks", consistency_checks},
          {"optional_numeric_fields", refs(optional_numeric_fields)}};
}

std::string Rejection::to_string() const {
  return detail.empty() ? code : fmt::format("{}({})", code, detail);
}

QualifyResult qualify(const Transaction& txn, const FilterPolicy& policy) {
  using Q = RecordQualifier;
  QualifyResult result;
  const auto items = txn.item_count();
  if (items > policy.max_items) {
    result.reasons.push_back({"TooManyItems", fmt::format("{} > {}", items, policy.max_items)});
  }
  for (const auto& ref : policy.required_fields) {
    for (const auto* r : txn.records_of(ref.qualifier)) {
      if (is_missing(txn.get_field(r->row_id, ref.field))) {
        result.reasons.push_back(
            {"MissingField", fmt::format("{}, {}", to_string(ref.qualifier), ref.field)});
        break;
      }
    }
  }
  const std::int64_t total = units_or_zero(txn.get_field(txn.header().row_id, fields::kTotalAmount));
  for (const auto& check : policy.consistency_checks) {
    if (check == "totals_reconcile") {
      const std::int64_t expected = sum_field(txn, Q::kItem, fields::kExtendedAmount) -
                                    sum_field(txn, Q::kItemDiscount, fields::kDiscountAmount) -
                                    sum_field(txn, Q::kTxnDiscount, fields::kDiscountAmount) +
                                    sum_field(txn, Q::kTax, fields::kTaxAmount);
      if (std::abs(expected - total) > kMinorUnit4) {
        result.reasons.push_back(
            {"Inconsistent", fmt::format("totals_reconcile: total {} vs computed {}",
                                         Decimal(total, 4).to_string(),
                                         Decimal(expected, 4).to_string())});
      }
    } else if (check == "tenders_cover_total") {
      const std::int64_t tendered = sum_field(txn, Q::kTender, fields::kTenderAmount);
      if (std::abs(tendered - total) > kMinorUnit4) {
        result.reasons.push_back(
            {"Inconsistent", fmt::format("tenders_cover_total: tendered {} vs total {}",
                                         Decimal(tendered, 4).to_string(),
                                         Decimal(total, 4).to_string())});
      }
    }
  }
  return result;
}

std::string canonical_date(std::string_view text) {
  const auto t = trim(text);
  std::string iso;
  if (t.size() == 10 && (t[4] == '-' || t[4] == '/') && t[7] == t[4]) {
    iso = t.substr(0, 4) + "-" + t.substr(5, 2) + "-" + t.substr(8, 2);
  } else if (t.size() == 8 && all_digits(t)) {
    iso = t.substr(0, 4) + "-" + t.substr(4, 2) + "-" + t.substr(6, 2);
  } else if (t.size() == 10 && t[2] == '.' && t[5] == '.') {
    iso = t.substr(6, 4) + "-" + t.substr(3, 2) + "-" + t.substr(0, 2);
  } else {
    fail("prep.UnparseableValue", "date: " + std::string(text));
  }
  try {
    return format_date(parse_date(iso));
  } catch (const Error&) {
    fail("prep.UnparseableValue", "date: " + std::string(text));
  }
}

Transaction normalize(const Transaction& txn, const FilterPolicy& policy) {
  Transaction out = txn;
  for (const auto& r : txn.records()) {
    for (const auto& [name, value] : r.attributes) {
      FieldValue normalized = value;
      if (const auto* code = std::get_if<Code>(&value)) {
        normalized = Code{code->vocabulary, trim_upper(code->value)};
      } else if (const auto* text = std::get_if<Text>(&value)) {
        if (ends_with(name, "_DATE")) {
          normalized = Text{canonical_date(text->value)};
        } else if (ends_with(name, "_TIMESTAMP")) {
          normalized = Text{canonical_timestamp(text->value)};
        }
      }
      if (normalized != value) out = out.with_field(r.row_id, name, std::move(normalized));
    }
  }
  for (const auto& ref : policy.optional_numeric_fields) {
    for (const auto* r : txn.records_of(ref.qualifier)) {
      if (!is_missing(out.get_field(r->row_id, ref.field))) continue;
      out = out.with_field(r->row_id, ref.field, Decimal(0, 2));
      out = out.with_field(r->row_id, ref.field + std::string(fields::kImputedSuffix),
                           Decimal(1, 0));
    }
  }
  return out;
}

}  // namespace txfix
