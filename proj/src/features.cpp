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

#include "txfix/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "txfix/error.hpp"
#include "txfix/fields.hpp"
#include "txfix/hash.hpp"
#include "txfix/replay.hpp"
#include "txfix/rng.hpp"

namespace txfix {
namespace {

using Q = RecordQualifier;

const std::set<std::string, std::less<>> kTxnDerived = {
    "item_count",        "tender_count",           "total_discount_ratio",
    "mean_unit_price",   "tax_to_total_ratio",     "tender_method_conflicts",
    "tender_amount_band"};
const std::set<std::string, std::less<>> kSlotDerived = {"slot_presence", "slot_discount_total"};

constexpr std::size_t kMinClassSamples = 10;

double number_of(const FieldValue& v) {
  const auto* d = std::get_if<Decimal>(&v);
  return d == nullptr ? 0.0 : d->to_double();
}

std::string code_text(const FieldValue& v) {
  if (const auto* c = std::get_if<Code>(&v)) return c->value;
  if (const auto* t = std::get_if<Text>(&v)) return t->value;
  return {};
}

double sum_of(const Transaction& txn, Q q, std::string_view field) {
  double total = 0.0;
  for (const auto* r : txn.records_of(q)) total += number_of(txn.get_field(r->row_id, field));
  return total;
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double encode_categorical(const FieldValue& v, const FeatureDescriptor& d,
                          const FeatureSchema& schema) {
  if (is_missing(v)) return 0.0;
  if (const auto* c = std::get_if<Code>(&v); c != nullptr && c->vocabulary != d.vocabulary) {
    fail("features.SchemaMismatch",
         fmt::format("feature {} expects vocabulary {}, got {}", d.name, d.vocabulary,
                     c->vocabulary));
  }
  if (std::holds_alternative<Decimal>(v)) {
    fail("features.SchemaMismatch", "feature " + d.name + " is categorical but value is numeric");
  }
  const auto& vocab = schema.vocabularies.find(d.vocabulary)->second;
  const auto it = std::find(vocab.begin(), vocab.end(), code_text(v));
  return it == vocab.end() ? 0.0 : static_cast<double>(it - vocab.begin() + 1);
}

double encode_value(const FieldValue& v, const FeatureDescriptor& d, const FeatureSchema& schema) {
  if (!d.vocabulary.empty()) return encode_categorical(v, d, schema);
  if (std::holds_alternative<Code>(v) || std::holds_alternative<Text>(v)) {
    fail("features.SchemaMismatch", "feature " + d.name + " is numeric but value is a code");
  }
  return number_of(v);
}

int tender_method_conflicts(const Transaction& txn, const FeatureSchema& schema) {
  int conflicts = 0;
  for (const auto* t : txn.records_of(Q::kTender)) {
    const auto method = code_text(txn.get_field(t->row_id, fields::kEntryMethod));
    const auto rule = schema.tender_rules.find(method);
    if (rule == schema.tender_rules.end()) continue;
    const auto type = code_text(txn.get_field(t->row_id, fields::kTenderTypeCode));
    if (std::find(rule->second.begin(), rule->second.end(), type) == rule->second.end()) {
      ++conflicts;
    }
  }
  return conflicts;
}

double txn_derived(const Transaction& txn, const FeatureDescriptor& d,
                   const FeatureSchema& schema) {
  const double total = number_of(txn.get_field(txn.header().row_id, fields::kTotalAmount));
  if (d.derived == "item_count") return static_cast<double>(txn.item_count());
  if (d.derived == "tender_count") return static_cast<double>(txn.records_of(Q::kTender).size());
  if (d.derived == "total_discount_ratio") {
    return ratio(sum_of(txn, Q::kItemDiscount, fields::kDiscountAmount) +
                     sum_of(txn, Q::kTxnDiscount, fields::kDiscountAmount),
                 total);
  }
  if (d.derived == "mean_unit_price") {
    const auto items = txn.item_count();
    return items == 0 ? 0.0 : sum_of(txn, Q::kItem, fields::kUnitPrice) / static_cast<double>(items);
  }
  if (d.derived == "tax_to_total_ratio") return ratio(sum_of(txn, Q::kTax, fields::kTaxAmount), total);
  if (d.derived == "tender_method_conflicts") return tender_method_conflicts(txn, schema);
  // tender_amount_band
  const auto* tender = txn.find_by_ordinal(Q::kTender, d.ordinal);
  if (tender == nullptr) return 0.0;
  const double amount = number_of(txn.get_field(tender->row_id, fields::kTenderAmount));
  const auto band = std::upper_bound(schema.amount_bands.begin(), schema.amount_bands.end(), amount) -
                    schema.amount_bands.begin();
  return static_cast<double>(band + 1);
}

std::vector<ErrorClass> parse_classes(const nlohmann::json& j) {
  std::vector<ErrorClass> out;
  for (const auto& c : j) {
    ErrorClass ec;
    ec.id = c.at("id").get<int>();
    ec.name = c.at("name").get<std::string>();
    ec.target = FieldRef::parse(c.at("target").get<std::string>());
    ec.ordinal = c.value("ordinal", 1);
    ec.value_domain = c.at("value_domain").get<std::string>();
    out.push_back(std::move(ec));
  }
  return out;
}

VocabularyMap parse_vocabularies(const nlohmann::json& j) {
  VocabularyMap out;
  for (const auto& [name, values] : j.items()) {
    out.emplace(name, values.get<std::vector<std::string>>());
  }
  return out;
}

nlohmann::json vocabularies_json(const VocabularyMap& vocabularies) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, values] : vocabularies) out[name] = values;
  return out;
}

nlohmann::json load_json(const std::filesystem::path& path, const char* error_code) {
  std::ifstream in(path);
  if (!in) fail(error_code, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(error_code, path.string() + ": " + e.what());
  }
}

FeatureDescriptor field_feature(std::string name, Q q, std::string_view field, int ordinal = 1,
                                std::string vocabulary = {}) {
  FeatureDescriptor d;
  d.name = std::move(name);
  d.field = FieldRef{q, std::string(field)};
  d.ordinal = ordinal;
  d.vocabulary = std::move(vocabulary);
  return d;
}

FeatureDescriptor derived_feature(std::string name, std::string derived, int ordinal = 1) {
  FeatureDescriptor d;
  d.name = std::move(name);
  d.derived = std::move(derived);
  d.ordinal = ordinal;
  return d;
}

FeatureSchema base_schema() {
  FeatureSchema s;
  s.vocabularies["tender_type"] = {"CASH", "CREDIT", "DEBIT", "GIFT", "VOUCHER"};
  s.vocabularies["entry_method"] = {"DRAWER", "CHIP", "SWIPE", "SCAN", "KEYED"};
  s.vocabularies["transaction_type"] = {"SALE", "RETURN"};
  auto& products = s.vocabularies["product"];
  for (int i = 1; i <= 200; ++i) products.push_back(fmt::format("P{:03d}", i));
  s.tender_rules = {{"DRAWER", {"CASH"}},
                    {"CHIP", {"CREDIT", "DEBIT"}},
                    {"SWIPE", {"CREDIT", "DEBIT", "GIFT"}},
                    {"SCAN", {"GIFT", "VOUCHER"}},
                    {"KEYED", {"VOUCHER", "CREDIT"}}};
  s.amount_bands = {20.0, 40.0, 100.0};

  s.txn_features.push_back(
      field_feature("txn_type", Q::kHeader, fields::kTransactionType, 1, "transaction_type"));
  s.txn_features.push_back(field_feature("total_amount", Q::kHeader, fields::kTotalAmount));
  for (int k = 1; k <= 3; ++k) {
    s.txn_features.push_back(field_feature(fmt::format("tender{}_type", k), Q::kTender,
                                           fields::kTenderTypeCode, k, "tender_type"));
    s.txn_features.push_back(field_feature(fmt::format("tender{}_method", k), Q::kTender,
                                           fields::kEntryMethod, k, "entry_method"));
    s.txn_features.push_back(
        field_feature(fmt::format("tender{}_amount", k), Q::kTender, fields::kTenderAmount, k));
  }
  for (const char* name : {"item_count", "tender_count", "total_discount_ratio", "mean_unit_price",
                           "tax_to_total_ratio", "tender_method_conflicts"}) {
    s.txn_features.push_back(derived_feature(name, name));
  }
  return s;
}

}  // namespace

nlohmann::json FeatureDescriptor::to_json() const {
  nlohmann::json j = {{"name", name}, {"ordinal", ordinal}};
  if (field) j["field"] = field->to_string();
  if (!derived.empty()) j["derived"] = derived;
  if (!vocabulary.empty()) j["vocabulary"] = vocabulary;
  return j;
}

FeatureDescriptor FeatureDescriptor::from_json(const nlohmann::json& j) {
  FeatureDescriptor d;
  d.name = j.at("name").get<std::string>();
  d.ordinal = j.value("ordinal", 1);
  if (j.contains("field")) d.field = FieldRef::parse(j.at("field").get<std::string>());
  d.derived = j.value("derived", std::string());
  d.vocabulary = j.value("vocabulary", std::string());
  return d;
}

FeatureSchema FeatureSchema::detection_default() {
  FeatureSchema s = base_schema();
  s.item_slot_features = {
      derived_feature("present", "slot_presence"),
      field_feature("product", Q::kItem, fields::kProductCode, 1, "product"),
      field_feature("quantity", Q::kItem, fields::kQuantity),
      field_feature("unit_price", Q::kItem, fields::kUnitPrice),
      field_feature("extended_amount", Q::kItem, fields::kExtendedAmount),
      derived_feature("discount_total", "slot_discount_total"),
  };
  return s;
}

FeatureSchema FeatureSchema::correction_default() {
  FeatureSchema s = base_schema();
  for (int k = 1; k <= 3; ++k) {
    s.txn_features.push_back(
        derived_feature(fmt::format("tender{}_band", k), "tender_amount_band", k));
  }
  s.item_slot_features = {
      derived_feature("present", "slot_presence"),
      field_feature("extended_amount", Q::kItem, fields::kExtendedAmount),
  };
  return s;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  FeatureSchema s;
  try {
    s.version = j.at("version").get<int>();
    s.max_item_slots = j.at("max_item_slots").get<std::size_t>();
    s.vocabularies = parse_vocabularies(j.at("vocabularies"));
    const auto rules = j.value("tender_rules", nlohmann::json::object());
    for (const auto& [method, types] : rules.items()) {
      s.tender_rules.emplace(method, types.get<std::vector<std::string>>());
    }
    s.amount_bands = j.value("amount_bands", std::vector<double>{});
    for (const auto& d : j.at("txn_features")) s.txn_features.push_back(FeatureDescriptor::from_json(d));
    for (const auto& d : j.at("item_slot_features")) {
      s.item_slot_features.push_back(FeatureDescriptor::from_json(d));
    }
  } catch (const nlohmann::json::exception& e) {
    fail("features.BadSchema", e.what());
  }
  if (!std::is_sorted(s.amount_bands.begin(), s.amount_bands.end())) {
    fail("features.BadSchema", "amount_bands must be ascending");
  }
  auto check = [&](const FeatureDescriptor& d, bool slot) {
    if (d.field.has_value() == !d.derived.empty()) {
      fail("features.BadSchema", "feature " + d.name + " needs exactly one of field, derived");
    }
    if (d.ordinal < 1) fail("features.BadSchema", "feature " + d.name + " ordinal must be >= 1");
    if (!d.derived.empty() && !(slot ? kSlotDerived : kTxnDerived).contains(d.derived)) {
      fail("features.BadSchema", "unknown derived feature " + d.derived);
    }
    if (slot && d.field && d.field->qualifier != Q::kItem) {
      fail("features.BadSchema", "slot feature " + d.name + " must read an ITEM field");
    }
    if (!d.vocabulary.empty() && !s.vocabularies.contains(d.vocabulary)) {
      fail("features.BadSchema", "undeclared vocabulary " + d.vocabulary);
    }
  };
  for (const auto& d : s.txn_features) check(d, false);
  for (const auto& d : s.item_slot_features) check(d, true);
  return s;
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  return from_json(load_json(path, "features.BadSchema"));
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json txn = nlohmann::json::array();
  for (const auto& d : txn_features) txn.push_back(d.to_json());
  nlohmann::json slot = nlohmann::json::array();
  for (const auto& d : item_slot_features) slot.push_back(d.to_json());
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& [method, types] : tender_rules) rules[method] = types;
  return {{"version", version},
          {"max_item_slots", max_item_slots},
          {"vocabularies", vocabularies_json(vocabularies)},
          {"tender_rules", rules},
          {"amount_bands", amount_bands},
          {"txn_features", txn},
          {"item_slot_features", slot}};
}

std::string FeatureSchema::fingerprint() const { return sha256_hex(to_json().dump()); }

std::vector<ColumnInfo> FeatureSchema::columns() const {
  auto cardinality = [&](const FeatureDescriptor& d) -> std::uint32_t {
    if (!d.vocabulary.empty()) {
      return static_cast<std::uint32_t>(vocabularies.find(d.vocabulary)->second.size());
    }
    if (d.derived == "tender_amount_band") return static_cast<std::uint32_t>(amount_bands.size() + 1);
    return 0;
  };
  std::vector<ColumnInfo> out;
  for (const auto& d : txn_features) out.push_back({d.name, cardinality(d)});
  for (std::size_t k = 1; k <= max_item_slots; ++k) {
    for (const auto& d : item_slot_features) {
      out.push_back({fmt::format("item{}_{}", k, d.name), cardinality(d)});
    }
  }
  return out;
}

ErrorTaxonomy ErrorTaxonomy::defaults() {
  ErrorTaxonomy t;
  t.vocabularies["tender_type"] = {"CASH", "CREDIT", "DEBIT", "GIFT", "VOUCHER"};
  for (int k = 1; k <= 3; ++k) {
    t.classes.push_back({k - 1, fmt::format("tender{}", k),
                         FieldRef{Q::kTender, std::string(fields::kTenderTypeCode)}, k,
                         "tender_type"});
  }
  return t;
}

ErrorTaxonomy ErrorTaxonomy::from_json(const nlohmann::json& j) {
  ErrorTaxonomy t;
  try {
    t.classes = parse_classes(j.at("classes"));
    t.vocabularies = parse_vocabularies(j.value("vocabularies", nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    fail("features.BadTaxonomy", e.what());
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    const auto& c = t.classes[i];
    if (c.id != static_cast<int>(i)) fail("features.BadTaxonomy", "class ids must be dense from 0");
    if (c.ordinal < 1) fail("features.BadTaxonomy", "class " + c.name + " ordinal must be >= 1");
    if (!names.insert(c.name).second) fail("features.BadTaxonomy", "duplicate class " + c.name);
    if (c.value_domain != "numeric" && !t.vocabularies.contains(c.value_domain)) {
      fail("features.BadTaxonomy", "undeclared value domain " + c.value_domain);
    }
  }
  return t;
}

ErrorTaxonomy ErrorTaxonomy::load(const std::filesystem::path& path) {
  return from_json(load_json(path, "features.BadTaxonomy"));
}

nlohmann::json ErrorTaxonomy::to_json() const {
  nlohmann::json classes_json = nlohmann::json::array();
  for (const auto& c : classes) {
    classes_json.push_back({{"id", c.id},
                            {"name", c.name},
                            {"target", c.target.to_string()},
                            {"ordinal", c.ordinal},
                            {"value_domain", c.value_domain}});
  }
  return {{"classes", classes_json}, {"vocabularies", vocabularies_json(vocabularies)}};
}

std::string ErrorTaxonomy::fingerprint() const { return sha256_hex(to_json().dump()); }

const ErrorClass& ErrorTaxonomy::by_id(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= classes.size()) {
    fail("features.UnknownClass", fmt::format("no error class with id {}", id));
  }
  return classes[static_cast<std::size_t>(id)];
}

const ErrorClass& ErrorTaxonomy::by_name(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) return c;
  }
  fail("features.UnknownClass", "no error class named " + std::string(name));
}

const std::vector<std::string>& ErrorTaxonomy::domain(const ErrorClass& c) const {
  const auto it = vocabularies.find(c.value_domain);
  if (it == vocabularies.end()) {
    fail("features.BadTaxonomy", "class " + c.name + " has no vocabulary domain");
  }
  return it->second;
}

FeatureVector extract(const Transaction& txn, const FeatureSchema& schema) {
  const auto items = txn.records_of(Q::kItem);
  if (items.size() > schema.max_item_slots) {
    fail("features.TooManyItems",
         fmt::format("{} items, schema has {} slots", items.size(), schema.max_item_slots));
  }
  FeatureVector fv;
  fv.schema_fingerprint = schema.fingerprint();
  fv.values.assign(schema.vector_length(), 0.0);
  std::size_t pos = 0;
  for (const auto& d : schema.txn_features) {
    if (d.field) {
      const auto* r = txn.find_by_ordinal(d.field->qualifier, d.ordinal);
      fv.values[pos] = r == nullptr ? 0.0 : encode_value(txn.get_field(r->row_id, d.field->field), d, schema);
    } else {
      fv.values[pos] = txn_derived(txn, d, schema);
    }
    ++pos;
  }
  const std::size_t block = schema.item_slot_features.size();
  for (std::size_t slot = 0; slot < items.size(); ++slot) {
    const auto* item = items[slot];
    for (std::size_t f = 0; f < block; ++f) {
      const auto& d = schema.item_slot_features[f];
      double value = 0.0;
      if (d.field) {
        value = encode_value(txn.get_field(item->row_id, d.field->field), d, schema);
      } else if (d.derived == "slot_presence") {
        value = 1.0;
      } else {
        for (const auto* child : txn.children(item->row_id)) {
          if (child->qualifier == Q::kItemDiscount) {
            value += number_of(txn.get_field(child->row_id, fields::kDiscountAmount));
          }
        }
      }
      fv.values[pos + slot * block + f] = value;
    }
  }
  return fv;
}

bool targets_class(const ChangeLogEntry& entry, const Transaction& txn, const ErrorClass& c) {
  const auto* change = entry.change();
  if (change == nullptr || change->field_name != c.target.field) return false;
  const auto* record = txn.find(change->row_id);
  return record != nullptr && record->qualifier == c.target.qualifier &&
         txn.ordinal_of(change->row_id) == c.ordinal;
}

LabelDerivation derive_detection_labels(std::span<const ChangeLogEntry> history,
                                        const Transaction& txn,
                                        const ErrorTaxonomy& taxonomy) {
  LabelDerivation out;
  out.labels.taxonomy_fingerprint = taxonomy.fingerprint();
  out.labels.bits.assign(taxonomy.size(), 0);
  for (const auto& entry : history) {
    if (entry.change() == nullptr) continue;
    bool covered = false;
    for (const auto& c : taxonomy.classes) {
      if (targets_class(entry, txn, c)) {
        out.labels.bits[static_cast<std::size_t>(c.id)] = 1;
        covered = true;
      }
    }
    if (!covered) out.uncovered.push_back(entry);
  }
  return out;
}

int derive_correction_target(const ChangeLogEntry& entry, const ErrorClass& c,
                             const ErrorTaxonomy& taxonomy) {
  const auto* change = entry.change();
  if (change == nullptr || change->field_name != c.target.field) {
    fail("features.ValueOutsideDomain", "entry does not change " + c.target.to_string());
  }
  const auto& domain = taxonomy.domain(c);
  const auto value = code_text(change->new_value);
  const auto it = std::find(domain.begin(), domain.end(), value);
  if (value.empty() || it == domain.end()) {
    fail("features.ValueOutsideDomain",
         fmt::format("{} is not in {}", display(change->new_value), c.value_domain));
  }
  return static_cast<int>(it - domain.begin());
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kValidation: return "validation";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  if (text == "validation") return Split::kValidation;
  fail("features.BadSplit", "expected train, test or validation: " + std::string(text));
}

std::vector<const DatasetRow*> Dataset::rows_in(Split s) const {
  std::vector<const DatasetRow*> out;
  for (const auto& r : rows) {
    if (r.split == s) out.push_back(&r);
  }
  return out;
}

std::vector<Split> assign_splits(std::span<const std::string> strata, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  const double r[3] = {ratios.train, ratios.test, ratios.validation};
  if (r[0] < 0 || r[1] < 0 || r[2] < 0 || std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    fail("features.BadRatios",
         fmt::format("ratios {}/{}/{} must be non-negative and sum to 1", r[0], r[1], r[2]));
  }
  std::map<std::string_view, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> order;
  order.reserve(strata.size());
  for (auto& [name, members] : groups) {
    rng.shuffle(std::span<std::size_t>(members));
    order.insert(order.end(), members.begin(), members.end());
  }

  std::vector<Split> out(strata.size(), Split::kTrain);
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t t = 0; t < order.size(); ++t) {
    int best = 0;
    double best_deficit = -1e300;
    for (int s = 0; s < 3; ++s) {
      if (r[s] == 0.0) continue;
      const double deficit = r[s] * static_cast<double>(t + 1) - static_cast<double>(counts[s]);
      if (deficit > best_deficit + 1e-9) {
        best = s;
        best_deficit = deficit;
      }
    }
    ++counts[best];
    out[order[t]] = static_cast<Split>(best);
  }
  return out;
}

namespace {

struct Sample {
  TransactionKey key;
  std::vector<double> features;
  std::vector<std::uint8_t> labels;
  int target = -1;
};

// Qualified, normalized encoding, or nullopt when prep rejects the
// transaction.
std::optional<std::vector<double>> encode_if_qualified(const Transaction& txn,
                                                       const FeatureSchema& schema,
                                                       const FilterPolicy& policy) {
  if (!qualify(txn, policy).accepted()) return std::nullopt;
  const auto normalized = normalize(txn, policy);
  if (normalized.item_count() > schema.max_item_slots) return std::nullopt;
  return extract(normalized, schema).values;
}

void downsample(std::vector<Sample>& samples, std::size_t keep, std::uint64_t seed) {
  if (samples.size() <= keep) return;
  Rng rng(seed);
  rng.shuffle(std::span<Sample>(samples));
  samples.resize(keep);
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.key < b.key; });
}

Dataset finish(Dataset ds, std::vector<Sample> samples, const std::vector<std::string>& strata) {
  const auto splits = assign_splits(strata, ds.ratios, mix_seed(ds.seed, 2));
  ds.rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ds.rows.push_back({samples[i].key, splits[i], std::move(samples[i].features),
                       std::move(samples[i].labels), samples[i].target});
  }
  return ds;
}

}  // namespace

Dataset build_detection_dataset(const LogStore& store, const FeatureSchema& schema,
                                const ErrorTaxonomy& taxonomy, const DatasetOptions& options) {
  std::vector<Sample> erroneous;
  for (const auto& ct : store.corrected_transactions()) {
    const auto result = reconstruct(ct.transaction, ct.history);
    if (!result.skipped.empty()) continue;
    auto derivation = derive_detection_labels(ct.history, ct.transaction, taxonomy);
    if (std::none_of(derivation.labels.bits.begin(), derivation.labels.bits.end(),
                     [](std::uint8_t b) { return b != 0; })) {
      continue;
    }
    auto values = encode_if_qualified(result.erroneous, schema, options.policy);
    if (!values) continue;
    erroneous.push_back({ct.transaction.key(), std::move(*values),
                         std::move(derivation.labels.bits), -1});
  }

  if (erroneous.size() < kMinClassSamples) {
    fail("features.InsufficientData",
         fmt::format("{} erroneous samples, need at least {}", erroneous.size(), kMinClassSamples));
  }
  for (std::size_t c = 0; c < taxonomy.size(); ++c) {
    const auto positives = std::count_if(erroneous.begin(), erroneous.end(),
                                         [c](const Sample& s) { return s.labels[c] != 0; });
    if (positives > 0 && static_cast<std::size_t>(positives) < kMinClassSamples) {
      fail("features.InsufficientData",
           fmt::format("class {} has {} samples, need at least {}", taxonomy.classes[c].name,
                       positives, kMinClassSamples));
    }
  }

  std::vector<Sample> clean;
  for (const auto& txn : store.clean_transactions()) {
    auto values = encode_if_qualified(txn, schema, options.policy);
    if (!values) continue;
    clean.push_back({txn.key(), std::move(*values), std::vector<std::uint8_t>(taxonomy.size(), 0), -1});
  }
  downsample(clean, erroneous.size(), mix_seed(options.seed, 1));

  std::vector<Sample> samples = std::move(erroneous);
  samples.insert(samples.end(), std::make_move_iterator(clean.begin()),
                 std::make_move_iterator(clean.end()));
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.key < b.key; });

  std::vector<std::string> strata;
  for (const auto& s : samples) {
    std::string bits;
    for (const auto b : s.labels) bits.push_back(b != 0 ? '1' : '0');
    strata.push_back(std::move(bits));
  }

  Dataset ds;
  ds.kind = DatasetKind::kDetection;
  ds.schema_fingerprint = schema.fingerprint();
  ds.taxonomy_fingerprint = taxonomy.fingerprint();
  ds.columns = schema.columns();
  for (const auto& c : taxonomy.classes) ds.label_names.push_back(c.name);
  ds.ratios = options.ratios;
  ds.seed = options.seed;
  return finish(std::move(ds), std::move(samples), strata);
}

Dataset build_correction_dataset(const LogStore& store, const FeatureSchema& schema,
                                 const ErrorTaxonomy& taxonomy, int class_id,
                                 const DatasetOptions& options) {
  const auto& cls = taxonomy.by_id(class_id);
  const auto& domain = taxonomy.domain(cls);

  std::vector<Sample> samples;
  for (const auto& ct : store.corrected_transactions()) {
    const auto result = reconstruct(ct.transaction, ct.history);
    if (!result.skipped.empty()) continue;
    const ChangeLogEntry* last = nullptr;
    for (const auto& entry : result.applied) {
      if (targets_class(entry, ct.transaction, cls)) last = &entry;
    }
    if (last == nullptr) continue;
    int target = -1;
    try {
      target = derive_correction_target(*last, cls, taxonomy);
    } catch (const Error& e) {
      if (e.code() != "features.ValueOutsideDomain") throw;
      continue;
    }
    auto values = encode_if_qualified(result.erroneous, schema, options.policy);
    if (!values) continue;
    samples.push_back({ct.transaction.key(), std::move(*values), {}, target});
  }
  if (samples.size() < kMinClassSamples) {
    fail("features.InsufficientData",
         fmt::format("class {} has {} correction samples, need at least {}", cls.name,
                     samples.size(), kMinClassSamples));
  }

  std::map<int, std::vector<Sample>> by_target;
  for (auto& s : samples) by_target[s.target].push_back(std::move(s));
  std::vector<std::size_t> counts;
  for (const auto& [t, group] : by_target) counts.push_back(group.size());
  std::sort(counts.begin(), counts.end());
  const std::size_t n = counts.size();
  const double median = n % 2 == 1 ? static_cast<double>(counts[n / 2])
                                   : 0.5 * static_cast<double>(counts[n / 2 - 1] + counts[n / 2]);
  const auto cap = static_cast<std::size_t>(std::floor(3.0 * median));
  samples.clear();
  for (auto& [t, group] : by_target) {
    downsample(group, cap, mix_seed(options.seed, 16 + static_cast<std::uint64_t>(t)));
    samples.insert(samples.end(), std::make_move_iterator(group.begin()),
                   std::make_move_iterator(group.end()));
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.key < b.key; });

  std::vector<std::string> strata;
  for (const auto& s : samples) strata.push_back(std::to_string(s.target));

  Dataset ds;
  ds.kind = DatasetKind::kCorrection;
  ds.schema_fingerprint = schema.fingerprint();
  ds.taxonomy_fingerprint = taxonomy.fingerprint();
  ds.columns = schema.columns();
  ds.class_id = class_id;
  ds.label_names = {cls.name};
  ds.target_domain = domain;
  ds.ratios = options.ratios;
  ds.seed = options.seed;
  return finish(std::move(ds), std::move(samples), strata);
}

}  // namespace txfix
