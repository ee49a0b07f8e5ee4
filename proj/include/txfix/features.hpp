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

// Fixed-length encoding of transactions, label and target derivation from
// change histories, and stratified dataset assembly.
//
// Vector layout: txn_features in order, then max_item_slots blocks of
// item_slot_features. Items fill slots in row_id order; unused slots are
// all zero. Categorical features hold 1 + the code's position in its
// vocabulary, 0 for missing or unknown codes.

#ifndef TXFIX_FEATURES_HPP_
#define TXFIX_FEATURES_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "txfix/logstore.hpp"
#include "txfix/prep.hpp"
#include "txfix/txmodel.hpp"

namespace txfix {

// Either a field read (qualifier.field of the ordinal-th record with that
// qualifier; for slot features the slot item or its record) or a named
// derived feature.
struct FeatureDescriptor {
  std::string name;
  std::optional<FieldRef> field;
  std::string derived;
  int ordinal = 1;
  std::string vocabulary;  // non-empty: categorical

  nlohmann::json to_json() const;
  static FeatureDescriptor from_json(const nlohmann::json& j);
  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

struct ColumnInfo {
  std::string name;
  // Number of codes for categorical columns (values 0..cardinality), 0 for
  // numeric ones.
  std::uint32_t cardinality = 0;
  friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

class FeatureSchema {
 public:
  int version = 1;
  std::size_t max_item_slots = 20;
  VocabularyMap vocabularies;
  // entry method -> tender types it can produce
  std::map<std::string, std::vector<std::string>, std::less<>> tender_rules;
  std::vector<double> amount_bands;  // ascending thresholds
  std::vector<FeatureDescriptor> txn_features;
  std::vector<FeatureDescriptor> item_slot_features;

  // Transaction-level layout used for detection: tender type, entry method
  // and amount for three tenders, header fields, derived features, and six
  // features per item slot.
  static FeatureSchema detection_default();
  // Same transaction-level block plus tender amount bands, with item slots
  // reduced to presence and extended amount.
  static FeatureSchema correction_default();

  // Throws features.BadSchema.
  static FeatureSchema from_json(const nlohmann::json& j);
  static FeatureSchema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // SHA-256 of the canonical JSON text.
  std::string fingerprint() const;
  std::size_t vector_length() const {
    return txn_features.size() + max_item_slots * item_slot_features.size();
  }
  std::vector<ColumnInfo> columns() const;
};

struct FeatureVector {
  std::string schema_fingerprint;
  std::vector<double> values;
};

struct ErrorClass {
  int id = 0;
  std::string name;
  FieldRef target;
  int ordinal = 1;
  std::string value_domain;  // vocabulary name, or "numeric"
  friend bool operator==(const ErrorClass&, const ErrorClass&) = default;
};

class ErrorTaxonomy {
 public:
  std::vector<ErrorClass> classes;
  VocabularyMap vocabularies;

  // tender1..tender3 on TENDER.TENDER_TYPE_CODE.
  static ErrorTaxonomy defaults();
  // Throws features.BadTaxonomy.
  static ErrorTaxonomy from_json(const nlohmann::json& j);
  static ErrorTaxonomy load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  std::string fingerprint() const;

  std::size_t size() const { return classes.size(); }
  // Throws features.UnknownClass.
  const ErrorClass& by_id(int id) const;
  const ErrorClass& by_name(std::string_view name) const;
  // Values of a class's vocabulary domain. Throws features.BadTaxonomy for
  // numeric or undeclared domains.
  const std::vector<std::string>& domain(const ErrorClass& c) const;
};

struct LabelVector {
  std::string taxonomy_fingerprint;
  std::vector<std::uint8_t> bits;
};

struct LabelDerivation {
  LabelVector labels;
  std::vector<ChangeLogEntry> uncovered;
};

// Throws features.TooManyItems, features.SchemaMismatch.
FeatureVector extract(const Transaction& txn, const FeatureSchema& schema);

// True iff `entry` is a FIELD_CHANGED on the record and field targeted by
// `c` within `txn`.
bool targets_class(const ChangeLogEntry& entry, const Transaction& txn, const ErrorClass& c);

LabelDerivation derive_detection_labels(std::span<const ChangeLogEntry> history,
                                        const Transaction& txn,
                                        const ErrorTaxonomy& taxonomy);

// Throws features.ValueOutsideDomain.
int derive_correction_target(const ChangeLogEntry& entry, const ErrorClass& c,
                             const ErrorTaxonomy& taxonomy);

enum class Split : std::uint8_t { kTrain = 0, kTest = 1, kValidation = 2 };

std::string_view to_string(Split s);
// "train", "test", "validation". Throws features.BadSplit.
Split parse_split(std::string_view text);

struct SplitRatios {
  double train = 0.7;
  double test = 0.15;
  double validation = 0.15;
  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

enum class DatasetKind : std::uint8_t { kDetection = 0, kCorrection = 1 };

struct DatasetRow {
  TransactionKey key;
  Split split = Split::kTrain;
  std::vector<double> features;
  std::vector<std::uint8_t> labels;  // detection
  int target = -1;                   // correction: domain index
  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct Dataset {
  DatasetKind kind = DatasetKind::kDetection;
  std::string schema_fingerprint;
  std::string taxonomy_fingerprint;
  std::vector<ColumnInfo> columns;
  std::vector<std::string> label_names;    // detection: class names
  int class_id = -1;                       // correction
  std::vector<std::string> target_domain;  // correction
  SplitRatios ratios;
  std::uint64_t seed = 0;
  std::vector<DatasetRow> rows;

  std::vector<const DatasetRow*> rows_in(Split s) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Stratified assignment: rows are grouped by `strata`, shuffled within each
// group with `seed`, and dealt to the split whose count is furthest below
// its ratio. Totals match the ratios to within one row per split.
// Throws features.BadRatios.
std::vector<Split> assign_splits(std::span<const std::string> strata, const SplitRatios& ratios,
                                 std::uint64_t seed);

struct DatasetOptions {
  SplitRatios ratios;
  std::uint64_t seed = 0;
  FilterPolicy policy = FilterPolicy::defaults();
};

// Throws features.InsufficientData, features.BadRatios.
Dataset build_detection_dataset(const LogStore& store, const FeatureSchema& schema,
                                const ErrorTaxonomy& taxonomy, const DatasetOptions& options);
Dataset build_correction_dataset(const LogStore& store, const FeatureSchema& schema,
                                 const ErrorTaxonomy& taxonomy, int class_id,
                                 const DatasetOptions& options);

}  // namespace txfix

#endif  // TXFIX_FEATURES_HPP_
