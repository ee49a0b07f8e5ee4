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


// Random forest for multi-label error detection by binary relevance: one
// binary forest per label, all labels sharing the same bootstrap schedule.

#ifndef TXFIX_FOREST_HPP_
#define TXFIX_FOREST_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "txfix/features.hpp"
#include "txfix/metrics.hpp"
#include "txfix/tree.hpp"

namespace txfix {

enum class ForestMode { kPerLabel, kJoint };

std::string_view to_string(ForestMode m);
// "per-label" | "joint". Throws learn.BadParams.
ForestMode parse_forest_mode(std::string_view text);

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree;
  nlohmann::json to_json() const;
  static ForestParams from_json(const nlohmann::json& j);
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

class ForestModel {
 public:
  // Trains on the TRAIN rows of a detection dataset. Tree t draws its
  // bootstrap sample from mix_seed(seed, t); the tree for label L grows
  // with mix_seed(mix_seed(seed, t), L + 1). PER_LABEL takes exactly one
  // label id. Throws learn.EmptyData, learn.BadParams.
  static ForestModel train(const Dataset& ds, ForestMode mode, std::vector<int> label_ids,
                           const ForestParams& params, std::uint64_t seed);

  // Mean over trees of the leaf positive fraction, one entry per label in
  // label_ids() order. Throws learn.FingerprintMismatch.
  std::vector<double> predict_proba(const FeatureVector& x) const;
  std::vector<double> predict_proba(std::span<const double> x) const;
  // Threshold at `threshold` (0.5 by default).
  Labels predict(std::span<const double> x, double threshold = 0.5) const;

  ForestMode mode() const { return mode_; }
  const std::vector<int>& label_ids() const { return label_ids_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  const ForestParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& schema_fingerprint() const { return schema_fingerprint_; }
  const std::string& taxonomy_fingerprint() const { return taxonomy_fingerprint_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<DecisionTree>& trees(std::size_t label) const { return trees_[label]; }

  // Appends a copy of tree `t` for every label.
  void duplicate_tree(std::size_t t);

  std::string serialize() const;
  // Throws learn.PayloadCorrupt.
  static ForestModel deserialize(std::string_view bytes);

 private:
  ForestMode mode_ = ForestMode::kPerLabel;
  std::vector<int> label_ids_;
  std::vector<std::string> label_names_;
  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::string schema_fingerprint_;
  std::string taxonomy_fingerprint_;
  std::size_t feature_count_ = 0;
  std::vector<std::vector<DecisionTree>> trees_;  // [label][tree]
};

// Evaluates on the rows of `split`; truth is the rows' labels restricted to
// the model's label ids.
EvaluationReport evaluate_forest(const ForestModel& model, const Dataset& ds, Split split);

}  // namespace txfix

#endif  // TXFIX_FOREST_HPP_
