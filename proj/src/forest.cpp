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


#include "txfix/forest.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/error.hpp"
#include "txfix/rng.hpp"

namespace txfix {
namespace {

constexpr std::string_view kMagic{"TXFIXRF\0", 8};
constexpr std::uint32_t kPayloadVersion = 1;

}  // namespace

std::string_view to_string(ForestMode m) { return m == ForestMode::kJoint ? "joint" : "per-label"; }

ForestMode parse_forest_mode(std::string_view text) {
  if (text == "per-label") return ForestMode::kPerLabel;
  if (text == "joint") return ForestMode::kJoint;
  fail("learn.BadParams", "mode must be per-label or joint: " + std::string(text));
}

nlohmann::json ForestParams::to_json() const {
  return {{"n_trees", n_trees},
          {"max_depth", tree.max_depth},
          {"min_leaf", tree.min_leaf},
          {"feature_subset_size", tree.feature_subset_size}};
}

ForestParams ForestParams::from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_trees = j.value("n_trees", p.n_trees);
  p.tree.max_depth = j.value("max_depth", p.tree.max_depth);
  p.tree.min_leaf = j.value("min_leaf", p.tree.min_leaf);
  p.tree.feature_subset_size = j.value("feature_subset_size", p.tree.feature_subset_size);
  return p;
}

ForestModel ForestModel::train(const Dataset& ds, ForestMode mode, std::vector<int> label_ids,
                               const ForestParams& params, std::uint64_t seed) {
  if (ds.kind != DatasetKind::kDetection) fail("learn.BadParams", "forest needs a detection dataset");
  if (params.n_trees < 1) fail("learn.BadParams", "n_trees must be >= 1");
  if (label_ids.empty()) fail("learn.BadParams", "no labels selected");
  if (mode == ForestMode::kPerLabel && label_ids.size() != 1) {
    fail("learn.BadParams", "per-label mode takes exactly one label");
  }
  for (const int id : label_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= ds.label_names.size()) {
      fail("learn.BadParams", fmt::format("label id {} out of range", id));
    }
  }
  const auto train_rows = ds.rows_in(Split::kTrain);
  if (train_rows.empty()) fail("learn.EmptyData", "dataset has no TRAIN rows");

  ColumnTable x(train_rows.size(), ds.columns.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    for (std::size_t j = 0; j < ds.columns.size(); ++j) x.at(i, j) = train_rows[i]->features[j];
  }
  std::vector<std::vector<int>> y(label_ids.size(), std::vector<int>(train_rows.size()));
  for (std::size_t l = 0; l < label_ids.size(); ++l) {
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      y[l][i] = train_rows[i]->labels[static_cast<std::size_t>(label_ids[l])] != 0 ? 1 : 0;
    }
  }

  ForestModel m;
  m.mode_ = mode;
  m.label_ids_ = std::move(label_ids);
  for (const int id : m.label_ids_) m.label_names_.push_back(ds.label_names[static_cast<std::size_t>(id)]);
  m.params_ = params;
  m.seed_ = seed;
  m.schema_fingerprint_ = ds.schema_fingerprint;
  m.taxonomy_fingerprint_ = ds.taxonomy_fingerprint;
  m.feature_count_ = ds.columns.size();
  m.trees_.resize(m.label_ids_.size());

  const std::size_t n = train_rows.size();
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = mix_seed(seed, t);
    Rng rng(tree_seed);
    for (auto& s : sample) s = rng.uniform_index(n);
    for (std::size_t l = 0; l < m.label_ids_.size(); ++l) {
      const auto growth_seed = mix_seed(tree_seed, static_cast<std::uint64_t>(m.label_ids_[l]) + 1);
      m.trees_[l].push_back(DecisionTree::train(x, y[l], 2, sample, params.tree, growth_seed));
    }
  }
  return m;
}

std::vector<double> ForestModel::predict_proba(const FeatureVector& x) const {
  if (x.schema_fingerprint != schema_fingerprint_) {
    fail("learn.FingerprintMismatch",
         fmt::format("vector schema {} differs from model schema {}", x.schema_fingerprint,
                     schema_fingerprint_));
  }
  return predict_proba(std::span<const double>(x.values));
}

std::vector<double> ForestModel::predict_proba(std::span<const double> x) const {
  if (x.size() != feature_count_) {
    fail("learn.FingerprintMismatch",
         fmt::format("vector length {} differs from model length {}", x.size(), feature_count_));
  }
  std::vector<double> out;
  out.reserve(trees_.size());
  for (const auto& forest : trees_) {
    double sum = 0.0;
    for (const auto& tree : forest) sum += tree.class_fraction(x, 1);
    out.push_back(sum / static_cast<double>(forest.size()));
  }
  return out;
}

Labels ForestModel::predict(std::span<const double> x, double threshold) const {
  Labels out;
  for (const double p : predict_proba(x)) out.push_back(p >= threshold ? 1 : 0);
  return out;
}

void ForestModel::duplicate_tree(std::size_t t) {
  for (auto& forest : trees_) forest.push_back(forest.at(t));
}

std::string ForestModel::serialize() const {
  const nlohmann::json header = {{"mode", to_string(mode_)},
                                 {"label_ids", label_ids_},
                                 {"label_names", label_names_},
                                 {"params", params_.to_json()},
                                 {"seed", seed_},
                                 {"schema_fingerprint", schema_fingerprint_},
                                 {"taxonomy_fingerprint", taxonomy_fingerprint_},
                                 {"feature_count", feature_count_}};
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kPayloadVersion);
  w.blob(header.dump());
  w.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const auto& forest : trees_) {
    w.u32(static_cast<std::uint32_t>(forest.size()));
    for (const auto& tree : forest) tree.serialize(w);
  }
  return w.take();
}

ForestModel ForestModel::deserialize(std::string_view bytes) {
  ByteReader in(bytes, "learn.PayloadCorrupt");
  if (in.bytes(kMagic.size()) != kMagic) fail("learn.PayloadCorrupt", "not a forest payload");
  if (in.u32() != kPayloadVersion) fail("learn.PayloadCorrupt", "unsupported forest payload version");
  ForestModel m;
  try {
    const auto h = nlohmann::json::parse(in.blob());
    m.mode_ = parse_forest_mode(h.at("mode").get<std::string>());
    m.label_ids_ = h.at("label_ids").get<std::vector<int>>();
    m.label_names_ = h.at("label_names").get<std::vector<std::string>>();
    m.params_ = ForestParams::from_json(h.at("params"));
    m.seed_ = h.at("seed").get<std::uint64_t>();
    m.schema_fingerprint_ = h.at("schema_fingerprint").get<std::string>();
    m.taxonomy_fingerprint_ = h.at("taxonomy_fingerprint").get<std::string>();
    m.feature_count_ = h.at("feature_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail("learn.PayloadCorrupt", std::string("bad forest header: ") + e.what());
  }
  const auto labels = in.u32();
  if (labels != m.label_ids_.size()) fail("learn.PayloadCorrupt", "label count mismatch");
  m.trees_.resize(labels);
  for (auto& forest : m.trees_) {
    const auto n = in.u32();
    if (n == 0) fail("learn.PayloadCorrupt", "empty forest");
    for (std::uint32_t t = 0; t < n; ++t) {
      forest.push_back(DecisionTree::deserialize(in));
      for (const auto& node : forest.back().nodes()) {
        if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= m.feature_count_) {
          fail("learn.PayloadCorrupt", "split feature out of range");
        }
      }
    }
  }
  if (!in.done()) fail("learn.PayloadCorrupt", "trailing bytes");
  return m;
}

EvaluationReport evaluate_forest(const ForestModel& model, const Dataset& ds, Split split) {
  if (ds.schema_fingerprint != model.schema_fingerprint()) {
    fail("learn.FingerprintMismatch", "dataset schema differs from model schema");
  }
  std::vector<Labels> pred, truth;
  for (const auto* row : ds.rows_in(split)) {
    pred.push_back(model.predict(row->features));
    Labels t;
    for (const int id : model.label_ids()) t.push_back(row->labels[static_cast<std::size_t>(id)]);
    truth.push_back(std::move(t));
  }
  auto report = evaluate_detection(pred, truth, model.label_names());
  report.split = std::string(to_string(split));
  return report;
}

}  // namespace txfix
