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


#include "txfix/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "txfix/error.hpp"

namespace txfix {
namespace {

void check_paired(std::size_t a, std::size_t b) {
  if (a != b) fail("metrics.LengthMismatch", fmt::format("{} predictions, {} truths", a, b));
  if (a == 0) fail("metrics.EmptyInput", "no samples");
}

void check_width(const Labels& p, const Labels& t) {
  if (p.size() != t.size()) {
    fail("metrics.LengthMismatch", fmt::format("label widths {} and {}", p.size(), t.size()));
  }
}

}  // namespace

double precision(std::uint64_t tp, std::uint64_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall(std::uint64_t tp, std::uint64_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double subset_accuracy(std::span<const Labels> pred, std::span<const Labels> truth) {
  check_paired(pred.size(), truth.size());
  std::size_t exact = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    check_width(pred[i], truth[i]);
    exact += pred[i] == truth[i] ? 1 : 0;
  }
  return static_cast<double>(exact) / static_cast<double>(pred.size());
}

double jaccard_score(std::span<const Labels> pred, std::span<const Labels> truth) {
  check_paired(pred.size(), truth.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    check_width(pred[i], truth[i]);
    std::size_t inter = 0, uni = 0;
    for (std::size_t j = 0; j < pred[i].size(); ++j) {
      const bool p = pred[i][j] != 0, t = truth[i][j] != 0;
      inter += p && t;
      uni += p || t;
    }
    sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return sum / static_cast<double>(pred.size());
}

double accuracy_at_k(std::span<const std::vector<int>> rankings, std::span<const int> truth,
                     std::size_t k) {
  check_paired(rankings.size(), truth.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (k < 1 || k > rankings[i].size()) {
      fail("metrics.KOutOfRange", fmt::format("k={} with ranking length {}", k, rankings[i].size()));
    }
    const auto end = rankings[i].begin() + static_cast<std::ptrdiff_t>(k);
    hits += std::find(rankings[i].begin(), end, truth[i]) != end ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

EvaluationReport evaluate_detection(std::span<const Labels> pred, std::span<const Labels> truth,
                                    std::span<const std::string> label_names) {
  EvaluationReport report;
  report.model_kind = "detection";
  report.subset_accuracy = subset_accuracy(pred, truth);
  report.jaccard = jaccard_score(pred, truth);
  report.sample_count = pred.size();
  for (std::size_t j = 0; j < label_names.size(); ++j) {
    LabelConfusion c;
    c.label = label_names[j];
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (j >= pred[i].size()) fail("metrics.LengthMismatch", "label name count exceeds width");
      const bool p = pred[i][j] != 0, t = truth[i][j] != 0;
      if (p && t) ++c.tp;
      if (p && !t) ++c.fp;
      if (!p && t) ++c.fn;
      if (!p && !t) ++c.tn;
    }
    c.precision = precision(c.tp, c.fp);
    c.recall = recall(c.tp, c.fn);
    report.labels.push_back(std::move(c));
  }
  return report;
}

EvaluationReport evaluate_correction(std::span<const std::vector<int>> rankings,
                                     std::span<const int> truth) {
  check_paired(rankings.size(), truth.size());
  EvaluationReport report;
  report.model_kind = "correction";
  report.sample_count = rankings.size();
  std::size_t shortest = rankings.front().size();
  for (const auto& r : rankings) shortest = std::min(shortest, r.size());
  for (std::size_t k = 1; k <= std::min<std::size_t>(5, shortest); ++k) {
    report.accuracy_at_k.push_back(accuracy_at_k(rankings, truth, k));
  }
  report.subset_accuracy = report.accuracy_at_k.empty() ? 0.0 : report.accuracy_at_k.front();
  return report;
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json per_label = nlohmann::json::array();
  for (const auto& c : labels) {
    per_label.push_back({{"label", c.label},
                         {"tp", c.tp},
                         {"fp", c.fp},
                         {"fn", c.fn},
                         {"tn", c.tn},
                         {"precision", c.precision},
                         {"recall", c.recall}});
  }
  return {{"model_kind", model_kind},       {"split", split},
          {"sample_count", sample_count},   {"labels", per_label},
          {"subset_accuracy", subset_accuracy}, {"jaccard", jaccard},
          {"accuracy_at_k", accuracy_at_k}};
}

EvaluationReport EvaluationReport::from_json(const nlohmann::json& j) {
  EvaluationReport r;
  try {
    r.model_kind = j.at("model_kind").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.sample_count = j.at("sample_count").get<std::uint64_t>();
    for (const auto& c : j.at("labels")) {
      r.labels.push_back({c.at("label").get<std::string>(), c.at("tp").get<std::uint64_t>(),
                          c.at("fp").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>(),
                          c.at("tn").get<std::uint64_t>(), c.at("precision").get<double>(),
                          c.at("recall").get<double>()});
    }
    r.subset_accuracy = j.at("subset_accuracy").get<double>();
    r.jaccard = j.at("jaccard").get<double>();
    r.accuracy_at_k = j.at("accuracy_at_k").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail("metrics.BadReport", e.what());
  }
  return r;
}

}  // namespace txfix
