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


// Evaluation metrics for detection (multi-label) and correction (ranked
// value) models.
//
// Conventions: precision and recall are 1.0 when their denominator is 0.
// A sample whose true and predicted label sets are both empty has Jaccard
// score 1.0.

#ifndef TXFIX_METRICS_HPP_
#define TXFIX_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace txfix {

using Labels = std::vector<std::uint8_t>;

double precision(std::uint64_t tp, std::uint64_t fp);
double recall(std::uint64_t tp, std::uint64_t fn);

// Throws metrics.LengthMismatch, metrics.EmptyInput.
double subset_accuracy(std::span<const Labels> pred, std::span<const Labels> truth);
double jaccard_score(std::span<const Labels> pred, std::span<const Labels> truth);

// Throws metrics.KOutOfRange (k < 1 or k greater than a ranking's length),
// metrics.LengthMismatch, metrics.EmptyInput.
double accuracy_at_k(std::span<const std::vector<int>> rankings, std::span<const int> truth,
                     std::size_t k);

struct LabelConfusion {
  std::string label;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvaluationReport {
  std::string model_kind;  // "detection" | "correction"
  std::string split;
  std::uint64_t sample_count = 0;
  std::vector<LabelConfusion> labels;  // detection
  double subset_accuracy = 0.0;        // detection; correction: acc@1
  double jaccard = 0.0;                // detection
  std::vector<double> accuracy_at_k;   // correction: k = 1..min(5, K)

  nlohmann::json to_json() const;
  static EvaluationReport from_json(const nlohmann::json& j);
};

EvaluationReport evaluate_detection(std::span<const Labels> pred, std::span<const Labels> truth,
                                    std::span<const std::string> label_names);
EvaluationReport evaluate_correction(std::span<const std::vector<int>> rankings,
                                     std::span<const int> truth);

}  // namespace txfix

#endif  // TXFIX_METRICS_HPP_
