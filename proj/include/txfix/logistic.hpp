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


// One-vs-rest L2-regularized logistic regression over a class's value
// domain, with the penalty chosen by k-fold cross-validation.
//
// Scores are independent per-class sigmoids and are not normalized across
// classes; only their order is meaningful.

#ifndef TXFIX_LOGISTIC_HPP_
#define TXFIX_LOGISTIC_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "txfix/features.hpp"
#include "txfix/metrics.hpp"

namespace txfix {

struct LogisticParams {
  std::vector<double> penalties = {0.001, 0.01, 0.1, 1.0, 10.0};
  std::size_t folds = 5;
  std::size_t max_iterations = 10000;
  double tolerance = 1e-6;  // on the gradient max-norm
  double initial_step = 1.0;

  nlohmann::json to_json() const;
  static LogisticParams from_json(const nlohmann::json& j);
};

// Mean over rows of softplus(z) - y*z plus lambda/2 * |w[1:]|^2, where
// z = w[0] + x.w[1:]. Writes the gradient when `grad` is non-null.
double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double lambda, Eigen::VectorXd* grad);

struct FitResult {
  Eigen::VectorXd weights;
  std::size_t iterations = 0;
  bool converged = false;
};

// Gradient descent from `start`: step halves whenever a step fails to lower
// the objective; stops at gradient max-norm < tolerance or max_iterations.
FitResult fit_binary_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                              const LogisticParams& params, Eigen::VectorXd start);

// One-hot expansion of categorical columns (cardinality + 1 indicators,
// out-of-range codes map to all zeros); numeric columns pass through.
std::size_t expanded_width(std::span<const ColumnInfo> columns);
void expand_row(std::span<const double> x, std::span<const ColumnInfo> columns,
                Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out);

struct Recommendation {
  int index = 0;
  std::string value;
  double score = 0.0;
};

class OvrLogisticModel {
 public:
  // Trains on the TRAIN rows of a correction dataset. Throws
  // learn.SingleClass, learn.EmptyData, learn.BadParams.
  static OvrLogisticModel train(const Dataset& ds, const LogisticParams& params,
                                std::uint64_t seed);

  // Sigmoid score per domain value. Throws learn.FingerprintMismatch.
  Eigen::VectorXd scores(const FeatureVector& x) const;
  Eigen::VectorXd scores(std::span<const double> x) const;
  // Top k by descending score, ties by ascending index. Throws
  // learn.KOutOfRange, learn.FingerprintMismatch.
  std::vector<Recommendation> recommend(const FeatureVector& x, std::size_t k) const;
  std::vector<Recommendation> recommend(std::span<const double> x, std::size_t k) const;
  std::vector<int> ranking(std::span<const double> x) const;

  std::size_t class_count() const { return domain_.size(); }
  int class_id() const { return class_id_; }
  const std::vector<std::string>& domain() const { return domain_; }
  double penalty() const { return penalty_; }
  bool converged() const { return converged_; }
  const std::vector<double>& cv_accuracy() const { return cv_accuracy_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& stddevs() const { return stddevs_; }
  std::uint64_t seed() const { return seed_; }
  const LogisticParams& params() const { return params_; }
  const std::string& schema_fingerprint() const { return schema_fingerprint_; }
  const std::string& taxonomy_fingerprint() const { return taxonomy_fingerprint_; }

  std::string serialize() const;
  // Throws learn.PayloadCorrupt.
  static OvrLogisticModel deserialize(std::string_view bytes);

 private:
  int class_id_ = -1;
  std::vector<std::string> domain_;
  std::vector<ColumnInfo> columns_;
  LogisticParams params_;
  double penalty_ = 0.0;
  std::vector<double> cv_accuracy_;  // per candidate penalty
  bool converged_ = false;
  std::uint64_t seed_ = 0;
  std::string schema_fingerprint_;
  std::string taxonomy_fingerprint_;
  Eigen::VectorXd means_;
  Eigen::VectorXd stddevs_;
  Eigen::MatrixXd weights_;  // K x (p + 1), bias in column 0
};

EvaluationReport evaluate_logistic(const OvrLogisticModel& model, const Dataset& ds, Split split);

}  // namespace txfix

#endif  // TXFIX_LOGISTIC_HPP_
