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


#include "txfix/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/error.hpp"
#include "txfix/rng.hpp"

namespace txfix {
namespace {

constexpr std::string_view kMagic{"TXFIXLR\0", 8};
constexpr std::uint32_t kPayloadVersion = 1;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.sd.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
      s.sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  }
};

Eigen::MatrixXd expand_rows(const std::vector<const DatasetRow*>& rows,
                            std::span<const ColumnInfo> columns) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(expanded_width(columns)));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    expand_row(rows[i]->features, columns, out.row(static_cast<Eigen::Index>(i)));
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXd indicator(const std::vector<int>& targets, const std::vector<Eigen::Index>& idx,
                          int cls) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = targets[static_cast<std::size_t>(idx[i])] == cls ? 1.0 : 0.0;
  }
  return y;
}

int argmax_lowest(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace

nlohmann::json LogisticParams::to_json() const {
  return {{"penalties", penalties},
          {"folds", folds},
          {"max_iterations", max_iterations},
          {"tolerance", tolerance},
          {"initial_step", initial_step}};
}

LogisticParams LogisticParams::from_json(const nlohmann::json& j) {
  LogisticParams p;
  p.penalties = j.value("penalties", p.penalties);
  p.folds = j.value("folds", p.folds);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.tolerance = j.value("tolerance", p.tolerance);
  p.initial_step = j.value("initial_step", p.initial_step);
  return p;
}

double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double lambda, Eigen::VectorXd* grad) {
  const auto n = static_cast<double>(x.rows());
  const auto p = x.cols();
  const Eigen::VectorXd z = (x * w.tail(p)).array() + w(0);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
  loss /= n;
  loss += 0.5 * lambda * w.tail(p).squaredNorm();
  if (grad != nullptr) {
    Eigen::VectorXd r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = (sigmoid(z(i)) - y(i)) / n;
    grad->resize(p + 1);
    (*grad)(0) = r.sum();
    grad->tail(p) = x.transpose() * r + lambda * w.tail(p);
  }
  return loss;
}

FitResult fit_binary_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                              const LogisticParams& params, Eigen::VectorXd start) {
  FitResult result;
  result.weights = std::move(start);
  Eigen::VectorXd grad, next_grad;
  double loss = logistic_objective(x, y, result.weights, lambda, &grad);
  double step = params.initial_step;
  for (; result.iterations < params.max_iterations; ++result.iterations) {
    if (grad.cwiseAbs().maxCoeff() < params.tolerance) {
      result.converged = true;
      return result;
    }
    const Eigen::VectorXd next = result.weights - step * grad;
    const double next_loss = logistic_objective(x, y, next, lambda, &next_grad);
    if (next_loss < loss) {
      result.weights = next;
      loss = next_loss;
      grad.swap(next_grad);
    } else {
      step /= 2.0;
      if (step == 0.0) break;
    }
  }
  result.converged = grad.cwiseAbs().maxCoeff() < params.tolerance;
  return result;
}

std::size_t expanded_width(std::span<const ColumnInfo> columns) {
  std::size_t width = 0;
  for (const auto& c : columns) width += c.cardinality == 0 ? 1 : c.cardinality + 1;
  return width;
}

void expand_row(std::span<const double> x, std::span<const ColumnInfo> columns,
                Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  if (x.size() != columns.size()) {
    fail("learn.FingerprintMismatch",
         fmt::format("vector length {} differs from model length {}", x.size(), columns.size()));
  }
  out.setZero();
  Eigen::Index pos = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto card = columns[j].cardinality;
    if (card == 0) {
      out(pos++) = x[j];
      continue;
    }
    const double v = x[j];
    if (v >= 0.0 && v <= card && v == std::floor(v)) out(pos + static_cast<Eigen::Index>(v)) = 1.0;
    pos += card + 1;
  }
}

OvrLogisticModel OvrLogisticModel::train(const Dataset& ds, const LogisticParams& params,
                                         std::uint64_t seed) {
  if (ds.kind != DatasetKind::kCorrection) fail("learn.BadParams", "logistic needs a correction dataset");
  if (params.folds < 2) fail("learn.BadParams", "folds must be >= 2");
  if (params.penalties.empty()) fail("learn.BadParams", "no candidate penalties");
  const int K = static_cast<int>(ds.target_domain.size());
  if (K < 2) fail("learn.BadParams", "value domain needs at least 2 values");
  const auto rows = ds.rows_in(Split::kTrain);
  if (rows.empty()) fail("learn.EmptyData", "dataset has no TRAIN rows");
  std::vector<int> targets;
  for (const auto* r : rows) {
    if (r->target < 0 || r->target >= K) fail("learn.BadParams", "target outside the value domain");
    targets.push_back(r->target);
  }
  if (std::set<int>(targets.begin(), targets.end()).size() < 2) {
    fail("learn.SingleClass", "TRAIN rows have a single target value");
  }

  const Eigen::MatrixXd raw = expand_rows(rows, ds.columns);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = raw.cols();
  const std::size_t folds = std::min<std::size_t>(params.folds, rows.size());
  if (folds < 2) fail("learn.EmptyData", "too few TRAIN rows for cross-validation");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 3));
  rng.shuffle(std::span<Eigen::Index>(order));
  std::vector<std::vector<Eigen::Index>> fit_idx(folds), hold_idx(folds);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (std::size_t f = 0; f < folds; ++f) (pos % folds == f ? hold_idx : fit_idx)[f].push_back(order[pos]);
  }

  struct FoldData {
    Eigen::MatrixXd fit, hold;
    std::vector<Eigen::VectorXd> y;
    std::vector<Eigen::VectorXd> warm;
  };
  std::vector<FoldData> fold_data(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const Eigen::MatrixXd fit_raw = take_rows(raw, fit_idx[f]);
    const auto s = Standardizer::fit(fit_raw);
    fold_data[f].fit = s.apply(fit_raw);
    fold_data[f].hold = s.apply(take_rows(raw, hold_idx[f]));
    for (int k = 0; k < K; ++k) {
      fold_data[f].y.push_back(indicator(targets, fit_idx[f], k));
      fold_data[f].warm.push_back(Eigen::VectorXd::Zero(p + 1));
    }
  }

  std::vector<std::size_t> by_penalty(params.penalties.size());
  std::iota(by_penalty.begin(), by_penalty.end(), 0);
  std::stable_sort(by_penalty.begin(), by_penalty.end(), [&](std::size_t a, std::size_t b) {
    return params.penalties[a] > params.penalties[b];
  });

  OvrLogisticModel m;
  m.cv_accuracy_.assign(params.penalties.size(), 0.0);
  double best_accuracy = -1.0;
  for (const auto c : by_penalty) {
    const double lambda = params.penalties[c];
    std::size_t correct = 0, total = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      auto& fd = fold_data[f];
      Eigen::MatrixXd hold_scores(fd.hold.rows(), K);
      for (int k = 0; k < K; ++k) {
        auto fit = fit_binary_logistic(fd.fit, fd.y[static_cast<std::size_t>(k)], lambda, params,
                                       fd.warm[static_cast<std::size_t>(k)]);
        fd.warm[static_cast<std::size_t>(k)] = fit.weights;
        hold_scores.col(k) = (fd.hold * fit.weights.tail(p)).array() + fit.weights(0);
      }
      for (Eigen::Index i = 0; i < fd.hold.rows(); ++i) {
        const int predicted = argmax_lowest(hold_scores.row(i).transpose());
        correct += predicted == targets[static_cast<std::size_t>(hold_idx[f][static_cast<std::size_t>(i)])];
        ++total;
      }
    }
    m.cv_accuracy_[c] = static_cast<double>(correct) / static_cast<double>(total);
    if (m.cv_accuracy_[c] > best_accuracy) {
      best_accuracy = m.cv_accuracy_[c];
      m.penalty_ = lambda;
    }
  }

  const auto s = Standardizer::fit(raw);
  const Eigen::MatrixXd x = s.apply(raw);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  m.weights_.resize(K, p + 1);
  m.converged_ = true;
  for (int k = 0; k < K; ++k) {
    auto fit = fit_binary_logistic(x, indicator(targets, all, k), m.penalty_, params,
                                   Eigen::VectorXd::Zero(p + 1));
    m.converged_ = m.converged_ && fit.converged;
    m.weights_.row(k) = fit.weights.transpose();
  }
  m.class_id_ = ds.class_id;
  m.domain_ = ds.target_domain;
  m.columns_ = ds.columns;
  m.params_ = params;
  m.seed_ = seed;
  m.schema_fingerprint_ = ds.schema_fingerprint;
  m.taxonomy_fingerprint_ = ds.taxonomy_fingerprint;
  m.means_ = s.mean;
  m.stddevs_ = s.sd;
  return m;
}

Eigen::VectorXd OvrLogisticModel::scores(const FeatureVector& x) const {
  if (x.schema_fingerprint != schema_fingerprint_) {
    fail("learn.FingerprintMismatch",
         fmt::format("vector schema {} differs from model schema {}", x.schema_fingerprint,
                     schema_fingerprint_));
  }
  return scores(std::span<const double>(x.values));
}

Eigen::VectorXd OvrLogisticModel::scores(std::span<const double> x) const {
  Eigen::RowVectorXd row(means_.size());
  expand_row(x, columns_, row);
  const Eigen::VectorXd standardized =
      ((row.transpose() - means_).array() / stddevs_.array()).matrix();
  const auto p = standardized.size();
  Eigen::VectorXd out(weights_.rows());
  for (Eigen::Index k = 0; k < weights_.rows(); ++k) {
    out(k) = sigmoid(weights_(k, 0) + weights_.row(k).tail(p).dot(standardized));
  }
  return out;
}

std::vector<int> OvrLogisticModel::ranking(std::span<const double> x) const {
  const auto s = scores(x);
  std::vector<int> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s(a) > s(b); });
  return order;
}

std::vector<Recommendation> OvrLogisticModel::recommend(const FeatureVector& x, std::size_t k) const {
  if (x.schema_fingerprint != schema_fingerprint_) {
    fail("learn.FingerprintMismatch",
         fmt::format("vector schema {} differs from model schema {}", x.schema_fingerprint,
                     schema_fingerprint_));
  }
  return recommend(std::span<const double>(x.values), k);
}

std::vector<Recommendation> OvrLogisticModel::recommend(std::span<const double> x, std::size_t k) const {
  if (k < 1 || k > domain_.size()) {
    fail("learn.KOutOfRange", fmt::format("k={} outside 1..{}", k, domain_.size()));
  }
  const auto s = scores(x);
  const auto order = ranking(x);
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < k; ++i) {
    const int c = order[i];
    out.push_back({c, domain_[static_cast<std::size_t>(c)], s(c)});
  }
  return out;
}

std::string OvrLogisticModel::serialize() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& c : columns_) columns.push_back({{"name", c.name}, {"cardinality", c.cardinality}});
  const nlohmann::json header = {{"class_id", class_id_},
                                 {"domain", domain_},
                                 {"columns", columns},
                                 {"params", params_.to_json()},
                                 {"penalty", penalty_},
                                 {"cv_accuracy", cv_accuracy_},
                                 {"converged", converged_},
                                 {"seed", seed_},
                                 {"schema_fingerprint", schema_fingerprint_},
                                 {"taxonomy_fingerprint", taxonomy_fingerprint_}};
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kPayloadVersion);
  w.blob(header.dump());
  w.u64(static_cast<std::uint64_t>(means_.size()));
  w.u64(static_cast<std::uint64_t>(weights_.rows()));
  for (Eigen::Index j = 0; j < means_.size(); ++j) w.f64(means_(j));
  for (Eigen::Index j = 0; j < stddevs_.size(); ++j) w.f64(stddevs_(j));
  for (Eigen::Index k = 0; k < weights_.rows(); ++k) {
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) w.f64(weights_(k, j));
  }
  return w.take();
}

OvrLogisticModel OvrLogisticModel::deserialize(std::string_view bytes) {
  ByteReader in(bytes, "learn.PayloadCorrupt");
  if (in.bytes(kMagic.size()) != kMagic) fail("learn.PayloadCorrupt", "not a logistic payload");
  if (in.u32() != kPayloadVersion) fail("learn.PayloadCorrupt", "unsupported logistic payload version");
  OvrLogisticModel m;
  try {
    const auto h = nlohmann::json::parse(in.blob());
    m.class_id_ = h.at("class_id").get<int>();
    m.domain_ = h.at("domain").get<std::vector<std::string>>();
    for (const auto& c : h.at("columns")) {
      m.columns_.push_back({c.at("name").get<std::string>(), c.at("cardinality").get<std::uint32_t>()});
    }
    m.params_ = LogisticParams::from_json(h.at("params"));
    m.penalty_ = h.at("penalty").get<double>();
    m.cv_accuracy_ = h.at("cv_accuracy").get<std::vector<double>>();
    m.converged_ = h.at("converged").get<bool>();
    m.seed_ = h.at("seed").get<std::uint64_t>();
    m.schema_fingerprint_ = h.at("schema_fingerprint").get<std::string>();
    m.taxonomy_fingerprint_ = h.at("taxonomy_fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail("learn.PayloadCorrupt", std::string("bad logistic header: ") + e.what());
  }
  const auto p = in.u64();
  const auto K = in.u64();
  if (p != expanded_width(m.columns_) || K != m.domain_.size() ||
      (2 * p + K * (p + 1)) * 8 != in.remaining()) {
    fail("learn.PayloadCorrupt", "logistic dimensions do not match payload");
  }
  m.means_.resize(static_cast<Eigen::Index>(p));
  m.stddevs_.resize(static_cast<Eigen::Index>(p));
  m.weights_.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(p + 1));
  for (Eigen::Index j = 0; j < m.means_.size(); ++j) m.means_(j) = in.f64();
  for (Eigen::Index j = 0; j < m.stddevs_.size(); ++j) m.stddevs_(j) = in.f64();
  for (Eigen::Index k = 0; k < m.weights_.rows(); ++k) {
    for (Eigen::Index j = 0; j < m.weights_.cols(); ++j) m.weights_(k, j) = in.f64();
  }
  if (!m.weights_.allFinite()) fail("learn.PayloadCorrupt", "non-finite weights");
  return m;
}

EvaluationReport evaluate_logistic(const OvrLogisticModel& model, const Dataset& ds, Split split) {
  if (ds.schema_fingerprint != model.schema_fingerprint()) {
    fail("learn.FingerprintMismatch", "dataset schema differs from model schema");
  }
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  for (const auto* row : ds.rows_in(split)) {
    rankings.push_back(model.ranking(row->features));
    truth.push_back(row->target);
  }
  auto report = evaluate_correction(rankings, truth);
  report.split = std::string(to_string(split));
  return report;
}

}  // namespace txfix
