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


// Straight-line reference computations used to cross-check the library.

#ifndef TXFIX_TESTS_ORACLES_HPP_
#define TXFIX_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "txfix/logistic.hpp"
#include "txfix/metrics.hpp"

namespace txfix::oracle {

struct MultiLabelInstance {
  std::vector<Labels> pred;
  std::vector<Labels> truth;
};

inline MultiLabelInstance random_multilabel(std::mt19937_64& gen, std::size_t max_n = 30,
                                            std::size_t max_labels = 5) {
  MultiLabelInstance m;
  const std::size_t n = 1 + gen() % max_n;
  const std::size_t l = 1 + gen() % max_labels;
  for (std::size_t i = 0; i < n; ++i) {
    Labels p(l), t(l);
    for (std::size_t j = 0; j < l; ++j) {
      t[j] = gen() % 2;
      // Correlate predictions with truth so exact matches occur.
      p[j] = gen() % 4 == 0 ? 1 - t[j] : t[j];
    }
    m.pred.push_back(p);
    m.truth.push_back(t);
  }
  return m;
}

inline double subset_accuracy(const MultiLabelInstance& m) {
  double hits = 0;
  for (std::size_t i = 0; i < m.pred.size(); ++i) {
    bool same = true;
    for (std::size_t j = 0; j < m.pred[i].size(); ++j) same = same && m.pred[i][j] == m.truth[i][j];
    hits += same ? 1 : 0;
  }
  return hits / static_cast<double>(m.pred.size());
}

inline double jaccard(const MultiLabelInstance& m) {
  double sum = 0;
  for (std::size_t i = 0; i < m.pred.size(); ++i) {
    int inter = 0, uni = 0;
    for (std::size_t j = 0; j < m.pred[i].size(); ++j) {
      inter += m.pred[i][j] && m.truth[i][j];
      uni += m.pred[i][j] || m.truth[i][j];
    }
    sum += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
  }
  return sum / static_cast<double>(m.pred.size());
}

// Per label: tp, fp, fn.
inline std::vector<std::array<std::uint64_t, 3>> confusion(const MultiLabelInstance& m) {
  std::vector<std::array<std::uint64_t, 3>> out(m.pred[0].size(), {0, 0, 0});
  for (std::size_t i = 0; i < m.pred.size(); ++i) {
    for (std::size_t j = 0; j < m.pred[i].size(); ++j) {
      if (m.pred[i][j] && m.truth[i][j]) ++out[j][0];
      if (m.pred[i][j] && !m.truth[i][j]) ++out[j][1];
      if (!m.pred[i][j] && m.truth[i][j]) ++out[j][2];
    }
  }
  return out;
}

inline double precision(std::uint64_t tp, std::uint64_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

inline double recall(std::uint64_t tp, std::uint64_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

struct RankingInstance {
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  std::size_t classes = 0;
};

inline RankingInstance random_rankings(std::mt19937_64& gen, std::size_t max_n = 30,
                                       std::size_t max_k = 8) {
  RankingInstance r;
  r.classes = 2 + gen() % (max_k - 1);
  const std::size_t n = 1 + gen() % max_n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> perm(r.classes);
    for (std::size_t c = 0; c < r.classes; ++c) perm[c] = static_cast<int>(c);
    std::shuffle(perm.begin(), perm.end(), gen);
    r.rankings.push_back(perm);
    r.truth.push_back(static_cast<int>(gen() % r.classes));
  }
  return r;
}

inline double accuracy_at_k(const RankingInstance& r, std::size_t k) {
  double hits = 0;
  for (std::size_t i = 0; i < r.truth.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (r.rankings[i][j] == r.truth[i]) {
        hits += 1;
        break;
      }
    }
  }
  return hits / static_cast<double>(r.truth.size());
}

// Central-difference gradient of the regularized logistic objective.
inline double max_gradient_relative_error(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int n = 1 + static_cast<int>(gen() % 20);
  const int d = 1 + static_cast<int>(gen() % 10);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n), w(d + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = u(gen);
    y(i) = static_cast<double>(gen() % 2);
  }
  for (int j = 0; j <= d; ++j) w(j) = u(gen);
  const double lambda = std::pow(10.0, -3.0 + static_cast<double>(gen() % 5));
  Eigen::VectorXd grad;
  logistic_objective(x, y, w, lambda, &grad);
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int j = 0; j <= d; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    wp(j) += h;
    wm(j) -= h;
    const double numeric =
        (logistic_objective(x, y, wp, lambda, nullptr) - logistic_objective(x, y, wm, lambda, nullptr)) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad(j)), 1e-8});
    worst = std::max(worst, std::abs(numeric - grad(j)) / denom);
  }
  return worst;
}

}  // namespace txfix::oracle

#endif  // TXFIX_TESTS_ORACLES_HPP_
