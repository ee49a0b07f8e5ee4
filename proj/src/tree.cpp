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


#include "txfix/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "txfix/error.hpp"
#include "txfix/rng.hpp"

namespace txfix {
namespace {

struct Candidate {
  bool found = false;
  double impurity = 0.0;
  int feature = -1;
  double threshold = 0.0;

  bool better_than(const Candidate& o) const {
    if (!o.found) return true;
    if (impurity != o.impurity) return impurity < o.impurity;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

// n - sum(c^2)/n, i.e. n times the Gini impurity.
double weighted_gini(std::span<const std::uint32_t> counts, std::size_t n) {
  if (n == 0) return 0.0;
  double sq = 0.0;
  for (const auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  return static_cast<double>(n) - sq / static_cast<double>(n);
}

class Grower {
 public:
  Grower(const ColumnTable& x, std::span<const int> y, int n_classes, const TreeParams& params,
         std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), params_(params), rng_(seed) {
    mtry_ = params.feature_subset_size != 0
                ? std::min(params.feature_subset_size, x.cols())
                : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    perm_.resize(x.cols());
  }

  std::vector<TreeNode> grow(std::vector<std::size_t> rows) {
    build(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t build(std::vector<std::size_t> rows, int depth) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (const auto r : rows) ++counts[static_cast<std::size_t>(y_[r])];
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    nodes_[index].class_counts = counts;
    if (pure || depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) return index;

    const Candidate best = find_split(rows, counts);
    if (!best.found) return index;

    std::vector<std::size_t> left, right;
    const auto column = x_.column(static_cast<std::size_t>(best.feature));
    for (const auto r : rows) (column[r] <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    const auto l = build(std::move(left), depth + 1);
    const auto rr = build(std::move(right), depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = rr;
    return index;
  }

  Candidate find_split(const std::vector<std::size_t>& rows,
                       const std::vector<std::uint32_t>& totals) {
    std::iota(perm_.begin(), perm_.end(), 0);
    Candidate best;
    std::size_t evaluated = 0;
    const std::size_t d = perm_.size();
    const std::size_t n = rows.size();
    pairs_.resize(n);
    std::vector<std::uint32_t> left(totals.size()), right(totals.size());

    for (std::size_t j = 0; j < d && evaluated < mtry_; ++j) {
      std::swap(perm_[j], perm_[j + rng_.uniform_index(d - j)]);
      const std::size_t f = perm_[j];
      const auto column = x_.column(f);
      for (std::size_t i = 0; i < n; ++i) pairs_[i] = {column[rows[i]], y_[rows[i]]};
      const auto [lo, hi] = std::minmax_element(
          pairs_.begin(), pairs_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (lo->first == hi->first) continue;
      ++evaluated;
      std::sort(pairs_.begin(), pairs_.end());

      std::fill(left.begin(), left.end(), 0);
      right = totals;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto label = static_cast<std::size_t>(pairs_[i].second);
        ++left[label];
        --right[label];
        if (pairs_[i].first == pairs_[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        Candidate c;
        c.found = true;
        c.impurity = weighted_gini(left, nl) + weighted_gini(right, nr);
        c.feature = static_cast<int>(f);
        const double a = pairs_[i].first, b = pairs_[i + 1].first;
        c.threshold = a + (b - a) / 2.0;
        if (c.threshold >= b) c.threshold = a;
        if (c.better_than(best)) best = c;
      }
    }
    return best;
  }

  const ColumnTable& x_;
  std::span<const int> y_;
  int n_classes_;
  TreeParams params_;
  Rng rng_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> perm_;
  std::vector<std::pair<double, int>> pairs_;
  std::vector<TreeNode> nodes_;
};

int node_depth(std::span<const TreeNode> nodes, std::int32_t i) {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(node_depth(nodes, n.left), node_depth(nodes, n.right));
}

}  // namespace

ColumnTable ColumnTable::from_rows(std::span<const std::vector<double>> rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  ColumnTable t(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) fail("learn.SchemaMismatch", "ragged feature rows");
    for (std::size_t j = 0; j < cols; ++j) t.at(i, j) = rows[i][j];
  }
  return t;
}

DecisionTree DecisionTree::train(const ColumnTable& x, std::span<const int> y, int n_classes,
                                 std::span<const std::size_t> sample, const TreeParams& params,
                                 std::uint64_t seed) {
  if (sample.empty() || x.cols() == 0) fail("learn.EmptyData", "no training rows or features");
  if (y.size() != x.rows()) fail("learn.SchemaMismatch", "label count differs from row count");
  if (n_classes < 1 || params.min_leaf < 1) fail("learn.BadParams", "n_classes and min_leaf must be >= 1");
  for (const auto r : sample) {
    if (r >= x.rows() || y[r] < 0 || y[r] >= n_classes) {
      fail("learn.BadParams", fmt::format("sample row {} out of range or bad label", r));
    }
  }
  DecisionTree tree;
  tree.nodes_ = Grower(x, y, n_classes, params, seed)
                    .grow(std::vector<std::size_t>(sample.begin(), sample.end()));
  return tree;
}

const TreeNode& DecisionTree::leaf(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i];
}

double DecisionTree::class_fraction(std::span<const double> x, int cls) const {
  const auto& counts = leaf(x).class_counts;
  std::uint64_t total = 0;
  for (const auto c : counts) total += c;
  const auto k = static_cast<std::size_t>(cls);
  return total == 0 || k >= counts.size() ? 0.0
                                          : static_cast<double>(counts[k]) / static_cast<double>(total);
}

int DecisionTree::predict(std::span<const double> x) const {
  const auto& counts = leaf(x).class_counts;
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

int DecisionTree::depth() const { return nodes_.empty() ? 0 : node_depth(nodes_, 0); }

void DecisionTree::serialize(ByteWriter& out) const {
  out.u32(static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& n : nodes_) {
    out.i32(n.feature);
    out.f64(n.threshold);
    out.i32(n.left);
    out.i32(n.right);
    out.u32(static_cast<std::uint32_t>(n.class_counts.size()));
    for (const auto c : n.class_counts) out.u32(c);
  }
}

DecisionTree DecisionTree::deserialize(ByteReader& in) {
  DecisionTree tree;
  const auto count = in.u32();
  if (count == 0 || count > in.remaining()) fail("learn.PayloadCorrupt", "bad node count");
  tree.nodes_.resize(count);
  for (auto& n : tree.nodes_) {
    n.feature = in.i32();
    n.threshold = in.f64();
    n.left = in.i32();
    n.right = in.i32();
    const auto k = in.u32();
    if (k > in.remaining()) fail("learn.PayloadCorrupt", "bad class count");
    n.class_counts.resize(k);
    for (auto& c : n.class_counts) c = in.u32();
  }
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    const auto& n = tree.nodes_[i];
    if (n.is_leaf()) continue;
    const auto valid = [&](std::int32_t c) {
      return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(count);
    };
    if (!valid(n.left) || !valid(n.right)) fail("learn.PayloadCorrupt", "bad child index");
  }
  return tree;
}

}  // namespace txfix
