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


// CART classification tree grown on Gini impurity.

#ifndef TXFIX_TREE_HPP_
#define TXFIX_TREE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "txfix/binary_io.hpp"

namespace txfix {

// Column-major feature table: value of feature f for row i is
// column(f)[i].
class ColumnTable {
 public:
  ColumnTable() = default;
  ColumnTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  // From row-major rows of equal length.
  static ColumnTable from_rows(std::span<const std::vector<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows_, rows_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TreeParams {
  int max_depth = 16;
  std::size_t min_leaf = 2;
  // Features evaluated per node; 0 means ceil(sqrt(d)).
  std::size_t feature_subset_size = 0;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> class_counts;  // training rows reaching the node

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  // Grows a tree on rows `sample` (indices into `x`, repeats allowed) with
  // labels y in [0, n_classes). A row goes left when x[feature] <=
  // threshold. Throws learn.EmptyData.
  static DecisionTree train(const ColumnTable& x, std::span<const int> y, int n_classes,
                            std::span<const std::size_t> sample, const TreeParams& params,
                            std::uint64_t seed);

  const TreeNode& leaf(std::span<const double> x) const;
  // Fraction of the leaf's training rows with label `cls`.
  double class_fraction(std::span<const double> x, int cls) const;
  int predict(std::span<const double> x) const;

  std::span<const TreeNode> nodes() const { return nodes_; }
  int depth() const;

  void serialize(ByteWriter& out) const;
  static DecisionTree deserialize(ByteReader& in);

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace txfix

#endif  // TXFIX_TREE_HPP_
