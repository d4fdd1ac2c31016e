#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/matrix.hpp"

namespace ladderkit {

struct ForestParams {
  int n_estimators = 100;
  /// Negative means unlimited depth.
  int max_depth = 14;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  /// Disabled only for deterministic split verification.
  bool bootstrap = true;

  void validate() const;
};

/// Regression tree in flat array form. Node 0 is the root. Internal nodes
/// send x to `left` when x[feature] <= threshold.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  /// Index of the leaf reached by x.
  int leaf_index(std::span<const double> x) const;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::string resolution_tag;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;

  std::size_t feature_count() const { return feature_names.size(); }
};

/// CART regression forest. Each tree sees a seeded bootstrap resample (seed
/// derived from `seed` and the tree index) and splits on all features,
/// minimizing the summed squared error of the children. Results do not
/// depend on `threads`.
RandomForestModel rf_train(const Matrix& X, std::span<const double> y, const ForestParams& params,
                           std::uint64_t seed, unsigned threads = 1);

/// Grows one tree on the given sample indices (duplicates allowed).
DecisionTree grow_tree(const Matrix& X, std::span<const double> y,
                       std::vector<std::size_t> sample_indices, const ForestParams& params);

/// Mean of the per-tree predictions, accumulated in tree order.
double rf_predict(const RandomForestModel& model, std::span<const double> x);

}  // namespace ladderkit
