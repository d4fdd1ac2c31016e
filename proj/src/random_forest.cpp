#include "ladderkit/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ladderkit/parallel.hpp"

namespace ladderkit {

void ForestParams::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("n_estimators must be at least 1");
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be at least 2");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be at least 1");
}

int DecisionTree::leaf_index(std::span<const double> x) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

double DecisionTree::predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  std::size_t left_count = 0;
};

struct SortKey {
  double x;
  double y;
  std::size_t order;  // position in the node's index list, for stable ties
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const double> y, const ForestParams& params)
      : X_(X), y_(y), params_(params) {}

  DecisionTree build(std::vector<std::size_t> indices) {
    DecisionTree tree;
    struct Pending {
      std::vector<std::size_t> indices;
      int depth;
      int node;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({std::move(indices), 0, 0});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      const auto split = find_split(job.indices, job.depth);
      if (split.feature < 0) {
        tree.nodes[job.node].value = leaf_value(job.indices);
        continue;
      }
      std::vector<std::size_t> left, right;
      left.reserve(split.left_count);
      right.reserve(job.indices.size() - split.left_count);
      for (auto i : job.indices) {
        (X_(i, split.feature) <= split.threshold ? left : right).push_back(i);
      }
      const int left_node = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[job.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left_node;
      node.right = left_node + 1;
      node.value = leaf_value(job.indices);
      // Push right first so the left subtree is expanded first.
      stack.push_back({std::move(right), job.depth + 1, left_node + 1});
      stack.push_back({std::move(left), job.depth + 1, left_node});
    }
    return tree;
  }

 private:
  double leaf_value(const std::vector<std::size_t>& idx) const {
    double sum = 0.0;
    double lo = y_[idx.front()], hi = lo;
    for (auto i : idx) {
      sum += y_[i];
      lo = std::min(lo, y_[i]);
      hi = std::max(hi, y_[i]);
    }
    return std::clamp(sum / static_cast<double>(idx.size()), lo, hi);
  }

  SplitChoice find_split(const std::vector<std::size_t>& idx, int depth) {
    const std::size_t m = idx.size();
    if (params_.max_depth >= 0 && depth >= params_.max_depth) return {};
    if (m < static_cast<std::size_t>(params_.min_samples_split)) return {};
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (m < 2 * min_leaf) return {};

    double mean = 0.0;
    bool pure = true;
    for (auto i : idx) {
      mean += y_[i];
      pure = pure && y_[i] == y_[idx.front()];
    }
    if (pure) return {};
    mean /= static_cast<double>(m);

    // Maximizing S_l^2/n_l + S_r^2/n_r on centered targets minimizes the
    // children's summed squared error.
    SplitChoice best;
    double best_score = -1.0;
    keys_.resize(m);
    for (std::size_t f = 0; f < X_.cols(); ++f) {
      double total = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        keys_[k] = {X_(idx[k], f), y_[idx[k]] - mean, k};
        total += keys_[k].y;
      }
      std::sort(keys_.begin(), keys_.end(), [](const SortKey& a, const SortKey& b) {
        return a.x < b.x || (a.x == b.x && a.order < b.order);
      });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < m; ++k) {
        left_sum += keys_[k].y;
        if (keys_[k].x == keys_[k + 1].x) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = m - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        if (score > best_score) {
          best_score = score;
          best.feature = static_cast<int>(f);
          double t = 0.5 * (keys_[k].x + keys_[k + 1].x);
          if (t >= keys_[k + 1].x) t = keys_[k].x;
          best.threshold = t;
          best.left_count = nl;
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const double> y_;
  const ForestParams& params_;
  std::vector<SortKey> keys_;
};

void check_training_input(const Matrix& X, std::span<const double> y) {
  if (X.rows() < 2) throw std::invalid_argument("training needs at least two samples");
  if (X.cols() < 1) throw std::invalid_argument("training needs at least one feature");
  if (y.size() != X.rows()) throw std::invalid_argument("target count does not match sample count");
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature matrix contains non-finite values");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("targets contain non-finite values");
  }
}

}  // namespace

DecisionTree grow_tree(const Matrix& X, std::span<const double> y,
                       std::vector<std::size_t> sample_indices, const ForestParams& params) {
  if (sample_indices.empty()) throw std::invalid_argument("cannot grow a tree on zero samples");
  TreeBuilder builder(X, y, params);
  return builder.build(std::move(sample_indices));
}

RandomForestModel rf_train(const Matrix& X, std::span<const double> y, const ForestParams& params,
                           std::uint64_t seed, unsigned threads) {
  params.validate();
  check_training_input(X, y);
  RandomForestModel model;
  model.params = params;
  model.seed = seed;
  model.sample_count = X.rows();
  for (std::size_t f = 0; f < X.cols(); ++f) model.feature_names.push_back("x" + std::to_string(f));
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  const std::size_t n = X.rows();
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    std::vector<std::size_t> sample(n);
    if (params.bootstrap) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(t)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng);
    } else {
      for (std::size_t i = 0; i < n; ++i) sample[i] = i;
    }
    model.trees[t] = grow_tree(X, y, std::move(sample), params);
  });
  return model;
}

double rf_predict(const RandomForestModel& model, std::span<const double> x) {
  if (x.size() != model.feature_count()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.feature_count()));
  }
  if (model.trees.empty()) throw std::invalid_argument("forest has no trees");
  double sum = 0.0;
  double lo = model.trees.front().predict(x), hi = lo;
  for (const auto& tree : model.trees) {
    const double v = tree.predict(x);
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::clamp(sum / static_cast<double>(model.trees.size()), lo, hi);
}

}  // namespace ladderkit
