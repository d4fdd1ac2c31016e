#include "ladderkit/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ladderkit {

FitPredict svr_fit_predict(const SvrParams& params) {
  return [params](const Matrix& X_train, std::span<const double> y_train, const Matrix& X_test) {
    const auto model = svr_train(X_train, y_train, params);
    std::vector<double> out;
    out.reserve(X_test.rows());
    for (std::size_t r = 0; r < X_test.rows(); ++r) out.push_back(svr_predict(model, X_test.row(r)));
    return out;
  };
}

FitPredict forest_fit_predict(const ForestParams& params, std::uint64_t seed) {
  return [params, seed](const Matrix& X_train, std::span<const double> y_train, const Matrix& X_test) {
    const auto model = rf_train(X_train, y_train, params, seed);
    std::vector<double> out;
    out.reserve(X_test.rows());
    for (std::size_t r = 0; r < X_test.rows(); ++r) out.push_back(rf_predict(model, X_test.row(r)));
    return out;
  };
}

double subset_score(const Matrix& X, std::span<const double> y, std::span<const std::size_t> columns,
                    const FitPredict& model, int folds, std::uint64_t seed) {
  return cross_validate(X.select_columns(columns), y, model, folds, seed).mean_r2;
}

SfsResult forward_sfs(const Matrix& X, std::span<const double> y, const std::vector<std::string>& names,
                      std::size_t k, const FitPredict& model, int folds, std::uint64_t seed) {
  const std::size_t d = X.cols();
  if (names.size() != d) throw std::invalid_argument("feature names do not match matrix width");
  if (k < 1 || k > d) throw std::invalid_argument("k must lie in [1, feature count]");
  if (folds < 2) throw std::invalid_argument("forward selection needs at least two folds");
  if (X.rows() < static_cast<std::size_t>(2 * folds)) {
    throw std::invalid_argument("forward selection needs at least 2 samples per fold");
  }
  if (y.size() != X.rows()) throw std::invalid_argument("target count does not match sample count");
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    throw std::invalid_argument("degenerate dataset: targets are constant");
  }

  SfsResult result;
  std::vector<char> used(d, 0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t step = 0; step < k; ++step) {
    SfsStep s;
    s.candidate_scores.assign(d, nan);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_feature = d;
    std::vector<std::size_t> columns = result.selected;
    columns.push_back(0);
    for (std::size_t f = 0; f < d; ++f) {
      if (used[f]) continue;
      columns.back() = f;
      const double score = subset_score(X, y, columns, model, folds, seed);
      s.candidate_scores[f] = score;
      if (best_feature == d || score > best) {
        best = score;
        best_feature = f;
      }
    }
    s.added = best_feature;
    s.score = best;
    used[best_feature] = 1;
    result.selected.push_back(best_feature);
    result.names.push_back(names[best_feature]);
    result.steps.push_back(std::move(s));
  }
  return result;
}

}  // namespace ladderkit
