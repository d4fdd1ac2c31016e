#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/matrix.hpp"
#include "ladderkit/metrics.hpp"
#include "ladderkit/random_forest.hpp"
#include "ladderkit/svr.hpp"

namespace ladderkit {

FitPredict svr_fit_predict(const SvrParams& params = {});
FitPredict forest_fit_predict(const ForestParams& params, std::uint64_t seed);

/// Mean cross-validated R^2 of `model` on the given columns of X.
double subset_score(const Matrix& X, std::span<const double> y, std::span<const std::size_t> columns,
                    const FitPredict& model, int folds, std::uint64_t seed);

struct SfsStep {
  std::size_t added = 0;
  double score = 0.0;
  /// Score of every candidate evaluated in this step, indexed by feature;
  /// NaN for features already selected.
  std::vector<double> candidate_scores;
};

struct SfsResult {
  std::vector<std::size_t> selected;  // addition order
  std::vector<std::string> names;
  std::vector<SfsStep> steps;
};

/// Greedy forward selection of k features. Each step adds the feature whose
/// addition maximizes the mean cross-validated R^2; ties go to the lowest
/// feature index. The same fold assignment is used for every evaluation.
SfsResult forward_sfs(const Matrix& X, std::span<const double> y, const std::vector<std::string>& names,
                      std::size_t k, const FitPredict& model, int folds = 5, std::uint64_t seed = 0);

}  // namespace ladderkit
