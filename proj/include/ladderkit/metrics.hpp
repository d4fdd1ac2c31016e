#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ladderkit/matrix.hpp"

namespace ladderkit {

/// Coefficient of determination. With zero target variance the score is 1
/// for a perfect fit and 0 otherwise.
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);
double mae(std::span<const double> y_true, std::span<const double> y_pred);

/// Seeded k-fold split: indices are shuffled once, then cut into k
/// contiguous folds whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int folds, std::uint64_t seed);

/// Trains on the training partition and returns predictions for the test rows.
using FitPredict = std::function<std::vector<double>(const Matrix& X_train, std::span<const double> y_train,
                                                     const Matrix& X_test)>;

struct FoldScore {
  double r2 = 0.0;
  double mae = 0.0;
};

struct CrossValidationReport {
  std::vector<FoldScore> folds;
  double mean_r2 = 0.0;
  double mean_mae = 0.0;
};

CrossValidationReport cross_validate(const Matrix& X, std::span<const double> y, const FitPredict& model,
                                     int folds, std::uint64_t seed);

}  // namespace ladderkit
