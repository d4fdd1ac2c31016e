#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ladderkit/metrics.hpp"

namespace ladderkit {

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least two folds");
  if (n < static_cast<std::size_t>(folds)) throw std::invalid_argument("fewer samples than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with an explicit draw so the permutation is stable across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  const std::size_t k = static_cast<std::size_t>(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

CrossValidationReport cross_validate(const Matrix& X, std::span<const double> y, const FitPredict& model,
                                     int folds, std::uint64_t seed) {
  if (y.size() != X.rows()) throw std::invalid_argument("target count does not match sample count");
  const auto split = kfold_indices(X.rows(), folds, seed);
  CrossValidationReport report;
  for (const auto& test : split) {
    std::vector<char> is_test(X.rows(), 0);
    for (auto i : test) is_test[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (!is_test[i]) train.push_back(i);
    }
    std::vector<double> y_train, y_test;
    for (auto i : train) y_train.push_back(y[i]);
    for (auto i : test) y_test.push_back(y[i]);
    const auto pred = model(X.select_rows(train), y_train, X.select_rows(test));
    report.folds.push_back({r2_score(y_test, pred), mae(y_test, pred)});
  }
  for (const auto& f : report.folds) {
    report.mean_r2 += f.r2;
    report.mean_mae += f.mae;
  }
  report.mean_r2 /= static_cast<double>(report.folds.size());
  report.mean_mae /= static_cast<double>(report.folds.size());
  return report;
}

}  // namespace ladderkit
