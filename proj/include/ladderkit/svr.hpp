#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/matrix.hpp"

namespace ladderkit {

enum class GammaMode { kScale, kExplicit };

struct SvrParams {
  double C = 0.1;
  double epsilon = 1e-4;
  GammaMode gamma_mode = GammaMode::kScale;
  /// Used only with GammaMode::kExplicit.
  double gamma = 0.0;
  /// Stop when the maximal KKT violation drops below this.
  double tolerance = 1e-3;
  std::int64_t max_iterations = 10'000'000;

  void validate() const;
};

/// Epsilon-insensitive support vector regressor with an RBF kernel
/// K(u, v) = exp(-gamma |u - v|^2) on standardized inputs.
struct SvrModel {
  Matrix support_vectors;            // standardized
  std::vector<double> coefficients;  // alpha_i - alpha_i^*
  /// Training-row index of each support vector.
  std::vector<std::size_t> support_indices;
  double bias = 0.0;
  double gamma = 1.0;
  double C = 0.1;
  double epsilon = 1e-4;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<std::string> feature_names;
  std::string target_name;

  // Solver diagnostics.
  double kkt_violation = 0.0;
  double dual_objective = 0.0;
  std::int64_t iterations = 0;
  bool converged = true;

  std::size_t feature_count() const { return feature_mean.size(); }
};

/// Standardization parameters: population mean and std per column (std of a
/// constant column is taken as 1).
void standardization(const Matrix& X, std::vector<double>& mean, std::vector<double>& scale);

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);

/// Solves the dual with pairwise (SMO) coordinate ascent using second-order
/// working-set selection. Never throws on non-convergence; inspect
/// `converged` and `kkt_violation` instead.
SvrModel svr_train(const Matrix& X, std::span<const double> y, const SvrParams& params = {});

double svr_predict(const SvrModel& model, std::span<const double> x);

/// Dual objective 1/2 b'Kb + eps sum|b| - y'b for coefficients b on the
/// standardized training set (minimization form).
double svr_dual_objective(const Matrix& standardized_X, std::span<const double> y,
                          std::span<const double> coefficients, double gamma, double epsilon);

}  // namespace ladderkit
