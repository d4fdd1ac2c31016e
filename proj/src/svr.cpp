#include "ladderkit/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ladderkit {

void SvrParams::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("SVR C must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("SVR epsilon must be non-negative");
  if (gamma_mode == GammaMode::kExplicit && !(gamma > 0.0)) {
    throw std::invalid_argument("explicit SVR gamma must be positive");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("SVR tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("SVR iteration cap must be positive");
}

void standardization(const Matrix& X, std::vector<double>& mean, std::vector<double>& scale) {
  const std::size_t n = X.rows(), d = X.cols();
  mean.assign(d, 0.0);
  scale.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += X(r, c);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = X(r, c) - mean[c];
      scale[c] += dv * dv;
    }
  }
  for (auto& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 0.0)) s = 1.0;
  }
}

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

Matrix standardize(const Matrix& X, const std::vector<double>& mean, const std::vector<double>& scale) {
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = (X(r, c) - mean[c]) / scale[c];
  }
  return out;
}

// Solver over 2n variables: a[0..n) are alpha, a[n..2n) are alpha^*, with
// labels +1 / -1 respectively. Minimizes 1/2 a'Qa + p'a subject to
// sum(label * a) = 0 and 0 <= a <= C.
class SmoSolver {
 public:
  SmoSolver(const Matrix& Xs, std::span<const double> y, double gamma, const SvrParams& params)
      : n_(Xs.rows()), C_(params.C), params_(params), K_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      K_[i * n_ + i] = 1.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double k = rbf_kernel(Xs.row(i), Xs.row(j), gamma);
        K_[i * n_ + j] = k;
        K_[j * n_ + i] = k;
      }
    }
    const std::size_t l2 = 2 * n_;
    alpha_.assign(l2, 0.0);
    p_.resize(l2);
    grad_.resize(l2);
    for (std::size_t i = 0; i < n_; ++i) {
      p_[i] = params.epsilon - y[i];
      p_[i + n_] = params.epsilon + y[i];
    }
    grad_ = p_;
  }

  void solve() {
    const std::size_t l2 = 2 * n_;
    constexpr double kTau = 1e-12;
    while (iterations_ < params_.max_iterations) {
      int i = -1, j = -1;
      violation_ = select_working_set(i, j);
      if (violation_ < params_.tolerance || j < 0) {
        converged_ = true;
        return;
      }
      ++iterations_;
      const double old_i = alpha_[i], old_j = alpha_[j];
      const double qij = q(i, j);
      if (label(i) != label(j)) {
        double quad = 2.0 + 2.0 * qij;  // Q_ii = Q_jj = K(x,x) = 1
        if (quad <= 0) quad = kTau;
        const double delta = (-grad_[i] - grad_[j]) / quad;
        const double diff = alpha_[i] - alpha_[j];
        alpha_[i] += delta;
        alpha_[j] += delta;
        if (diff > 0) {
          if (alpha_[j] < 0) { alpha_[j] = 0; alpha_[i] = diff; }
        } else {
          if (alpha_[i] < 0) { alpha_[i] = 0; alpha_[j] = -diff; }
        }
        if (diff > 0) {
          if (alpha_[i] > C_) { alpha_[i] = C_; alpha_[j] = C_ - diff; }
        } else {
          if (alpha_[j] > C_) { alpha_[j] = C_; alpha_[i] = C_ + diff; }
        }
      } else {
        double quad = 2.0 - 2.0 * qij;
        if (quad <= 0) quad = kTau;
        const double delta = (grad_[i] - grad_[j]) / quad;
        const double sum = alpha_[i] + alpha_[j];
        alpha_[i] -= delta;
        alpha_[j] += delta;
        if (sum > C_) {
          if (alpha_[i] > C_) { alpha_[i] = C_; alpha_[j] = sum - C_; }
        } else {
          if (alpha_[j] < 0) { alpha_[j] = 0; alpha_[i] = sum; }
        }
        if (sum > C_) {
          if (alpha_[j] > C_) { alpha_[j] = C_; alpha_[i] = sum - C_; }
        } else {
          if (alpha_[i] < 0) { alpha_[i] = 0; alpha_[j] = sum; }
        }
      }
      const double di = alpha_[i] - old_i, dj = alpha_[j] - old_j;
      for (std::size_t k = 0; k < l2; ++k) grad_[k] += q(i, k) * di + q(j, k) * dj;
    }
    int i = -1, j = -1;
    violation_ = select_working_set(i, j);
    converged_ = violation_ < params_.tolerance;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub;
    double sum_free = 0.0;
    int n_free = 0;
    for (std::size_t i = 0; i < 2 * n_; ++i) {
      const double yg = label(i) * grad_[i];
      if (at_upper(i)) {
        if (label(i) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(i)) {
        if (label(i) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  }

  double objective() const {
    double obj = 0.0;
    for (std::size_t i = 0; i < 2 * n_; ++i) obj += alpha_[i] * (grad_[i] + p_[i]);
    return 0.5 * obj;
  }

  double coefficient(std::size_t i) const { return alpha_[i] - alpha_[i + n_]; }
  double violation() const { return violation_; }
  bool converged() const { return converged_; }
  std::int64_t iterations() const { return iterations_; }

 private:
  int label(std::size_t i) const { return i < n_ ? 1 : -1; }
  bool at_upper(std::size_t i) const { return alpha_[i] >= C_; }
  bool at_lower(std::size_t i) const { return alpha_[i] <= 0.0; }
  double q(std::size_t i, std::size_t j) const {
    return label(i) * label(j) * K_[(i % n_) * n_ + (j % n_)];
  }

  // Returns the maximal KKT violation m(a) - M(a).
  double select_working_set(int& out_i, int& out_j) const {
    constexpr double kTau = 1e-12;
    const double inf = std::numeric_limits<double>::infinity();
    double gmax = -inf, gmax2 = -inf;
    int gi = -1;
    for (std::size_t t = 0; t < 2 * n_; ++t) {
      if (label(t) > 0) {
        if (!at_upper(t) && -grad_[t] >= gmax) { gmax = -grad_[t]; gi = static_cast<int>(t); }
      } else {
        if (!at_lower(t) && grad_[t] >= gmax) { gmax = grad_[t]; gi = static_cast<int>(t); }
      }
    }
    int gj = -1;
    double best = inf;
    for (std::size_t t = 0; t < 2 * n_; ++t) {
      if (label(t) > 0) {
        if (at_lower(t)) continue;
        const double grad_diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (grad_diff > 0 && gi >= 0) {
          double quad = 2.0 - 2.0 * label(gi) * q(gi, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best) { best = obj; gj = static_cast<int>(t); }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (grad_diff > 0 && gi >= 0) {
          double quad = 2.0 + 2.0 * label(gi) * q(gi, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best) { best = obj; gj = static_cast<int>(t); }
        }
      }
    }
    out_i = gi;
    out_j = gj;
    if (gi < 0) return 0.0;
    return std::max(0.0, gmax + gmax2);
  }

  std::size_t n_;
  double C_;
  const SvrParams& params_;
  std::vector<double> K_;
  std::vector<double> alpha_, p_, grad_;
  double violation_ = std::numeric_limits<double>::infinity();
  bool converged_ = false;
  std::int64_t iterations_ = 0;
};

}  // namespace

SvrModel svr_train(const Matrix& X, std::span<const double> y, const SvrParams& params) {
  params.validate();
  if (X.rows() < 2) throw std::invalid_argument("SVR training needs at least two samples");
  if (X.cols() < 1) throw std::invalid_argument("SVR training needs at least one feature");
  if (y.size() != X.rows()) throw std::invalid_argument("target count does not match sample count");
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature matrix contains non-finite values");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("targets contain non-finite values");
  }

  SvrModel model;
  model.C = params.C;
  model.epsilon = params.epsilon;
  standardization(X, model.feature_mean, model.feature_scale);
  const Matrix Xs = standardize(X, model.feature_mean, model.feature_scale);
  for (std::size_t c = 0; c < X.cols(); ++c) model.feature_names.push_back("x" + std::to_string(c));

  if (params.gamma_mode == GammaMode::kExplicit) {
    model.gamma = params.gamma;
  } else {
    double sum = 0.0, sum_sq = 0.0;
    for (double v : Xs.data()) sum += v;
    const double mean = sum / static_cast<double>(Xs.data().size());
    for (double v : Xs.data()) sum_sq += (v - mean) * (v - mean);
    const double var = sum_sq / static_cast<double>(Xs.data().size());
    model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
  }

  SmoSolver solver(Xs, y, model.gamma, params);
  solver.solve();
  model.bias = -solver.rho();
  model.kkt_violation = solver.violation();
  model.converged = solver.converged();
  model.iterations = solver.iterations();
  model.dual_objective = solver.objective();

  model.support_vectors = Matrix(0, X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double c = solver.coefficient(i);
    if (c != 0.0) {
      model.support_vectors.append_row(Xs.row(i));
      model.coefficients.push_back(c);
      model.support_indices.push_back(i);
    }
  }
  return model;
}

double svr_predict(const SvrModel& model, std::span<const double> x) {
  const std::size_t d = model.feature_count();
  if (x.size() != d) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(d));
  }
  std::vector<double> xs(d);
  for (std::size_t c = 0; c < d; ++c) xs[c] = (x[c] - model.feature_mean[c]) / model.feature_scale[c];
  double f = model.bias;
  for (std::size_t i = 0; i < model.coefficients.size(); ++i) {
    f += model.coefficients[i] * rbf_kernel(model.support_vectors.row(i), xs, model.gamma);
  }
  return f;
}

double svr_dual_objective(const Matrix& Xs, std::span<const double> y,
                          std::span<const double> coefficients, double gamma, double epsilon) {
  const std::size_t n = Xs.rows();
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (coefficients[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (coefficients[j] == 0.0) continue;
      quad += coefficients[i] * coefficients[j] * rbf_kernel(Xs.row(i), Xs.row(j), gamma);
    }
    lin += epsilon * std::abs(coefficients[i]) - y[i] * coefficients[i];
  }
  return 0.5 * quad + lin;
}

}  // namespace ladderkit
