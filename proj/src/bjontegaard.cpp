#include "ladderkit/bjontegaard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ladderkit/csv.hpp"

namespace ladderkit {

QualityMetric parse_quality_metric(std::string_view name) {
  if (name == "vmaf" || name == "VMAF") return QualityMetric::kVmaf;
  if (name == "psnr" || name == "PSNR") return QualityMetric::kPsnr;
  throw std::invalid_argument("unknown quality metric '" + std::string(name) + "' (expected vmaf or psnr)");
}

std::string_view to_string(QualityMetric metric) { return metric == QualityMetric::kVmaf ? "vmaf" : "psnr"; }

PreparedCurve prepare_curve(const RdCurve& curve) {
  PreparedCurve out;
  bool saw_saturated = false;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (!(p.bitrate_kbps > 0.0) || !std::isfinite(p.bitrate_kbps) || !std::isfinite(p.quality)) {
      throw std::invalid_argument("RD point " + std::to_string(i) + " needs a positive bitrate and finite quality");
    }
    if (i > 0 && p.bitrate_kbps <= curve.points[i - 1].bitrate_kbps) {
      throw std::invalid_argument("RD curve bitrates must be strictly increasing");
    }
    if (curve.metric == QualityMetric::kVmaf && p.quality >= kVmafSaturation) {
      if (saw_saturated) {
        ++out.dropped_saturated;
        continue;
      }
      saw_saturated = true;
    }
    if (!out.points.empty() && p.quality < out.points.back().quality) {
      out.warnings.push_back("quality decreases between " + format_number(out.points.back().bitrate_kbps) +
                             " and " + format_number(p.bitrate_kbps) + " kbps");
    }
    out.points.push_back(p);
  }
  if (out.points.size() < 4) {
    throw std::invalid_argument("RD curve needs at least 4 usable points, has " + std::to_string(out.points.size()));
  }
  return out;
}

double CubicFit::operator()(double x) const {
  const double u = (x - center) / scale;
  return coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3]));
}

double CubicFit::integral(double a, double b) const {
  auto antiderivative = [this](double x) {
    const double u = (x - center) / scale;
    return u * (coef[0] + u * (coef[1] / 2.0 + u * (coef[2] / 3.0 + u * coef[3] / 4.0)));
  };
  return scale * (antiderivative(b) - antiderivative(a));
}

CubicFit fit_cubic(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 4 || y.size() != n) throw std::invalid_argument("cubic fit needs at least 4 (x, y) pairs");
  CubicFit fit;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.center = 0.5 * (*lo + *hi);
  fit.scale = 0.5 * (*hi - *lo);
  if (!(fit.scale > 0.0)) throw std::invalid_argument("cubic fit needs distinct x values");

  // Householder QR of the n x 4 Vandermonde matrix, columns stored row-major.
  std::vector<double> A(n * 4);
  std::vector<double> b(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (x[i] - fit.center) / fit.scale;
    double p = 1.0;
    for (std::size_t j = 0; j < 4; ++j, p *= u) A[i * 4 + j] = p;
  }
  for (std::size_t k = 0; k < 4; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += A[i * 4 + k] * A[i * 4 + k];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("cubic fit is rank deficient");
    const double alpha = A[k * 4 + k] > 0 ? -norm : norm;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = A[i * 4 + k];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < 4; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * A[i * 4 + j];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) A[i * 4 + j] -= f * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < n; ++i) dot += v[i] * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < n; ++i) b[i] -= f * v[i];
  }
  for (std::size_t k = 4; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < 4; ++j) s -= A[k * 4 + j] * fit.coef[j];
    if (A[k * 4 + k] == 0.0) throw std::invalid_argument("cubic fit is rank deficient");
    fit.coef[k] = s / A[k * 4 + k];
  }
  return fit;
}

namespace {

struct PreparedPair {
  PreparedCurve ref, test;
};

PreparedPair prepare_pair(const RdCurve& reference, const RdCurve& test) {
  if (reference.metric != test.metric) throw std::invalid_argument("RD curves use different quality metrics");
  return {prepare_curve(reference), prepare_curve(test)};
}

BdResult finish(const PreparedPair& p, double value) {
  BdResult r;
  r.value = value;
  r.dropped_reference = p.ref.dropped_saturated;
  r.dropped_test = p.test.dropped_saturated;
  for (const auto& w : p.ref.warnings) r.warnings.push_back("reference: " + w);
  for (const auto& w : p.test.warnings) r.warnings.push_back("test: " + w);
  return r;
}

// Mean of each fitted curve over the shared x interval; returns test - ref.
double mean_gap(const std::vector<double>& x_ref, const std::vector<double>& y_ref,
                const std::vector<double>& x_test, const std::vector<double>& y_test, const char* axis) {
  const double lo = std::max(*std::min_element(x_ref.begin(), x_ref.end()),
                             *std::min_element(x_test.begin(), x_test.end()));
  const double hi = std::min(*std::max_element(x_ref.begin(), x_ref.end()),
                             *std::max_element(x_test.begin(), x_test.end()));
  if (!(hi > lo)) throw std::invalid_argument(std::string("RD curves do not overlap in ") + axis);
  const auto f_ref = fit_cubic(x_ref, y_ref);
  const auto f_test = fit_cubic(x_test, y_test);
  return (f_test.integral(lo, hi) - f_ref.integral(lo, hi)) / (hi - lo);
}

}  // namespace

BdResult bd_rate(const RdCurve& reference, const RdCurve& test) {
  const auto p = prepare_pair(reference, test);
  std::vector<double> q_ref, r_ref, q_test, r_test;
  for (const auto& pt : p.ref.points) {
    q_ref.push_back(pt.quality);
    r_ref.push_back(std::log10(pt.bitrate_kbps));
  }
  for (const auto& pt : p.test.points) {
    q_test.push_back(pt.quality);
    r_test.push_back(std::log10(pt.bitrate_kbps));
  }
  const double gap = mean_gap(q_ref, r_ref, q_test, r_test, "quality");
  return finish(p, (std::pow(10.0, gap) - 1.0) * 100.0);
}

BdResult bd_quality(const RdCurve& reference, const RdCurve& test) {
  const auto p = prepare_pair(reference, test);
  std::vector<double> r_ref, q_ref, r_test, q_test;
  for (const auto& pt : p.ref.points) {
    r_ref.push_back(std::log10(pt.bitrate_kbps));
    q_ref.push_back(pt.quality);
  }
  for (const auto& pt : p.test.points) {
    r_test.push_back(std::log10(pt.bitrate_kbps));
    q_test.push_back(pt.quality);
  }
  return finish(p, mean_gap(r_ref, q_ref, r_test, q_test, "bitrate"));
}

double storage_delta(std::span<const double> reference_bitrates, std::span<const double> optimized_bitrates) {
  if (reference_bitrates.empty()) throw std::invalid_argument("reference ladder is empty");
  double ref = 0.0, opt = 0.0;
  for (double b : reference_bitrates) ref += b;
  for (double b : optimized_bitrates) opt += b;
  if (ref == 0.0) throw std::invalid_argument("reference ladder bitrates sum to zero");
  return opt / ref - 1.0;
}

}  // namespace ladderkit
