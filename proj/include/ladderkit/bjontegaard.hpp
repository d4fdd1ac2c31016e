#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ladderkit {

enum class QualityMetric { kPsnr, kVmaf };

QualityMetric parse_quality_metric(std::string_view name);
std::string_view to_string(QualityMetric metric);

struct RdPoint {
  double bitrate_kbps = 0;
  double quality = 0;
};

struct RdCurve {
  QualityMetric metric = QualityMetric::kVmaf;
  std::vector<RdPoint> points;  // strictly ascending bitrate
};

/// VMAF values at or above this are saturated.
inline constexpr double kVmafSaturation = 99.95;

struct PreparedCurve {
  std::vector<RdPoint> points;
  std::size_t dropped_saturated = 0;
  std::vector<std::string> warnings;
};

/// Validates a curve for fitting: positive, strictly increasing bitrates and at
/// least four points. For VMAF, saturated points after the first saturated
/// one are dropped. Quality decreases are reported as warnings.
PreparedCurve prepare_curve(const RdCurve& curve);

/// Least-squares cubic through (x, y), returned as coefficients of
/// c0 + c1 u + c2 u^2 + c3 u^3 with u = (x - center) / scale.
struct CubicFit {
  std::array<double, 4> coef{};
  double center = 0.0;
  double scale = 1.0;

  double operator()(double x) const;
  /// Definite integral over [a, b] in x.
  double integral(double a, double b) const;
};

CubicFit fit_cubic(std::span<const double> x, std::span<const double> y);

struct BdResult {
  double value = 0.0;
  std::size_t dropped_reference = 0;
  std::size_t dropped_test = 0;
  std::vector<std::string> warnings;
};

/// Average bitrate difference (percent) of `test` against `reference` at
/// equal quality: log10 rate fitted as a cubic in quality, integrated over the
/// shared quality interval. Negative means `test` needs fewer bits.
BdResult bd_rate(const RdCurve& reference, const RdCurve& test);

/// Average quality difference of `test` against `reference` at equal
/// bitrate, over the shared log10-bitrate interval.
BdResult bd_quality(const RdCurve& reference, const RdCurve& test);

/// Relative storage change sum(optimized) / sum(reference) - 1.
double storage_delta(std::span<const double> reference_bitrates, std::span<const double> optimized_bitrates);

}  // namespace ladderkit
