#include "ladderkit/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladderkit {

std::string_view to_string(PoolStat stat) {
  switch (stat) {
    case PoolStat::kMean: return "mean";
    case PoolStat::kStd: return "std";
    case PoolStat::kMax: return "max";
    case PoolStat::kSkew: return "skew";
    case PoolStat::kKurt: return "kurt";
  }
  return "?";
}

PoolStat parse_pool_stat(std::string_view name) {
  for (auto s : kAllPoolStats) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown pooling statistic '" + std::string(name) + "'");
}

double pool(std::span<const double> series, PoolStat stat) {
  if (series.empty()) throw std::invalid_argument("cannot pool an empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (stat == PoolStat::kMax) return *hi;

  const double n = static_cast<double>(series.size());
  double sum = 0.0;
  for (double x : series) sum += x;
  const double mean = sum / n;
  if (stat == PoolStat::kMean) return mean;

  // Exactly constant input: rounding in `mean` must not leak into moments.
  if (*lo == *hi) return 0.0;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : series) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) return 0.0;
  switch (stat) {
    case PoolStat::kStd: return std::sqrt(m2);
    case PoolStat::kSkew: return m3 / std::pow(m2, 1.5);
    case PoolStat::kKurt: return m4 / (m2 * m2) - 3.0;
    default: break;
  }
  return 0.0;
}

std::string pooled_name(PoolStat stat, std::string_view name) {
  std::string out(to_string(stat));
  out += '(';
  out += name;
  out += ')';
  return out;
}

}  // namespace ladderkit
