#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace ladderkit {

enum class PoolStat { kMean, kStd, kMax, kSkew, kKurt };

inline constexpr std::array<PoolStat, 5> kAllPoolStats{PoolStat::kMean, PoolStat::kStd, PoolStat::kMax,
                                                       PoolStat::kSkew, PoolStat::kKurt};

std::string_view to_string(PoolStat stat);
PoolStat parse_pool_stat(std::string_view name);

/// Pools a non-empty series. Moments are population (biased) estimators:
/// std = sqrt(m2), skew = m3 / m2^1.5, kurt = m4 / m2^2 - 3 (excess).
/// A zero-variance series yields std = skew = kurt = 0.
double pool(std::span<const double> series, PoolStat stat);

/// "stat(name)", e.g. pooled_name(kMax, "L_Y") == "max(L_Y)".
std::string pooled_name(PoolStat stat, std::string_view name);

}  // namespace ladderkit
