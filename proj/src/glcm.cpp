#include "ladderkit/glcm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladderkit {

GlcmMatrix::GlcmMatrix(int levels, std::vector<Entry> entries, std::uint64_t total)
    : levels_(levels), entries_(std::move(entries)), total_(total) {
  if (total_ == 0) throw std::invalid_argument("co-occurrence matrix has no pairs");
}

std::uint64_t GlcmMatrix::count(std::uint32_t a, std::uint32_t b) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{a, b},
                             [](const Entry& e, const std::pair<std::uint32_t, std::uint32_t>& key) {
                               return e.a < key.first || (e.a == key.first && e.b < key.second);
                             });
  return (it != entries_.end() && it->a == a && it->b == b) ? it->count : 0;
}

std::vector<double> GlcmMatrix::dense() const {
  const std::size_t n = static_cast<std::size_t>(levels_);
  std::vector<double> out(n * n, 0.0);
  for (const auto& e : entries_) {
    out[e.a * n + e.b] = static_cast<double>(e.count) / static_cast<double>(total_);
  }
  return out;
}

GlcmMatrix glcm(std::span<const std::uint16_t> patch, int rows, int cols, GlcmOffset offset,
                int levels) {
  if (levels < 1) throw std::invalid_argument("GLCM needs at least one gray level");
  if (rows <= 0 || cols <= 0 || patch.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("patch size does not match its dimensions");
  }
  const int r_begin = std::max(0, -offset.dy);
  const int r_end = std::min(rows, rows - offset.dy);
  const int c_begin = std::max(0, -offset.dx);
  const int c_end = std::min(cols, cols - offset.dx);
  if (r_end <= r_begin || c_end <= c_begin) {
    throw std::invalid_argument("patch is smaller than the GLCM offset span");
  }

  const std::uint64_t n = static_cast<std::uint64_t>(levels);
  std::vector<std::uint64_t> keys;
  keys.reserve(2 * static_cast<std::size_t>(r_end - r_begin) * (c_end - c_begin));
  for (int r = r_begin; r < r_end; ++r) {
    for (int c = c_begin; c < c_end; ++c) {
      const std::uint64_t a = patch[static_cast<std::size_t>(r) * cols + c];
      const std::uint64_t b =
          patch[static_cast<std::size_t>(r + offset.dy) * cols + (c + offset.dx)];
      if (a >= n || b >= n) throw std::invalid_argument("sample value exceeds GLCM levels");
      keys.push_back(a * n + b);
      keys.push_back(b * n + a);
    }
  }
  std::sort(keys.begin(), keys.end());

  std::vector<GlcmMatrix::Entry> entries;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    entries.push_back({static_cast<std::uint32_t>(keys[i] / n), static_cast<std::uint32_t>(keys[i] % n),
                       static_cast<std::uint64_t>(j - i)});
    i = j;
  }
  return GlcmMatrix(levels, std::move(entries), keys.size());
}

GlcmFeatures glcm_features(const GlcmMatrix& matrix) {
  const double total = static_cast<double>(matrix.total());
  GlcmFeatures f;
  double mean = 0.0;
  for (const auto& e : matrix.entries()) {
    const double p = static_cast<double>(e.count) / total;
    const double d = static_cast<double>(e.a) - static_cast<double>(e.b);
    f.contrast += p * d * d;
    f.dissimilarity += p * std::abs(d);
    f.homogeneity += p / (1.0 + d * d);
    f.angular_second_moment += p * p;
    mean += p * e.a;
  }
  f.energy = std::sqrt(f.angular_second_moment);

  // Symmetric matrix: row and column marginals coincide.
  double variance = 0.0, covariance = 0.0;
  for (const auto& e : matrix.entries()) {
    const double p = static_cast<double>(e.count) / total;
    const double da = e.a - mean;
    const double db = e.b - mean;
    variance += p * da * da;
    covariance += p * da * db;
  }
  f.correlation = variance > 0.0 ? covariance / variance : 1.0;
  return f;
}

const std::vector<std::string>& glcm_feature_names() {
  static const std::vector<std::string> names{"contrast", "dissimilarity", "homogeneity",
                                              "angular second moment", "energy", "correlation"};
  return names;
}

double glcm_feature_value(const GlcmFeatures& f, std::size_t index) {
  switch (index) {
    case 0: return f.contrast;
    case 1: return f.dissimilarity;
    case 2: return f.homogeneity;
    case 3: return f.angular_second_moment;
    case 4: return f.energy;
    case 5: return f.correlation;
  }
  throw std::out_of_range("GLCM feature index out of range");
}

}  // namespace ladderkit
