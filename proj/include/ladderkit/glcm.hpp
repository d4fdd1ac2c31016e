#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ladderkit {

struct GlcmOffset {
  int dy = 0;
  int dx = 1;
};

/// Symmetric gray-level co-occurrence matrix stored sparsely. Both (a,b) and
/// (b,a) are counted for every pixel pair, so `total()` is twice the pair count.
class GlcmMatrix {
 public:
  struct Entry {
    std::uint32_t a;
    std::uint32_t b;
    std::uint64_t count;
  };

  GlcmMatrix(int levels, std::vector<Entry> entries, std::uint64_t total);

  int levels() const { return levels_; }
  std::uint64_t total() const { return total_; }
  /// Non-zero cells sorted by (a, b).
  const std::vector<Entry>& entries() const { return entries_; }

  std::uint64_t count(std::uint32_t a, std::uint32_t b) const;
  double probability(std::uint32_t a, std::uint32_t b) const {
    return static_cast<double>(count(a, b)) / static_cast<double>(total_);
  }
  /// Row-major levels x levels normalized matrix.
  std::vector<double> dense() const;

 private:
  int levels_;
  std::vector<Entry> entries_;
  std::uint64_t total_;
};

/// Co-occurrence of `patch` (rows x cols, row-major). Every value must be
/// below `levels`. Throws if no pixel pair fits inside the patch.
GlcmMatrix glcm(std::span<const std::uint16_t> patch, int rows, int cols, GlcmOffset offset,
                int levels);

struct GlcmFeatures {
  double contrast = 0;
  double dissimilarity = 0;
  double homogeneity = 0;
  double angular_second_moment = 0;
  double energy = 0;
  double correlation = 0;
};

/// Haralick statistics. Correlation of a zero-variance matrix is 1.
GlcmFeatures glcm_features(const GlcmMatrix& matrix);

/// Feature names as they appear in pooled feature names.
const std::vector<std::string>& glcm_feature_names();
double glcm_feature_value(const GlcmFeatures& features, std::size_t index);

}  // namespace ladderkit
