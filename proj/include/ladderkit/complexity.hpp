#pragma once

#include <span>
#include <string>
#include <vector>

#include "ladderkit/media.hpp"

namespace ladderkit {

/// Orthonormal type-II 2-D DCT for square w x w blocks, computed separably
/// with a precomputed cosine basis.
class Dct2d {
 public:
  explicit Dct2d(int size);

  int size() const { return size_; }
  /// `in` and `out` are row-major w*w; they must not alias.
  void forward(std::span<const double> in, std::span<double> out) const;
  /// Same, using caller-provided w*w scratch so hot loops do not allocate.
  void forward(std::span<const double> in, std::span<double> out, std::span<double> scratch) const;

 private:
  int size_;
  std::vector<double> basis_;  // basis_[k * w + n] = c(k) cos(pi (2n+1) k / 2w)
};

std::vector<double> dct2d(std::span<const double> block, int w);

/// Weighted mean magnitude of the AC coefficients:
///   (1/w^2) sum_{(i,j) != (0,0)} exp(|(i j / w^2)^2 - 1|) |C(i,j)|
double block_texture_energy(std::span<const double> coefficients, int w);

/// Formula version recorded in feature files. Bump when any feature
/// definition changes.
inline constexpr const char* kComplexityFormulaVersion = "dct-energy-v1";

struct FramePlaneFeatures {
  double E_Y = 0, E_U = 0, E_V = 0;
  double L_Y = 0, L_U = 0, L_V = 0;
};

struct FrameAnalysis {
  FramePlaneFeatures features;
  /// Per-block luma texture energy in block-index order, used for h.
  std::vector<double> luma_block_energy;
};

struct ComplexityOptions {
  int block_size = 32;
  unsigned threads = 1;
};

/// Per-plane mean texture energy and mean block brightness (DC / w).
FrameAnalysis analyze_frame(const PlanarFrame& frame, int block_size = 32);
FramePlaneFeatures frame_features(const PlanarFrame& frame, int block_size = 32);

struct TemporalGradient {
  std::vector<double> per_frame;  // h_p; h_0 = 0
  double scene = 0.0;             // mean of h_p for p >= 1
};

/// h_p = mean_k |H_{p,k} - H_{p-1,k}| over co-located luma blocks.
TemporalGradient temporal_gradient(const std::vector<std::vector<double>>& block_energies);

struct FrameComplexity {
  FramePlaneFeatures planes;
  double h = 0.0;
};

struct SceneComplexity {
  std::string scene_id;
  double E_Y = 0, h = 0, L_Y = 0, E_U = 0, E_V = 0, L_U = 0, L_V = 0;
  std::vector<FrameComplexity> per_frame;
  int block_size = 32;
  int bit_depth = 8;
};

/// Deterministic for a given input regardless of `options.threads`.
SceneComplexity scene_complexity(const SceneClip& clip, const ComplexityOptions& options = {});

/// Names of the seven per-frame series in canonical order.
const std::vector<std::string>& complexity_feature_names();
/// Per-frame values of a named series ("E_Y", "h", ...).
std::vector<double> complexity_series(const SceneComplexity& scene, const std::string& name);

}  // namespace ladderkit
