#include <cmath>
#include <stdexcept>

#include "ladderkit/complexity.hpp"
#include "ladderkit/parallel.hpp"

namespace ladderkit {

namespace {

// Per-plane analysis state reused across the blocks of one frame.
class PlaneAnalyzer {
 public:
  explicit PlaneAnalyzer(int w)
      : w_(w), dct_(w), block_(sq(w)), coeffs_(sq(w)), scratch_(sq(w)), weights_(sq(w)) {
    const double w2 = static_cast<double>(w) * w;
    for (int i = 0; i < w; ++i) {
      for (int j = 0; j < w; ++j) {
        const double ratio = static_cast<double>(i * j) / w2;
        weights_[static_cast<std::size_t>(i) * w + j] = std::exp(std::abs(ratio * ratio - 1.0));
      }
    }
  }

  struct Result {
    double mean_energy = 0.0;
    double mean_brightness = 0.0;
  };

  // Block energies are appended to `energies` when non-null.
  Result run(const Plane& plane, std::vector<double>* energies) {
    const int cols = block_columns(plane, w_);
    const int rows = block_rows(plane, w_);
    const double w2 = static_cast<double>(w_) * w_;
    double energy_sum = 0.0;
    double dc_sum = 0.0;
    for (int by = 0; by < rows; ++by) {
      for (int bx = 0; bx < cols; ++bx) {
        extract_block(plane, bx, by, w_, block_);
        dct_.forward(block_, coeffs_, scratch_);
        double acc = 0.0;
        for (std::size_t k = 1; k < coeffs_.size(); ++k) acc += weights_[k] * std::abs(coeffs_[k]);
        const double energy = acc / w2;
        if (energies) energies->push_back(energy);
        energy_sum += energy;
        dc_sum += coeffs_[0] / w_;
      }
    }
    const double count = static_cast<double>(cols) * rows;
    return {energy_sum / count, dc_sum / count};
  }

 private:
  static std::size_t sq(int w) { return static_cast<std::size_t>(w) * w; }

  int w_;
  Dct2d dct_;
  std::vector<double> block_, coeffs_, scratch_, weights_;
};

}  // namespace

FrameAnalysis analyze_frame(const PlanarFrame& frame, int block_size) {
  if (block_size < 4) throw std::invalid_argument("block size must be at least 4");
  PlaneAnalyzer analyzer(block_size);
  FrameAnalysis out;
  out.luma_block_energy.reserve(static_cast<std::size_t>(block_columns(frame.y, block_size)) *
                                block_rows(frame.y, block_size));
  const auto y = analyzer.run(frame.y, &out.luma_block_energy);
  const auto u = analyzer.run(frame.u, nullptr);
  const auto v = analyzer.run(frame.v, nullptr);
  out.features = {y.mean_energy, u.mean_energy, v.mean_energy,
                  y.mean_brightness, u.mean_brightness, v.mean_brightness};
  return out;
}

FramePlaneFeatures frame_features(const PlanarFrame& frame, int block_size) {
  return analyze_frame(frame, block_size).features;
}

TemporalGradient temporal_gradient(const std::vector<std::vector<double>>& block_energies) {
  if (block_energies.empty()) throw std::invalid_argument("temporal gradient needs at least one frame");
  TemporalGradient out;
  out.per_frame.assign(block_energies.size(), 0.0);
  for (std::size_t p = 1; p < block_energies.size(); ++p) {
    const auto& cur = block_energies[p];
    const auto& prev = block_energies[p - 1];
    if (cur.size() != prev.size() || cur.empty()) {
      throw std::invalid_argument("frames must share a non-empty block grid");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) sum += std::abs(cur[k] - prev[k]);
    out.per_frame[p] = sum / static_cast<double>(cur.size());
  }
  if (block_energies.size() > 1) {
    double sum = 0.0;
    for (std::size_t p = 1; p < out.per_frame.size(); ++p) sum += out.per_frame[p];
    out.scene = sum / static_cast<double>(out.per_frame.size() - 1);
  }
  return out;
}

SceneComplexity scene_complexity(const SceneClip& clip, const ComplexityOptions& options) {
  if (clip.frames.empty()) throw std::invalid_argument("cannot analyze an empty clip");
  if (options.block_size < 4) throw std::invalid_argument("block size must be at least 4");

  std::vector<FrameAnalysis> analyses(clip.frames.size());
  parallel_for(clip.frames.size(), options.threads, [&](std::size_t i) {
    analyses[i] = analyze_frame(clip.frames[i], options.block_size);
  });

  std::vector<std::vector<double>> energies;
  energies.reserve(analyses.size());
  for (auto& a : analyses) energies.push_back(std::move(a.luma_block_energy));
  const TemporalGradient gradient = temporal_gradient(energies);

  SceneComplexity scene;
  scene.scene_id = clip.scene_id;
  scene.block_size = options.block_size;
  scene.bit_depth = clip.bit_depth();
  scene.per_frame.reserve(analyses.size());
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    scene.per_frame.push_back({analyses[i].features, gradient.per_frame[i]});
  }
  const double n = static_cast<double>(analyses.size());
  for (const auto& f : scene.per_frame) {
    scene.E_Y += f.planes.E_Y;
    scene.L_Y += f.planes.L_Y;
    scene.E_U += f.planes.E_U;
    scene.E_V += f.planes.E_V;
    scene.L_U += f.planes.L_U;
    scene.L_V += f.planes.L_V;
  }
  scene.E_Y /= n;
  scene.L_Y /= n;
  scene.E_U /= n;
  scene.E_V /= n;
  scene.L_U /= n;
  scene.L_V /= n;
  scene.h = gradient.scene;
  return scene;
}

const std::vector<std::string>& complexity_feature_names() {
  static const std::vector<std::string> names{"E_Y", "h", "L_Y", "E_U", "E_V", "L_U", "L_V"};
  return names;
}

std::vector<double> complexity_series(const SceneComplexity& scene, const std::string& name) {
  std::vector<double> out;
  out.reserve(scene.per_frame.size());
  for (const auto& f : scene.per_frame) {
    if (name == "E_Y") out.push_back(f.planes.E_Y);
    else if (name == "h") out.push_back(f.h);
    else if (name == "L_Y") out.push_back(f.planes.L_Y);
    else if (name == "E_U") out.push_back(f.planes.E_U);
    else if (name == "E_V") out.push_back(f.planes.E_V);
    else if (name == "L_U") out.push_back(f.planes.L_U);
    else if (name == "L_V") out.push_back(f.planes.L_V);
    else throw std::invalid_argument("unknown complexity feature '" + name + "'");
  }
  return out;
}

}  // namespace ladderkit
