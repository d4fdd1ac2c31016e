#include <stdexcept>

#include "ladderkit/jnd_features.hpp"
#include "ladderkit/parallel.hpp"
#include "ladderkit/pooling.hpp"

namespace ladderkit {

namespace {

void pool_series_into(FeaturePool& out, const std::string& name, const std::vector<double>& series) {
  for (auto stat : kAllPoolStats) out[pooled_name(stat, name)] = pool(series, stat);
}

}  // namespace

FeaturePool pool_scene_features(const SceneComplexity& scene) {
  FeaturePool out;
  for (const auto& name : complexity_feature_names()) {
    pool_series_into(out, name, complexity_series(scene, name));
  }
  return out;
}

FeaturePool pool_bitstream_features(const BitstreamSeries& series) {
  if (series.frames.empty()) throw std::invalid_argument("bitstream series has no frames");
  std::vector<double> size, mx, my, sc;
  for (const auto& f : series.frames) {
    size.push_back(f.frame_size_bytes);
    mx.push_back(f.av_motion_x);
    my.push_back(f.av_motion_y);
    sc.push_back(f.spatial_complexity);
  }
  FeaturePool out;
  pool_series_into(out, "AvMotionX", mx);
  pool_series_into(out, "AvMotionY", my);
  pool_series_into(out, "SpatialComplexity", sc);
  pool_series_into(out, "framesize", size);
  out["framerate"] = series.framerate;
  out["bitrate"] = series.bitrate_kbps;
  return out;
}

int effective_glcm_levels(const GlcmOptions& options, int bit_depth) {
  const int native = 1 << bit_depth;
  if (options.levels == 0) return native;
  if (options.levels < 2 || options.levels > native) {
    throw std::invalid_argument("GLCM levels must lie in [2, 2^bit_depth]");
  }
  return options.levels;
}

FeaturePool pooled_glcm(const SceneClip& clip, const GlcmOptions& options) {
  if (clip.frames.empty()) throw std::invalid_argument("cannot pool GLCM features of an empty clip");
  const int bit_depth = clip.bit_depth();
  const int levels = effective_glcm_levels(options, bit_depth);
  const std::size_t n_features = glcm_feature_names().size();
  const std::size_t n_stats = kAllPoolStats.size();

  // spatial[frame][feature * n_stats + stat]
  std::vector<std::vector<double>> spatial(clip.frames.size());
  parallel_for(clip.frames.size(), options.threads, [&](std::size_t fi) {
    auto patches = crop_patches(clip.frames[fi].y, options.patch_size);
    std::vector<std::vector<double>> per_feature(n_features);
    for (auto& p : patches) {
      if (levels != (1 << bit_depth)) {
        for (auto& s : p.samples) {
          s = static_cast<std::uint16_t>((static_cast<std::uint32_t>(s) * levels) >> bit_depth);
        }
      }
      const auto m = glcm(p.samples, p.size, p.size, options.offset, levels);
      const auto f = glcm_features(m);
      for (std::size_t k = 0; k < n_features; ++k) per_feature[k].push_back(glcm_feature_value(f, k));
    }
    auto& row = spatial[fi];
    row.resize(n_features * n_stats);
    for (std::size_t k = 0; k < n_features; ++k) {
      for (std::size_t s = 0; s < n_stats; ++s) row[k * n_stats + s] = pool(per_feature[k], kAllPoolStats[s]);
    }
  });

  FeaturePool out;
  std::vector<double> series(clip.frames.size());
  for (std::size_t k = 0; k < n_features; ++k) {
    for (std::size_t s = 0; s < n_stats; ++s) {
      for (std::size_t fi = 0; fi < spatial.size(); ++fi) series[fi] = spatial[fi][k * n_stats + s];
      const std::string inner = pooled_name(kAllPoolStats[s], glcm_feature_names()[k]);
      pool_series_into(out, inner, series);
    }
  }
  return out;
}

FeaturePool merge_feature_pools(const FeaturePool& scene, const FeaturePool& bitstream,
                                const FeaturePool& glcm) {
  FeaturePool out = scene;
  for (const FeaturePool* src : {&bitstream, &glcm}) {
    for (const auto& [k, v] : *src) {
      if (!out.emplace(k, v).second) throw std::invalid_argument("duplicate feature name '" + k + "'");
    }
  }
  return out;
}

const std::vector<std::string>& default_jnd_selection() {
  static const std::vector<std::string> names{
      "max(L_Y)",
      "max(L_U)",
      "kurt(AvMotionX)",
      "kurt(AvMotionY)",
      "kurt(SpatialComplexity)",
      "mean(mean(dissimilarity))",
      "kurt(kurt(dissimilarity))",
      "max(mean(homogeneity))",
      "mean(mean(homogeneity))",
      "skew(std(angular second moment))",
      "kurt(std(angular second moment))",
      "kurt(skew(angular second moment))",
      "mean(skew(energy))",
      "std(max(correlation))",
      "kurt(max(contrast))",
  };
  return names;
}

double JndFeatureVector::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("feature '" + std::string(name) + "' not in vector");
}

JndFeatureVector assemble_jnd_vector(const FeaturePool& candidates,
                                     const std::vector<std::string>& selection) {
  if (selection.empty()) throw std::invalid_argument("feature selection is empty");
  JndFeatureVector v;
  for (const auto& name : selection) {
    auto it = candidates.find(name);
    if (it == candidates.end()) {
      throw std::invalid_argument("selected feature '" + name + "' is not available");
    }
    v.names.push_back(name);
    v.values.push_back(it->second);
  }
  return v;
}

JndFeatureVector assemble_jnd_vector(const SceneComplexity& scene, const BitstreamSeries& bitstream,
                                     const FeaturePool& glcm,
                                     const std::vector<std::string>& selection) {
  return assemble_jnd_vector(
      merge_feature_pools(pool_scene_features(scene), pool_bitstream_features(bitstream), glcm),
      selection);
}

}  // namespace ladderkit
