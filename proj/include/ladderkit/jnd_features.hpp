#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ladderkit/complexity.hpp"
#include "ladderkit/glcm.hpp"
#include "ladderkit/media.hpp"

namespace ladderkit {

/// Named scalar features, keyed by pooled name such as "kurt(AvMotionX)".
using FeaturePool = std::map<std::string, double>;

// --- Bitstream features (produced by an external bitstream parser) ---

struct BitstreamFrame {
  double frame_size_bytes = 0;
  double av_motion_x = 0;
  double av_motion_y = 0;
  double spatial_complexity = 0;
};

struct BitstreamSeries {
  double framerate = 0;
  double bitrate_kbps = 0;
  std::vector<BitstreamFrame> frames;
};

/// Validates and decodes a bitstream-features document. When `expected_frames`
/// is given (or the file declares "frame_count"), the frame list must match it.
BitstreamSeries parse_bitstream_features(std::string_view json_text,
                                         std::optional<std::size_t> expected_frames = std::nullopt);
std::string serialize_bitstream_features(const BitstreamSeries& series);

// --- Pooling of each feature family ---

/// Temporal pooling of the seven per-frame complexity series (35 features).
FeaturePool pool_scene_features(const SceneComplexity& scene);
/// Temporal pooling of the per-frame bitstream series plus the scalar
/// "framerate" and "bitrate" entries.
FeaturePool pool_bitstream_features(const BitstreamSeries& series);

struct GlcmOptions {
  int patch_size = 64;
  GlcmOffset offset{0, 1};
  /// 0 means 2^bit_depth (no quantization).
  int levels = 0;
  unsigned threads = 1;
};

int effective_glcm_levels(const GlcmOptions& options, int bit_depth);

/// Per-frame Haralick statistics of each patch, pooled spatially across the
/// patches of a frame and then temporally across frames. Keys have the form
/// "temporal(spatial(feature))": 6 features x 25 stat pairs.
FeaturePool pooled_glcm(const SceneClip& clip, const GlcmOptions& options = {});

FeaturePool merge_feature_pools(const FeaturePool& scene, const FeaturePool& bitstream,
                                const FeaturePool& glcm);

// --- JND feature vector ---

/// The fifteen features feeding the JND threshold regressor, in order.
const std::vector<std::string>& default_jnd_selection();

struct JndFeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const;
};

/// Picks `selection` from the pool in selection order.
JndFeatureVector assemble_jnd_vector(const FeaturePool& candidates,
                                     const std::vector<std::string>& selection = default_jnd_selection());
JndFeatureVector assemble_jnd_vector(const SceneComplexity& scene, const BitstreamSeries& bitstream,
                                     const FeaturePool& glcm,
                                     const std::vector<std::string>& selection = default_jnd_selection());

}  // namespace ladderkit
