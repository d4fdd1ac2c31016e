#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ladderkit/jnd_features.hpp"
#include "ladderkit/random_forest.hpp"
#include "ladderkit/svr.hpp"

namespace ladderkit {

struct Resolution {
  std::string tag;  // e.g. "1080p"
  int height = 0;
};

/// Parses "<height>p".
Resolution parse_resolution(std::string_view tag);

struct LadderConfig {
  std::vector<Resolution> resolutions;  // ascending by height
  std::vector<double> bitrates_kbps;    // ascending
  double crf_min = 0.0;
  double crf_max = 51.0;

  void validate() const;
  const Resolution& max_resolution() const { return resolutions.back(); }

  /// HLS authoring-spec ladder: 360p..1080p, 145..8100 kbps, CRF 0..51.
  static LadderConfig hls_default();
};

nlohmann::json to_json(const LadderConfig& config);
LadderConfig ladder_config_from_json(const nlohmann::json& doc);

struct SceneFeatures {
  double E_Y = 0;
  double h = 0;
  double L_Y = 0;
};

/// Model input row [E_Y, h, L_Y, ln(bitrate_kbps)].
std::vector<double> model_input(const SceneFeatures& scene, double bitrate_kbps);
const std::vector<std::string>& model_input_names();

/// Any scalar predictor over a model input row. Trained forests and test
/// stubs both plug in here.
using Regressor = std::function<double(std::span<const double>)>;
Regressor as_regressor(RandomForestModel model);

/// Regressors keyed by resolution tag.
using ModelTable = std::map<std::string, Regressor>;

struct VmafGrid {
  std::size_t rows = 0;  // resolutions
  std::size_t cols = 0;  // bitrates
  std::vector<double> values;

  double at(std::size_t m, std::size_t t) const { return values[m * cols + t]; }
  std::vector<double> column(std::size_t t) const;
};

/// v[m][t] = clamp(model_m([E_Y, h, L_Y, ln b_t]), 0, 100).
VmafGrid predict_vmaf_grid(const SceneFeatures& scene, const LadderConfig& config, const ModelTable& vmaf_models);

/// Index of the maximal entry; ties go to the lowest index (lowest resolution).
std::size_t select_resolution(std::span<const double> column);

double predict_crf(const SceneFeatures& scene, const std::string& resolution, double bitrate_kbps,
                   const ModelTable& crf_models, const LadderConfig& config);

struct LadderEntry {
  std::string resolution;
  double bitrate_kbps = 0;
  double crf = 0;
  double predicted_vmaf = 0;
  bool eliminated = false;
};

struct BitrateLadder {
  std::string scene_id;
  std::vector<LadderEntry> entries;  // ascending bitrate
  std::optional<double> jnd_threshold;

  std::size_t surviving() const;
  std::vector<double> surviving_bitrates() const;
};

/// Resolution and CRF prediction per target bitrate. No elimination.
BitrateLadder build_ladder(const SceneFeatures& scene, const LadderConfig& config, const ModelTable& vmaf_models,
                           const ModelTable& crf_models);

/// c_T = clamp(svr(features), crf_min, crf_max). Feature names must match the
/// model's feature names in order.
double predict_jnd_threshold(const JndFeatureVector& features, const SvrModel& model, const LadderConfig& config);

/// Walks entries in order, counting those at `max_resolution` with CRF
/// strictly below `jnd_threshold`; once the count exceeds one, every
/// subsequent entry (the current one included) is flagged eliminated.
void eliminate_representations(BitrateLadder& ladder, double jnd_threshold, const std::string& max_resolution);

// --- Brute-force convex hull from measured RD data ---

struct RdSample {
  std::string resolution;
  double bitrate_kbps = 0;
  double quality = 0;
};

struct HullEntry {
  std::string resolution;
  double bitrate_kbps = 0;
  double quality = 0;
};

/// Linear interpolation of quality at `bitrate_kbps` over points sorted by
/// bitrate; nullopt outside the measured range or with fewer than 2 points.
std::optional<double> interpolate_quality(std::span<const RdSample> sorted_points, double bitrate_kbps);

/// For each target bitrate, the resolution whose interpolated quality is
/// highest (ties to the lowest resolution). Resolutions that do not span a
/// bitrate are skipped for it; a bitrate no resolution spans is an error.
std::vector<HullEntry> convex_hull_ladder(std::span<const RdSample> samples, std::span<const double> bitrates_kbps);

nlohmann::json to_json(const BitrateLadder& ladder);
std::string ladder_to_csv(const BitrateLadder& ladder);

}  // namespace ladderkit
