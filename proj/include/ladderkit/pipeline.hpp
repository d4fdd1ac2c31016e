#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladderkit/bjontegaard.hpp"
#include "ladderkit/complexity.hpp"
#include "ladderkit/jnd_features.hpp"
#include "ladderkit/ladder.hpp"
#include "ladderkit/random_forest.hpp"
#include "ladderkit/svr.hpp"

namespace ladderkit::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalyzerSettings {
  int block_size = 32;
  int patch_size = 64;
  GlcmOffset glcm_offset{0, 1};
  int glcm_levels = 0;  // 0: 2^bit_depth
};

struct PipelineConfig {
  LadderConfig ladder = LadderConfig::hls_default();
  AnalyzerSettings analyzer;
  ForestParams forest;
  SvrParams svr;
  std::vector<std::string> jnd_selection = default_jnd_selection();
  int folds = 5;
  std::uint64_t seed = 0;
  std::string models_dir;
  std::string jnd_model;
  /// Worker count. Never affects results, so it is not part of the hash.
  unsigned threads = 1;

  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);
/// Effective configuration as echoed into outputs (threads excluded).
nlohmann::json config_to_json(const PipelineConfig& config);
/// FNV-1a 64 of the canonical effective configuration, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);
/// {tool_version, config_hash, seed}
nlohmann::json provenance(const PipelineConfig& config);

// --- analyze ---

struct AnalyzeRequest {
  std::string input;
  std::optional<std::string> sidecar;  // raw .yuv only
  std::optional<std::string> scene_id;
  std::optional<std::string> bitstream;
  std::string output_dir = ".";
};

struct AnalyzeResult {
  std::string scene_id;
  std::string complexity_path;
  std::optional<std::string> jnd_path;
  std::vector<std::string> warnings;
};

/// Loads a .y4m file, or a headerless .yuv file described by a JSON sidecar
/// (defaults to "<input>.json").
SceneClip load_clip(const std::string& path, const std::optional<std::string>& sidecar,
                    const std::optional<std::string>& scene_id);

nlohmann::json complexity_document(const SceneComplexity& scene, const PipelineConfig& config);
SceneComplexity complexity_from_document(const nlohmann::json& doc);

nlohmann::json jnd_document(const std::string& scene_id, const JndFeatureVector& vector,
                            const FeaturePool& candidates, int glcm_levels, const PipelineConfig& config);

AnalyzeResult run_analyze(const AnalyzeRequest& request, const PipelineConfig& config);

// --- training ---

enum class RdTarget { kVmaf, kCrf };

struct TrainResult {
  std::vector<std::string> model_paths;
  std::string report_path;
  nlohmann::json report;
};

/// One forest per resolution from a CSV with columns
/// scene_id,E_Y,h,L_Y,resolution,bitrate_kbps,crf,vmaf,psnr.
TrainResult run_train_rd(const std::string& csv_path, RdTarget target, const PipelineConfig& config,
                         const std::string& output_dir);

/// SVR from a CSV with scene_id, feature columns, c_T. Feature columns are
/// every column other than scene_id and c_T, in header order.
TrainResult run_train_jnd(const std::string& csv_path, const PipelineConfig& config, const std::string& output_dir);

struct SelectResult {
  std::vector<std::string> selected;
  std::string output_path;
};

SelectResult run_select_features(const std::string& csv_path, std::size_t k, const PipelineConfig& config,
                                 const std::string& output_dir);

// --- ladder prediction ---

struct PredictRequest {
  std::string features;                     // scene complexity document
  std::optional<std::string> jnd_features;  // defaults to the sibling "<scene>.jnd.json"
  std::string models_dir;
  std::optional<std::string> jnd_model;     // defaults to "<models_dir>/jnd_svr.json"
  bool no_jnd = false;
  std::string output_dir = ".";
};

struct PredictResult {
  BitrateLadder ladder;
  std::string json_path;
  std::string csv_path;
  std::string summary;
};

PredictResult run_predict_ladder(const PredictRequest& request, const PipelineConfig& config);

/// Loads vmaf_<res>.json / crf_<res>.json for every configured resolution.
ModelTable load_model_table(const std::string& models_dir, const std::string& target, const LadderConfig& ladder);

struct OracleResult {
  std::string output_path;
  nlohmann::json document;
};

/// Convex-hull ladder per scene from an RD CSV
/// (scene_id,ladder_name,resolution,bitrate_kbps,psnr_db,vmaf).
OracleResult run_oracle_ladder(const std::string& csv_path, QualityMetric metric,
                               const std::optional<std::string>& ladder_name, const PipelineConfig& config,
                               const std::string& output_dir);

// --- evaluation ---

struct SceneEvaluation {
  std::string scene_id;
  std::optional<double> bd_rate;
  std::optional<double> bd_quality;
  double delta_s = 0.0;
  std::size_t dropped_reference = 0;
  std::size_t dropped_test = 0;
};

struct EvaluationReport {
  QualityMetric metric = QualityMetric::kVmaf;
  std::vector<SceneEvaluation> scenes;
  std::optional<double> mean_bd_rate;
  std::optional<double> mean_bd_quality;
  double mean_delta_s = 0.0;
  std::vector<std::string> warnings;

  std::string to_csv() const;
  std::string to_table() const;
};

struct RdRow {
  std::string scene_id;
  std::string ladder_name;
  std::string resolution;
  double bitrate_kbps = 0;
  double psnr_db = 0;
  double vmaf = 0;
};

std::vector<RdRow> read_rd_csv(const std::string& path);

EvaluationReport evaluate_rd(const std::vector<RdRow>& reference, const std::vector<RdRow>& test, QualityMetric metric);

EvaluationReport run_evaluate(const std::string& ref_csv, const std::string& test_csv, QualityMetric metric,
                              const PipelineConfig& config, const std::string& output_dir);

void write_text_file(const std::string& path, const std::string& text);
nlohmann::json read_json_file(const std::string& path);

}  // namespace ladderkit::pipeline
