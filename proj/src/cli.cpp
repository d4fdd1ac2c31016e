#include "ladderkit/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "ladderkit/csv.hpp"
#include "ladderkit/media.hpp"
#include "ladderkit/model_io.hpp"
#include "ladderkit/pipeline.hpp"

namespace ladderkit::cli {

using nlohmann::json;
namespace pl = ladderkit::pipeline;

namespace {

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string output_dir = ".";
  std::optional<int> block_size;
  std::optional<int> patch_size;
  std::optional<int> glcm_levels;
};

pl::PipelineConfig effective_config(const GlobalOptions& g) {
  auto cfg = g.config ? pl::load_config(*g.config) : pl::PipelineConfig{};
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.block_size) cfg.analyzer.block_size = *g.block_size;
  if (g.patch_size) cfg.analyzer.patch_size = *g.patch_size;
  if (g.glcm_levels) cfg.analyzer.glcm_levels = *g.glcm_levels;
  cfg.validate();
  return cfg;
}

void print_cv(std::ostream& out, const std::string& label, const json& cv) {
  out << label << ": ";
  if (cv.is_null()) {
    out << "too few samples for cross-validation\n";
    return;
  }
  out << "mean R2 " << format_number(cv.at("mean_r2").get<double>()) << ", mean MAE "
      << format_number(cv.at("mean_mae").get<double>()) << " over " << cv.at("folds").size() << " folds\n";
}

void report_error(std::ostream& err, const std::string& command, const std::exception& e) {
  json doc = {{"error", e.what()}, {"command", command}};
  if (const auto* csv = dynamic_cast<const CsvError*>(&e)) doc["line"] = csv->line();
  if (const auto* parse = dynamic_cast<const ParseError*>(&e)) doc["byte_offset"] = parse->offset();
  err << doc.dump() << '\n';
}

}  // namespace

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-scene bitrate ladder prediction and evaluation"};
  app.set_version_flag("--version", pl::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed for training and cross-validation");
  app.add_option("--threads", g.threads, "Worker threads (does not change results)")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory for output files");

  // analyze
  pl::AnalyzeRequest analyze;
  std::string sidecar, scene_id, bitstream;
  auto* cmd_analyze = app.add_subcommand("analyze", "Compute complexity and JND features for one scene");
  cmd_analyze->add_option("input", analyze.input, "Scene video (.y4m, or .yuv with a JSON sidecar)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_analyze->add_option("--sidecar", sidecar, "JSON sidecar for raw .yuv input")->check(CLI::ExistingFile);
  cmd_analyze->add_option("--scene-id", scene_id, "Scene identifier (default: file stem)");
  cmd_analyze->add_option("--bitstream", bitstream, "Per-frame bitstream features (JSON)")->check(CLI::ExistingFile);
  cmd_analyze->add_option("--block-size", g.block_size, "DCT block size");
  cmd_analyze->add_option("--patch-size", g.patch_size, "GLCM patch size");
  cmd_analyze->add_option("--glcm-levels", g.glcm_levels, "GLCM gray levels (default 2^bit_depth)");

  // training
  std::string data;
  auto* cmd_vmaf = app.add_subcommand("train-vmaf", "Train per-resolution VMAF forests");
  auto* cmd_crf = app.add_subcommand("train-crf", "Train per-resolution CRF forests");
  auto* cmd_jnd = app.add_subcommand("train-jnd", "Train the JND threshold regressor");
  auto* cmd_select = app.add_subcommand("select-features", "Forward feature selection for the JND regressor");
  for (auto* c : {cmd_vmaf, cmd_crf, cmd_jnd, cmd_select}) {
    c->add_option("data", data, "Training CSV")->required()->check(CLI::ExistingFile);
  }
  std::size_t k = 15;
  cmd_select->add_option("-k,--count", k, "Number of features to select")->check(CLI::PositiveNumber);

  // predict-ladder
  pl::PredictRequest predict;
  std::string jnd_features, jnd_model;
  auto* cmd_predict = app.add_subcommand("predict-ladder", "Predict a bitrate ladder for one scene");
  cmd_predict->add_option("features", predict.features, "Scene complexity file from 'analyze'")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_predict->add_option("--models", predict.models_dir, "Directory with vmaf_<res>.json and crf_<res>.json");
  cmd_predict->add_option("--jnd-features", jnd_features, "JND feature file (default: sibling <scene>.jnd.json)");
  cmd_predict->add_option("--jnd-model", jnd_model, "JND model (default: <models>/jnd_svr.json)");
  cmd_predict->add_flag("--no-jnd", predict.no_jnd, "Skip JND-based elimination");

  // oracle-ladder
  std::string rd_csv, metric_name = "vmaf", ladder_name;
  auto* cmd_oracle = app.add_subcommand("oracle-ladder", "Convex-hull ladder from measured RD points");
  cmd_oracle->add_option("rd", rd_csv, "RD CSV")->required()->check(CLI::ExistingFile);
  cmd_oracle->add_option("--metric", metric_name, "vmaf or psnr")->check(CLI::IsMember({"vmaf", "psnr"}));
  cmd_oracle->add_option("--ladder-name", ladder_name, "Only use rows with this ladder_name");

  // evaluate
  std::string ref_csv, test_csv;
  auto* cmd_eval = app.add_subcommand("evaluate", "BD-rate, BD-quality and storage change of a test ladder");
  cmd_eval->add_option("--ref", ref_csv, "Reference ladder RD CSV")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--test", test_csv, "Test ladder RD CSV")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--metric", metric_name, "vmaf or psnr")->check(CLI::IsMember({"vmaf", "psnr"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    const auto cfg = effective_config(g);
    if (sub == cmd_analyze) {
      if (!sidecar.empty()) analyze.sidecar = sidecar;
      if (!scene_id.empty()) analyze.scene_id = scene_id;
      if (!bitstream.empty()) analyze.bitstream = bitstream;
      analyze.output_dir = g.output_dir;
      const auto r = pl::run_analyze(analyze, cfg);
      for (const auto& w : r.warnings) err << "warning: " << w << '\n';
      out << r.complexity_path << '\n';
      if (r.jnd_path) out << *r.jnd_path << '\n';
    } else if (sub == cmd_vmaf || sub == cmd_crf) {
      const auto target = sub == cmd_vmaf ? pl::RdTarget::kVmaf : pl::RdTarget::kCrf;
      const auto r = pl::run_train_rd(data, target, cfg, g.output_dir);
      for (const auto& [tag, res] : r.report.at("resolutions").items()) {
        print_cv(out, tag + " (" + std::to_string(res.at("samples").get<std::size_t>()) + " samples)",
                 res.at("cross_validation"));
      }
      out << r.report_path << '\n';
    } else if (sub == cmd_jnd) {
      const auto r = pl::run_train_jnd(data, cfg, g.output_dir);
      for (const auto& w : r.report.at("warnings")) err << "warning: " << w.get<std::string>() << '\n';
      print_cv(out, "c_T", r.report.at("cross_validation"));
      out << r.model_paths.front() << '\n';
    } else if (sub == cmd_select) {
      const auto r = pl::run_select_features(data, k, cfg, g.output_dir);
      for (std::size_t i = 0; i < r.selected.size(); ++i) out << i + 1 << ". " << r.selected[i] << '\n';
      out << r.output_path << '\n';
    } else if (sub == cmd_predict) {
      if (!jnd_features.empty()) predict.jnd_features = jnd_features;
      if (!jnd_model.empty()) predict.jnd_model = jnd_model;
      predict.output_dir = g.output_dir;
      const auto r = pl::run_predict_ladder(predict, cfg);
      out << r.summary << '\n';
    } else if (sub == cmd_oracle) {
      std::optional<std::string> name;
      if (!ladder_name.empty()) name = ladder_name;
      const auto r = pl::run_oracle_ladder(rd_csv, parse_quality_metric(metric_name), name, cfg, g.output_dir);
      out << r.output_path << '\n';
    } else if (sub == cmd_eval) {
      const auto r = pl::run_evaluate(ref_csv, test_csv, parse_quality_metric(metric_name), cfg, g.output_dir);
      for (const auto& w : r.warnings) err << "warning: " << w << '\n';
      out << r.to_table();
    }
  } catch (const std::exception& e) {
    report_error(err, command, e);
    return 1;
  }
  return 0;
}

}  // namespace ladderkit::cli
