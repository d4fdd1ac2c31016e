#include "ladderkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ladderkit/csv.hpp"
#include "ladderkit/feature_selection.hpp"
#include "ladderkit/media.hpp"
#include "ladderkit/metrics.hpp"
#include "ladderkit/model_io.hpp"

namespace ladderkit::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kDocumentSchemaVersion = 1;

void require_keys(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!doc.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

json forest_to_json(const ForestParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"bootstrap", p.bootstrap}};
}

json svr_to_json(const SvrParams& p) {
  json gamma = p.gamma_mode == GammaMode::kScale ? json("scale") : json(p.gamma);
  return {{"C", p.C},
          {"epsilon", p.epsilon},
          {"gamma", gamma},
          {"tolerance", p.tolerance},
          {"max_iterations", p.max_iterations}};
}

std::string model_path(const std::string& dir, const std::string& target, const std::string& resolution) {
  return (fs::path(dir) / (target + "_" + resolution + ".json")).string();
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

json cv_to_json(const CrossValidationReport& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds) folds.push_back({{"r2", f.r2}, {"mae", f.mae}});
  return {{"folds", folds}, {"mean_r2", cv.mean_r2}, {"mean_mae", cv.mean_mae}};
}

double positive_number(const CsvTable& table, std::size_t row, std::size_t col) {
  const double v = table.number(row, col);
  if (!(v > 0.0)) throw CsvError("column '" + table.header[col] + "' must be positive", table.lines[row]);
  return v;
}

}  // namespace

void PipelineConfig::validate() const {
  ladder.validate();
  forest.validate();
  svr.validate();
  if (analyzer.block_size < 4) throw std::invalid_argument("analyzer.block_size must be at least 4");
  if (analyzer.patch_size < 2) throw std::invalid_argument("analyzer.patch_size must be at least 2");
  if (analyzer.glcm_levels < 0 || analyzer.glcm_levels == 1) {
    throw std::invalid_argument("analyzer.glcm_levels must be 0 or at least 2");
  }
  if (folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (jnd_selection.empty()) throw std::invalid_argument("jnd_selection must not be empty");
  if (threads == 0) throw std::invalid_argument("threads must be at least 1");
}

PipelineConfig config_from_json(const json& doc) {
  require_keys(doc, {"ladder", "analyzer", "random_forest", "svr", "jnd_selection", "folds", "seed", "models_dir",
                     "jnd_model", "threads"},
               "config");
  PipelineConfig c;
  if (doc.contains("ladder")) c.ladder = ladder_config_from_json(doc.at("ladder"));
  if (doc.contains("analyzer")) {
    const auto& a = doc.at("analyzer");
    require_keys(a, {"block_size", "patch_size", "glcm_offset", "glcm_levels"}, "analyzer");
    c.analyzer.block_size = a.value("block_size", c.analyzer.block_size);
    c.analyzer.patch_size = a.value("patch_size", c.analyzer.patch_size);
    c.analyzer.glcm_levels = a.value("glcm_levels", c.analyzer.glcm_levels);
    if (a.contains("glcm_offset")) {
      const auto off = a.at("glcm_offset").get<std::vector<int>>();
      if (off.size() != 2) throw std::invalid_argument("analyzer.glcm_offset must be [dy, dx]");
      c.analyzer.glcm_offset = {off[0], off[1]};
    }
  }
  if (doc.contains("random_forest")) {
    const auto& r = doc.at("random_forest");
    require_keys(r, {"n_estimators", "max_depth", "min_samples_split", "min_samples_leaf", "bootstrap"},
                 "random_forest");
    c.forest.n_estimators = r.value("n_estimators", c.forest.n_estimators);
    c.forest.max_depth = r.value("max_depth", c.forest.max_depth);
    c.forest.min_samples_split = r.value("min_samples_split", c.forest.min_samples_split);
    c.forest.min_samples_leaf = r.value("min_samples_leaf", c.forest.min_samples_leaf);
    c.forest.bootstrap = r.value("bootstrap", c.forest.bootstrap);
  }
  if (doc.contains("svr")) {
    const auto& s = doc.at("svr");
    require_keys(s, {"C", "epsilon", "gamma", "tolerance", "max_iterations"}, "svr");
    c.svr.C = s.value("C", c.svr.C);
    c.svr.epsilon = s.value("epsilon", c.svr.epsilon);
    c.svr.tolerance = s.value("tolerance", c.svr.tolerance);
    c.svr.max_iterations = s.value("max_iterations", c.svr.max_iterations);
    if (s.contains("gamma")) {
      const auto& g = s.at("gamma");
      if (g.is_string()) {
        if (g.get<std::string>() != "scale") throw std::invalid_argument("svr.gamma must be \"scale\" or a number");
        c.svr.gamma_mode = GammaMode::kScale;
      } else {
        c.svr.gamma_mode = GammaMode::kExplicit;
        c.svr.gamma = g.get<double>();
      }
    }
  }
  if (doc.contains("jnd_selection")) c.jnd_selection = doc.at("jnd_selection").get<std::vector<std::string>>();
  c.folds = doc.value("folds", c.folds);
  c.seed = doc.value("seed", c.seed);
  c.models_dir = doc.value("models_dir", c.models_dir);
  c.jnd_model = doc.value("jnd_model", c.jnd_model);
  c.threads = doc.value("threads", c.threads);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  try {
    return config_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
}

json config_to_json(const PipelineConfig& c) {
  return {{"ladder", to_json(c.ladder)},
          {"analyzer",
           {{"block_size", c.analyzer.block_size},
            {"patch_size", c.analyzer.patch_size},
            {"glcm_offset", {c.analyzer.glcm_offset.dy, c.analyzer.glcm_offset.dx}},
            {"glcm_levels", c.analyzer.glcm_levels}}},
          {"random_forest", forest_to_json(c.forest)},
          {"svr", svr_to_json(c.svr)},
          {"jnd_selection", c.jnd_selection},
          {"folds", c.folds},
          {"seed", c.seed},
          {"models_dir", c.models_dir},
          {"jnd_model", c.jnd_model}};
}

std::string config_hash(const PipelineConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json provenance(const PipelineConfig& config) {
  return {{"tool_version", kToolVersion}, {"config_hash", config_hash(config)}, {"seed", config.seed}};
}

void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

// --- analyze ---

SceneClip load_clip(const std::string& path, const std::optional<std::string>& sidecar,
                    const std::optional<std::string>& scene_id) {
  const auto ext = fs::path(path).extension().string();
  const std::string id = scene_id ? *scene_id : fs::path(path).stem().string();
  const auto bytes = read_file_bytes(path);
  if (ext == ".y4m") return parse_y4m(bytes, id);
  if (ext != ".yuv") throw std::invalid_argument("input must be a .y4m or .yuv file: " + path);
  const std::string sidecar_path = sidecar ? *sidecar : path + ".json";
  const auto text = read_file_bytes(sidecar_path);
  auto info = parse_raw_sidecar(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
  if (scene_id) info.scene_id = *scene_id;
  return parse_raw_yuv(bytes, info);
}

json complexity_document(const SceneComplexity& scene, const PipelineConfig& config) {
  json frames = json::array();
  for (const auto& f : scene.per_frame) {
    frames.push_back({{"E_Y", f.planes.E_Y},
                      {"E_U", f.planes.E_U},
                      {"E_V", f.planes.E_V},
                      {"L_Y", f.planes.L_Y},
                      {"L_U", f.planes.L_U},
                      {"L_V", f.planes.L_V},
                      {"h", f.h}});
  }
  json doc;
  doc["schema_version"] = kDocumentSchemaVersion;
  doc["kind"] = "scene_complexity";
  doc["scene_id"] = scene.scene_id;
  doc["formula_version"] = kComplexityFormulaVersion;
  doc["analyzer"] = {{"block_size", scene.block_size}, {"bit_depth", scene.bit_depth}};
  doc["aggregate"] = {{"E_Y", scene.E_Y}, {"h", scene.h},     {"L_Y", scene.L_Y}, {"E_U", scene.E_U},
                      {"E_V", scene.E_V}, {"L_U", scene.L_U}, {"L_V", scene.L_V}};
  doc["frames"] = std::move(frames);
  doc["provenance"] = provenance(config);
  return doc;
}

SceneComplexity complexity_from_document(const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "scene_complexity") {
      throw std::invalid_argument("not a scene complexity document");
    }
    const auto version = doc.at("formula_version").get<std::string>();
    if (version != kComplexityFormulaVersion) {
      throw std::invalid_argument("complexity formula version '" + version + "' does not match '" +
                                  kComplexityFormulaVersion + "'");
    }
    SceneComplexity s;
    s.scene_id = doc.at("scene_id").get<std::string>();
    s.block_size = doc.at("analyzer").at("block_size").get<int>();
    s.bit_depth = doc.at("analyzer").at("bit_depth").get<int>();
    const auto& a = doc.at("aggregate");
    s.E_Y = a.at("E_Y").get<double>();
    s.h = a.at("h").get<double>();
    s.L_Y = a.at("L_Y").get<double>();
    s.E_U = a.at("E_U").get<double>();
    s.E_V = a.at("E_V").get<double>();
    s.L_U = a.at("L_U").get<double>();
    s.L_V = a.at("L_V").get<double>();
    for (const auto& f : doc.at("frames")) {
      FrameComplexity fc;
      fc.planes.E_Y = f.at("E_Y").get<double>();
      fc.planes.E_U = f.at("E_U").get<double>();
      fc.planes.E_V = f.at("E_V").get<double>();
      fc.planes.L_Y = f.at("L_Y").get<double>();
      fc.planes.L_U = f.at("L_U").get<double>();
      fc.planes.L_V = f.at("L_V").get<double>();
      fc.h = f.at("h").get<double>();
      s.per_frame.push_back(fc);
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed complexity document: ") + e.what());
  }
}

json jnd_document(const std::string& scene_id, const JndFeatureVector& vector, const FeaturePool& candidates,
                  int glcm_levels, const PipelineConfig& config) {
  json features = json::array();
  for (std::size_t i = 0; i < vector.names.size(); ++i) {
    features.push_back({{"name", vector.names[i]}, {"value", vector.values[i]}});
  }
  json doc;
  doc["schema_version"] = kDocumentSchemaVersion;
  doc["kind"] = "jnd_features";
  doc["scene_id"] = scene_id;
  doc["features"] = std::move(features);
  doc["glcm"] = {{"patch_size", config.analyzer.patch_size},
                 {"offset", {config.analyzer.glcm_offset.dy, config.analyzer.glcm_offset.dx}},
                 {"levels", glcm_levels},
                 {"symmetric", true},
                 {"normalized", true}};
  doc["pooling"] = {{"std", "population"},
                    {"skew", "biased g1"},
                    {"kurt", "biased excess g2"},
                    {"zero_variance", 0.0}};
  doc["candidates"] = candidates;
  doc["provenance"] = provenance(config);
  return doc;
}

AnalyzeResult run_analyze(const AnalyzeRequest& request, const PipelineConfig& config) {
  config.validate();
  const SceneClip clip = load_clip(request.input, request.sidecar, request.scene_id);
  AnalyzeResult result;
  result.scene_id = clip.scene_id;
  ensure_dir(request.output_dir);

  const auto scene = scene_complexity(clip, {config.analyzer.block_size, config.threads});
  result.complexity_path = join_path(request.output_dir, clip.scene_id + ".complexity.json");
  write_text_file(result.complexity_path, complexity_document(scene, config).dump(2) + "\n");

  if (!request.bitstream) {
    result.warnings.push_back("no bitstream features given for scene " + clip.scene_id +
                              "; JND features were not computed");
    return result;
  }
  const auto text = read_file_bytes(*request.bitstream);
  const auto bitstream =
      parse_bitstream_features(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()),
                               clip.frames.size());
  GlcmOptions glcm_options;
  glcm_options.patch_size = config.analyzer.patch_size;
  glcm_options.offset = config.analyzer.glcm_offset;
  glcm_options.levels = config.analyzer.glcm_levels;
  glcm_options.threads = config.threads;
  const auto glcm = pooled_glcm(clip, glcm_options);
  const auto candidates = merge_feature_pools(pool_scene_features(scene), pool_bitstream_features(bitstream), glcm);
  const auto vector = assemble_jnd_vector(candidates, config.jnd_selection);
  result.jnd_path = join_path(request.output_dir, clip.scene_id + ".jnd.json");
  const int levels = effective_glcm_levels(glcm_options, clip.bit_depth());
  write_text_file(*result.jnd_path, jnd_document(clip.scene_id, vector, candidates, levels, config).dump(2) + "\n");
  return result;
}

// --- training ---

TrainResult run_train_rd(const std::string& csv_path, RdTarget target, const PipelineConfig& config,
                         const std::string& output_dir) {
  config.validate();
  const auto table = read_csv(csv_path);
  const std::string target_name = target == RdTarget::kVmaf ? "vmaf" : "crf";
  const std::size_t c_ey = table.column("E_Y"), c_h = table.column("h"), c_ly = table.column("L_Y");
  const std::size_t c_res = table.column("resolution"), c_b = table.column("bitrate_kbps");
  const std::size_t c_y = table.column(target_name);
  if (table.rows.empty()) throw CsvError("no data rows", 1);

  struct Group {
    Matrix X{0, 4};
    std::vector<double> y;
  };
  std::map<int, std::pair<std::string, Group>> groups;  // by height
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Resolution res;
    try {
      res = parse_resolution(table.text(r, c_res));
    } catch (const std::invalid_argument& e) {
      throw CsvError(e.what(), table.lines[r]);
    }
    SceneFeatures s{table.number(r, c_ey), table.number(r, c_h), table.number(r, c_ly)};
    const auto x = model_input(s, positive_number(table, r, c_b));
    auto& [tag, g] = groups[res.height];
    tag = res.tag;
    g.X.append_row(x);
    g.y.push_back(table.number(r, c_y));
  }

  ensure_dir(output_dir);
  TrainResult result;
  json per_res = json::object();
  for (const auto& [height, entry] : groups) {
    const auto& [tag, g] = entry;
    auto model = rf_train(g.X, g.y, config.forest, config.seed, config.threads);
    model.feature_names = model_input_names();
    model.target_name = target_name;
    model.resolution_tag = tag;
    const auto path = model_path(output_dir, target_name, tag);
    save_model(model, path, provenance(config));
    result.model_paths.push_back(path);

    json r = {{"samples", g.y.size()}, {"model", fs::path(path).filename().string()}};
    if (g.y.size() >= static_cast<std::size_t>(config.folds)) {
      r["cross_validation"] =
          cv_to_json(cross_validate(g.X, g.y, forest_fit_predict(config.forest, config.seed), config.folds, config.seed));
    } else {
      r["cross_validation"] = nullptr;
    }
    per_res[tag] = std::move(r);
  }
  result.report = {{"target", target_name},
                   {"source", fs::path(csv_path).filename().string()},
                   {"resolutions", per_res},
                   {"config", config_to_json(config)},
                   {"provenance", provenance(config)}};
  result.report_path = join_path(output_dir, target_name + "_training_report.json");
  write_text_file(result.report_path, result.report.dump(2) + "\n");
  return result;
}

namespace {

struct FeatureTable {
  std::vector<std::string> names;
  Matrix X;
  std::vector<double> y;
};

FeatureTable read_feature_table(const std::string& csv_path) {
  const auto table = read_csv(csv_path);
  const std::size_t c_t = table.column("c_T");
  table.column("scene_id");
  std::vector<std::size_t> cols;
  FeatureTable out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "scene_id" || table.header[c] == "c_T") continue;
    cols.push_back(c);
    out.names.push_back(table.header[c]);
  }
  if (cols.empty()) throw CsvError("no feature columns", 1);
  if (table.rows.empty()) throw CsvError("no data rows", 1);
  out.X = Matrix(0, cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<double> row;
    for (auto c : cols) row.push_back(table.number(r, c));
    out.X.append_row(row);
    out.y.push_back(table.number(r, c_t));
  }
  return out;
}

}  // namespace

TrainResult run_train_jnd(const std::string& csv_path, const PipelineConfig& config, const std::string& output_dir) {
  config.validate();
  const auto data = read_feature_table(csv_path);
  auto model = svr_train(data.X, data.y, config.svr);
  model.feature_names = data.names;
  model.target_name = "c_T";

  ensure_dir(output_dir);
  TrainResult result;
  const auto path = join_path(output_dir, "jnd_svr.json");
  save_model(model, path, provenance(config));
  result.model_paths.push_back(path);

  json cv = nullptr;
  if (data.y.size() >= static_cast<std::size_t>(config.folds)) {
    cv = cv_to_json(cross_validate(data.X, data.y, svr_fit_predict(config.svr), config.folds, config.seed));
  }
  json warnings = json::array();
  if (!model.converged) {
    warnings.push_back("SVR solver stopped at the iteration cap with KKT violation " +
                       format_number(model.kkt_violation));
  }
  result.report = {{"target", "c_T"},
                   {"source", fs::path(csv_path).filename().string()},
                   {"samples", data.y.size()},
                   {"feature_names", data.names},
                   {"support_vectors", model.coefficients.size()},
                   {"gamma", model.gamma},
                   {"cross_validation", cv},
                   {"warnings", warnings},
                   {"config", config_to_json(config)},
                   {"provenance", provenance(config)}};
  result.report_path = join_path(output_dir, "jnd_training_report.json");
  write_text_file(result.report_path, result.report.dump(2) + "\n");
  return result;
}

SelectResult run_select_features(const std::string& csv_path, std::size_t k, const PipelineConfig& config,
                                 const std::string& output_dir) {
  config.validate();
  const auto data = read_feature_table(csv_path);
  const auto sfs = forward_sfs(data.X, data.y, data.names, k, svr_fit_predict(config.svr), config.folds, config.seed);
  json steps = json::array();
  for (const auto& s : sfs.steps) steps.push_back({{"added", data.names[s.added]}, {"mean_r2", s.score}});
  json doc = {{"selected", sfs.names},
              {"steps", steps},
              {"candidates", data.names.size()},
              {"config", config_to_json(config)},
              {"provenance", provenance(config)}};
  ensure_dir(output_dir);
  SelectResult result{sfs.names, join_path(output_dir, "selected_features.json")};
  write_text_file(result.output_path, doc.dump(2) + "\n");
  return result;
}

// --- ladder prediction ---

ModelTable load_model_table(const std::string& models_dir, const std::string& target, const LadderConfig& ladder) {
  ModelTable table;
  for (const auto& res : ladder.resolutions) {
    const auto path = model_path(models_dir, target, res.tag);
    if (!fs::exists(path)) throw std::invalid_argument("missing " + target + " model for " + res.tag + ": " + path);
    auto model = load_forest(path);
    if (model.feature_names != model_input_names()) {
      throw std::invalid_argument(path + ": model features do not match [E_Y, h, L_Y, log_bitrate]");
    }
    if (model.resolution_tag != res.tag) {
      throw std::invalid_argument(path + ": model was trained for " + model.resolution_tag);
    }
    table.emplace(res.tag, as_regressor(std::move(model)));
  }
  return table;
}

namespace {

JndFeatureVector jnd_vector_for_model(const json& doc, const SvrModel& model) {
  try {
    if (doc.at("kind").get<std::string>() != "jnd_features") throw std::invalid_argument("not a JND feature document");
    JndFeatureVector v;
    for (const auto& f : doc.at("features")) {
      v.names.push_back(f.at("name").get<std::string>());
      v.values.push_back(f.at("value").get<double>());
    }
    if (v.names == model.feature_names) return v;
    if (doc.contains("candidates")) {
      const auto pool = doc.at("candidates").get<FeaturePool>();
      return assemble_jnd_vector(pool, model.feature_names);
    }
    throw std::invalid_argument("JND features do not match the model's feature names");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed JND feature document: ") + e.what());
  }
}

}  // namespace

PredictResult run_predict_ladder(const PredictRequest& request, const PipelineConfig& config) {
  config.validate();
  const auto scene = complexity_from_document(read_json_file(request.features));
  const std::string models_dir = !request.models_dir.empty() ? request.models_dir : config.models_dir;
  if (models_dir.empty()) throw std::invalid_argument("no models directory given");

  const auto vmaf_models = load_model_table(models_dir, "vmaf", config.ladder);
  const auto crf_models = load_model_table(models_dir, "crf", config.ladder);
  PredictResult result;
  result.ladder = build_ladder({scene.E_Y, scene.h, scene.L_Y}, config.ladder, vmaf_models, crf_models);
  result.ladder.scene_id = scene.scene_id;

  if (!request.no_jnd) {
    std::string jnd_model = join_path(models_dir, "jnd_svr.json");
    if (request.jnd_model) {
      jnd_model = *request.jnd_model;
    } else if (!config.jnd_model.empty()) {
      jnd_model = config.jnd_model;
    }
    const std::string jnd_features =
        request.jnd_features
            ? *request.jnd_features
            : (fs::path(request.features).parent_path() / (scene.scene_id + ".jnd.json")).string();
    if (!fs::exists(jnd_features)) {
      throw std::invalid_argument("JND features not found: " + jnd_features + " (use --no-jnd to skip elimination)");
    }
    const auto svr = load_svr(jnd_model);
    const auto vector = jnd_vector_for_model(read_json_file(jnd_features), svr);
    const double c_t = predict_jnd_threshold(vector, svr, config.ladder);
    eliminate_representations(result.ladder, c_t, config.ladder.max_resolution().tag);
  }

  ensure_dir(request.output_dir);
  json doc = to_json(result.ladder);
  doc["schema_version"] = kDocumentSchemaVersion;
  doc["kind"] = "bitrate_ladder";
  doc["features"] = {{"E_Y", scene.E_Y}, {"h", scene.h}, {"L_Y", scene.L_Y}};
  doc["config"] = config_to_json(config);
  doc["provenance"] = provenance(config);
  result.json_path = join_path(request.output_dir, scene.scene_id + ".ladder.json");
  result.csv_path = join_path(request.output_dir, scene.scene_id + ".ladder.csv");
  write_text_file(result.json_path, doc.dump(2) + "\n");
  write_text_file(result.csv_path, ladder_to_csv(result.ladder));

  const std::size_t kept = result.ladder.surviving();
  std::ostringstream s;
  s << "scene " << scene.scene_id << ": " << kept << " kept, " << result.ladder.entries.size() - kept
    << " eliminated";
  if (result.ladder.jnd_threshold) s << ", c_T=" << std::fixed << std::setprecision(1) << *result.ladder.jnd_threshold;
  result.summary = s.str();
  return result;
}

// --- oracle ladder ---

std::vector<RdRow> read_rd_csv(const std::string& path) {
  const auto table = read_csv(path);
  const std::size_t c_scene = table.column("scene_id"), c_res = table.column("resolution");
  const std::size_t c_b = table.column("bitrate_kbps"), c_psnr = table.column("psnr_db"), c_vmaf = table.column("vmaf");
  const bool has_name = table.has_column("ladder_name");
  const std::size_t c_name = has_name ? table.column("ladder_name") : 0;
  std::vector<RdRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    RdRow row;
    row.scene_id = table.text(r, c_scene);
    if (row.scene_id.empty()) throw CsvError("empty scene_id", table.lines[r]);
    if (has_name) row.ladder_name = table.text(r, c_name);
    row.resolution = table.text(r, c_res);
    try {
      parse_resolution(row.resolution);
    } catch (const std::invalid_argument& e) {
      throw CsvError(e.what(), table.lines[r]);
    }
    row.bitrate_kbps = positive_number(table, r, c_b);
    row.psnr_db = table.number(r, c_psnr);
    row.vmaf = table.number(r, c_vmaf);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError("no data rows", 1);
  return rows;
}

namespace {

double quality_of(const RdRow& row, QualityMetric metric) {
  return metric == QualityMetric::kVmaf ? row.vmaf : row.psnr_db;
}

// Scene ids in order of first appearance.
std::vector<std::string> scene_order(const std::vector<RdRow>& rows) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (seen.insert(r.scene_id).second) order.push_back(r.scene_id);
  }
  return order;
}

RdCurve curve_for(const std::vector<RdRow>& rows, const std::string& scene, QualityMetric metric) {
  RdCurve c;
  c.metric = metric;
  for (const auto& r : rows) {
    if (r.scene_id == scene) c.points.push_back({r.bitrate_kbps, quality_of(r, metric)});
  }
  std::sort(c.points.begin(), c.points.end(),
            [](const RdPoint& a, const RdPoint& b) { return a.bitrate_kbps < b.bitrate_kbps; });
  return c;
}

}  // namespace

OracleResult run_oracle_ladder(const std::string& csv_path, QualityMetric metric,
                               const std::optional<std::string>& ladder_name, const PipelineConfig& config,
                               const std::string& output_dir) {
  config.validate();
  auto rows = read_rd_csv(csv_path);
  if (ladder_name) {
    std::erase_if(rows, [&](const RdRow& r) { return r.ladder_name != *ladder_name; });
    if (rows.empty()) throw std::invalid_argument("no RD rows for ladder '" + *ladder_name + "'");
  }
  json scenes = json::array();
  std::ostringstream csv;
  csv << "scene_id,resolution,bitrate_kbps,quality\n";
  for (const auto& scene : scene_order(rows)) {
    std::vector<RdSample> samples;
    for (const auto& r : rows) {
      if (r.scene_id == scene) samples.push_back({r.resolution, r.bitrate_kbps, quality_of(r, metric)});
    }
    std::vector<HullEntry> hull;
    try {
      hull = convex_hull_ladder(samples, config.ladder.bitrates_kbps);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("scene " + scene + ": " + e.what());
    }
    json entries = json::array();
    for (const auto& e : hull) {
      entries.push_back({{"resolution", e.resolution}, {"bitrate_kbps", e.bitrate_kbps}, {"quality", e.quality}});
      csv << scene << ',' << e.resolution << ',' << format_number(e.bitrate_kbps) << ',' << format_number(e.quality)
          << '\n';
    }
    scenes.push_back({{"scene_id", scene}, {"entries", entries}});
  }
  OracleResult result;
  result.document = {{"schema_version", kDocumentSchemaVersion},
                     {"kind", "oracle_ladder"},
                     {"metric", std::string(to_string(metric))},
                     {"scenes", scenes},
                     {"config", config_to_json(config)},
                     {"provenance", provenance(config)}};
  ensure_dir(output_dir);
  result.output_path = join_path(output_dir, "oracle_ladder.json");
  write_text_file(result.output_path, result.document.dump(2) + "\n");
  write_text_file(join_path(output_dir, "oracle_ladder.csv"), csv.str());
  return result;
}

// --- evaluation ---

EvaluationReport evaluate_rd(const std::vector<RdRow>& reference, const std::vector<RdRow>& test,
                             QualityMetric metric) {
  EvaluationReport report;
  report.metric = metric;
  const auto ref_scenes = scene_order(reference);
  const auto test_scenes = scene_order(test);
  for (const auto& s : test_scenes) {
    if (std::find(ref_scenes.begin(), ref_scenes.end(), s) == ref_scenes.end()) {
      throw std::invalid_argument("scene " + s + " is missing from the reference ladder");
    }
  }
  double sum_rate = 0, sum_quality = 0, sum_delta = 0;
  std::size_t n_bd = 0;
  for (const auto& scene : ref_scenes) {
    if (std::find(test_scenes.begin(), test_scenes.end(), scene) == test_scenes.end()) {
      throw std::invalid_argument("scene " + scene + " is missing from the test ladder");
    }
    const auto ref = curve_for(reference, scene, metric);
    const auto tst = curve_for(test, scene, metric);
    SceneEvaluation ev;
    ev.scene_id = scene;
    std::vector<double> ref_b, test_b;
    for (const auto& p : ref.points) ref_b.push_back(p.bitrate_kbps);
    for (const auto& p : tst.points) test_b.push_back(p.bitrate_kbps);
    ev.delta_s = storage_delta(ref_b, test_b);
    try {
      const auto rate = bd_rate(ref, tst);
      const auto quality = bd_quality(ref, tst);
      ev.bd_rate = rate.value;
      ev.bd_quality = quality.value;
      ev.dropped_reference = rate.dropped_reference;
      ev.dropped_test = rate.dropped_test;
      for (const auto& w : rate.warnings) report.warnings.push_back("scene " + scene + ": " + w);
      sum_rate += rate.value;
      sum_quality += quality.value;
      ++n_bd;
    } catch (const std::invalid_argument& e) {
      report.warnings.push_back("scene " + scene + ": Bjontegaard metrics unavailable: " + e.what());
    }
    sum_delta += ev.delta_s;
    report.scenes.push_back(std::move(ev));
  }
  if (n_bd > 0) {
    report.mean_bd_rate = sum_rate / static_cast<double>(n_bd);
    report.mean_bd_quality = sum_quality / static_cast<double>(n_bd);
  }
  if (!report.scenes.empty()) report.mean_delta_s = sum_delta / static_cast<double>(report.scenes.size());
  return report;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string fixed(const std::optional<double>& v, int digits) {
  if (!v) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << *v;
  return s.str();
}

}  // namespace

std::string EvaluationReport::to_csv() const {
  std::ostringstream out;
  const std::string m(to_string(metric));
  out << "scene_id,bd_rate_pct,bd_" << m << ",delta_s,dropped_reference,dropped_test\n";
  for (const auto& s : scenes) {
    out << s.scene_id << ',' << opt_number(s.bd_rate) << ',' << opt_number(s.bd_quality) << ','
        << format_number(s.delta_s) << ',' << s.dropped_reference << ',' << s.dropped_test << '\n';
  }
  out << "mean," << opt_number(mean_bd_rate) << ',' << opt_number(mean_bd_quality) << ',' << format_number(mean_delta_s)
      << ",,\n";
  return out.str();
}

std::string EvaluationReport::to_table() const {
  std::size_t width = 5;
  for (const auto& s : scenes) width = std::max(width, s.scene_id.size());
  const std::string m(to_string(metric));
  std::ostringstream out;
  auto row = [&](const std::string& id, const std::string& a, const std::string& b, const std::string& c) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << id << std::right << std::setw(12) << a
        << std::setw(12) << b << std::setw(12) << c << '\n';
  };
  row("scene", "BD-rate %", "BD-" + m, "dS %");
  for (const auto& s : scenes) {
    row(s.scene_id, fixed(s.bd_rate, 2), fixed(s.bd_quality, 3), fixed(s.delta_s * 100.0, 2));
  }
  row("mean", fixed(mean_bd_rate, 2), fixed(mean_bd_quality, 3), fixed(mean_delta_s * 100.0, 2));
  return out.str();
}

EvaluationReport run_evaluate(const std::string& ref_csv, const std::string& test_csv, QualityMetric metric,
                              const PipelineConfig& config, const std::string& output_dir) {
  auto report = evaluate_rd(read_rd_csv(ref_csv), read_rd_csv(test_csv), metric);
  json scenes = json::array();
  for (const auto& s : report.scenes) {
    scenes.push_back({{"scene_id", s.scene_id},
                      {"bd_rate_pct", s.bd_rate ? json(*s.bd_rate) : json(nullptr)},
                      {"bd_quality", s.bd_quality ? json(*s.bd_quality) : json(nullptr)},
                      {"delta_s", s.delta_s},
                      {"dropped_reference", s.dropped_reference},
                      {"dropped_test", s.dropped_test}});
  }
  json doc = {{"schema_version", kDocumentSchemaVersion},
              {"kind", "evaluation"},
              {"metric", std::string(to_string(metric))},
              {"scenes", scenes},
              {"mean",
               {{"bd_rate_pct", report.mean_bd_rate ? json(*report.mean_bd_rate) : json(nullptr)},
                {"bd_quality", report.mean_bd_quality ? json(*report.mean_bd_quality) : json(nullptr)},
                {"delta_s", report.mean_delta_s}}},
              {"warnings", report.warnings},
              {"provenance", provenance(config)}};
  ensure_dir(output_dir);
  write_text_file(join_path(output_dir, "evaluation.json"), doc.dump(2) + "\n");
  write_text_file(join_path(output_dir, "evaluation.csv"), report.to_csv());
  return report;
}

}  // namespace ladderkit::pipeline
