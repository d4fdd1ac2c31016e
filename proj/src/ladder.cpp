#include "ladderkit/ladder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "ladderkit/csv.hpp"

namespace ladderkit {

Resolution parse_resolution(std::string_view tag) {
  int height = 0;
  if (tag.size() < 2 || tag.back() != 'p') {
    throw std::invalid_argument("resolution tag must look like '1080p', got '" + std::string(tag) + "'");
  }
  auto [ptr, ec] = std::from_chars(tag.data(), tag.data() + tag.size() - 1, height);
  if (ec != std::errc{} || ptr != tag.data() + tag.size() - 1 || height <= 0) {
    throw std::invalid_argument("resolution tag must look like '1080p', got '" + std::string(tag) + "'");
  }
  return {std::string(tag), height};
}

void LadderConfig::validate() const {
  if (resolutions.empty()) throw std::invalid_argument("ladder config needs at least one resolution");
  if (bitrates_kbps.empty()) throw std::invalid_argument("ladder config needs at least one bitrate");
  for (std::size_t i = 1; i < resolutions.size(); ++i) {
    if (resolutions[i].height <= resolutions[i - 1].height) {
      throw std::invalid_argument("resolutions must be strictly ascending");
    }
  }
  for (std::size_t i = 0; i < bitrates_kbps.size(); ++i) {
    if (!(bitrates_kbps[i] > 0.0)) throw std::invalid_argument("bitrates must be positive");
    if (i > 0 && bitrates_kbps[i] <= bitrates_kbps[i - 1]) {
      throw std::invalid_argument("bitrates must be strictly ascending");
    }
  }
  if (!(crf_min >= 0.0 && crf_min < crf_max)) throw std::invalid_argument("need 0 <= crf_min < crf_max");
}

LadderConfig LadderConfig::hls_default() {
  LadderConfig c;
  for (auto tag : {"360p", "432p", "540p", "720p", "1080p"}) c.resolutions.push_back(parse_resolution(tag));
  c.bitrates_kbps = {145, 300, 600, 900, 1600, 2400, 3400, 4500, 5800, 8100};
  c.crf_min = 0.0;
  c.crf_max = 51.0;
  return c;
}

nlohmann::json to_json(const LadderConfig& config) {
  std::vector<std::string> tags;
  for (const auto& r : config.resolutions) tags.push_back(r.tag);
  return {{"resolutions", tags},
          {"bitrates_kbps", config.bitrates_kbps},
          {"crf_min", config.crf_min},
          {"crf_max", config.crf_max}};
}

LadderConfig ladder_config_from_json(const nlohmann::json& doc) {
  LadderConfig c = LadderConfig::hls_default();
  if (doc.contains("resolutions")) {
    c.resolutions.clear();
    for (const auto& t : doc.at("resolutions")) c.resolutions.push_back(parse_resolution(t.get<std::string>()));
  }
  if (doc.contains("bitrates_kbps")) c.bitrates_kbps = doc.at("bitrates_kbps").get<std::vector<double>>();
  c.crf_min = doc.value("crf_min", c.crf_min);
  c.crf_max = doc.value("crf_max", c.crf_max);
  c.validate();
  return c;
}

std::vector<double> model_input(const SceneFeatures& scene, double bitrate_kbps) {
  if (!(bitrate_kbps > 0.0)) throw std::invalid_argument("bitrate must be positive");
  return {scene.E_Y, scene.h, scene.L_Y, std::log(bitrate_kbps)};
}

const std::vector<std::string>& model_input_names() {
  static const std::vector<std::string> names{"E_Y", "h", "L_Y", "log_bitrate"};
  return names;
}

Regressor as_regressor(RandomForestModel model) {
  auto shared = std::make_shared<const RandomForestModel>(std::move(model));
  return [shared](std::span<const double> x) { return rf_predict(*shared, x); };
}

std::vector<double> VmafGrid::column(std::size_t t) const {
  std::vector<double> out(rows);
  for (std::size_t m = 0; m < rows; ++m) out[m] = at(m, t);
  return out;
}

namespace {

const Regressor& find_model(const ModelTable& table, const std::string& resolution, const char* kind) {
  auto it = table.find(resolution);
  if (it == table.end() || !it->second) {
    throw std::invalid_argument(std::string("no ") + kind + " model for resolution " + resolution);
  }
  return it->second;
}

}  // namespace

VmafGrid predict_vmaf_grid(const SceneFeatures& scene, const LadderConfig& config, const ModelTable& vmaf_models) {
  config.validate();
  VmafGrid grid;
  grid.rows = config.resolutions.size();
  grid.cols = config.bitrates_kbps.size();
  grid.values.resize(grid.rows * grid.cols);
  for (std::size_t m = 0; m < grid.rows; ++m) {
    const auto& model = find_model(vmaf_models, config.resolutions[m].tag, "VMAF");
    for (std::size_t t = 0; t < grid.cols; ++t) {
      const auto x = model_input(scene, config.bitrates_kbps[t]);
      grid.values[m * grid.cols + t] = std::clamp(model(x), 0.0, 100.0);
    }
  }
  return grid;
}

std::size_t select_resolution(std::span<const double> column) {
  if (column.empty()) throw std::invalid_argument("cannot select from an empty column");
  std::size_t best = 0;
  for (std::size_t m = 1; m < column.size(); ++m) {
    if (column[m] > column[best]) best = m;
  }
  return best;
}

double predict_crf(const SceneFeatures& scene, const std::string& resolution, double bitrate_kbps,
                   const ModelTable& crf_models, const LadderConfig& config) {
  const auto& model = find_model(crf_models, resolution, "CRF");
  return std::clamp(model(model_input(scene, bitrate_kbps)), config.crf_min, config.crf_max);
}

std::size_t BitrateLadder::surviving() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const LadderEntry& e) { return !e.eliminated; }));
}

std::vector<double> BitrateLadder::surviving_bitrates() const {
  std::vector<double> out;
  for (const auto& e : entries) {
    if (!e.eliminated) out.push_back(e.bitrate_kbps);
  }
  return out;
}

BitrateLadder build_ladder(const SceneFeatures& scene, const LadderConfig& config, const ModelTable& vmaf_models,
                           const ModelTable& crf_models) {
  const VmafGrid grid = predict_vmaf_grid(scene, config, vmaf_models);
  BitrateLadder ladder;
  for (std::size_t t = 0; t < grid.cols; ++t) {
    const auto column = grid.column(t);
    const std::size_t m = select_resolution(column);
    const auto& res = config.resolutions[m].tag;
    const double b = config.bitrates_kbps[t];
    ladder.entries.push_back({res, b, predict_crf(scene, res, b, crf_models, config), column[m], false});
  }
  return ladder;
}

double predict_jnd_threshold(const JndFeatureVector& features, const SvrModel& model, const LadderConfig& config) {
  if (features.names != model.feature_names) {
    throw std::invalid_argument("JND feature names do not match the model's feature names");
  }
  return std::clamp(svr_predict(model, features.values), config.crf_min, config.crf_max);
}

void eliminate_representations(BitrateLadder& ladder, double jnd_threshold, const std::string& max_resolution) {
  int flag = 0;
  for (auto& e : ladder.entries) {
    if (e.resolution == max_resolution && e.crf < jnd_threshold) ++flag;
    if (flag > 1) e.eliminated = true;
  }
  ladder.jnd_threshold = jnd_threshold;
}

std::optional<double> interpolate_quality(std::span<const RdSample> pts, double bitrate_kbps) {
  if (pts.size() < 2) return std::nullopt;
  if (bitrate_kbps < pts.front().bitrate_kbps || bitrate_kbps > pts.back().bitrate_kbps) return std::nullopt;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    if (bitrate_kbps <= b.bitrate_kbps) {
      if (bitrate_kbps == b.bitrate_kbps) return b.quality;
      const double t = (bitrate_kbps - a.bitrate_kbps) / (b.bitrate_kbps - a.bitrate_kbps);
      return a.quality + t * (b.quality - a.quality);
    }
  }
  return std::nullopt;
}

std::vector<HullEntry> convex_hull_ladder(std::span<const RdSample> samples, std::span<const double> bitrates_kbps) {
  std::map<int, std::vector<RdSample>> by_height;
  for (const auto& s : samples) by_height[parse_resolution(s.resolution).height].push_back(s);
  for (auto& [h, pts] : by_height) {
    std::sort(pts.begin(), pts.end(),
              [](const RdSample& a, const RdSample& b) { return a.bitrate_kbps < b.bitrate_kbps; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].bitrate_kbps == pts[i - 1].bitrate_kbps) {
        throw std::invalid_argument("duplicate bitrate in RD points for " + pts[i].resolution);
      }
    }
  }
  std::vector<HullEntry> out;
  for (double b : bitrates_kbps) {
    std::optional<HullEntry> best;
    for (const auto& [h, pts] : by_height) {
      const auto q = interpolate_quality(pts, b);
      if (q && (!best || *q > best->quality)) best = HullEntry{pts.front().resolution, b, *q};
    }
    if (!best) {
      throw std::invalid_argument("bitrate " + format_number(b) + " kbps lies outside every resolution's RD range");
    }
    out.push_back(*best);
  }
  return out;
}

nlohmann::json to_json(const BitrateLadder& ladder) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : ladder.entries) {
    entries.push_back({{"resolution", e.resolution},
                       {"bitrate_kbps", e.bitrate_kbps},
                       {"crf", e.crf},
                       {"predicted_vmaf", e.predicted_vmaf},
                       {"eliminated", e.eliminated}});
  }
  nlohmann::json doc;
  doc["scene_id"] = ladder.scene_id;
  doc["c_T"] = ladder.jnd_threshold ? nlohmann::json(*ladder.jnd_threshold) : nlohmann::json(nullptr);
  doc["entries"] = std::move(entries);
  return doc;
}

std::string ladder_to_csv(const BitrateLadder& ladder) {
  std::ostringstream out;
  out << "scene_id,resolution,bitrate_kbps,crf,predicted_vmaf,eliminated\n";
  for (const auto& e : ladder.entries) {
    out << ladder.scene_id << ',' << e.resolution << ',' << format_number(e.bitrate_kbps) << ','
        << format_number(e.crf) << ',' << format_number(e.predicted_vmaf) << ',' << (e.eliminated ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace ladderkit
