#include <cmath>
#include <stdexcept>

#include "ladderkit/jnd_features.hpp"

namespace ladderkit {

namespace {

double required_number(const nlohmann::json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) throw std::invalid_argument(where + ": missing field '" + field + "'");
  if (!it->is_number()) throw std::invalid_argument(where + ": field '" + field + "' is not a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(where + ": field '" + field + "' is not finite");
  return v;
}

}  // namespace

BitstreamSeries parse_bitstream_features(std::string_view json_text,
                                         std::optional<std::size_t> expected_frames) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("bitstream features: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("bitstream features: document must be an object");

  BitstreamSeries series;
  series.framerate = required_number(doc, "framerate", "bitstream features");
  series.bitrate_kbps = required_number(doc, "bitrate_kbps", "bitstream features");
  auto frames = doc.find("frames");
  if (frames == doc.end() || !frames->is_array()) {
    throw std::invalid_argument("bitstream features: missing field 'frames'");
  }
  for (std::size_t i = 0; i < frames->size(); ++i) {
    const auto& rec = (*frames)[i];
    const std::string where = "bitstream features: frame " + std::to_string(i);
    if (!rec.is_object()) throw std::invalid_argument(where + ": record must be an object");
    series.frames.push_back({required_number(rec, "frame_size_bytes", where),
                             required_number(rec, "AvMotionX", where),
                             required_number(rec, "AvMotionY", where),
                             required_number(rec, "SpatialComplexity", where)});
  }
  if (series.frames.empty()) throw std::invalid_argument("bitstream features: no frames");

  if (auto declared = doc.find("frame_count"); declared != doc.end()) {
    const auto n = declared->get<std::size_t>();
    if (n != series.frames.size()) {
      throw std::invalid_argument("bitstream features: length mismatch, declared frame_count " +
                                  std::to_string(n) + " but found " +
                                  std::to_string(series.frames.size()) + " frames");
    }
  }
  if (expected_frames && *expected_frames != series.frames.size()) {
    throw std::invalid_argument("bitstream features: length mismatch, scene has " +
                                std::to_string(*expected_frames) + " frames but file has " +
                                std::to_string(series.frames.size()));
  }
  return series;
}

std::string serialize_bitstream_features(const BitstreamSeries& series) {
  nlohmann::json doc;
  doc["framerate"] = series.framerate;
  doc["bitrate_kbps"] = series.bitrate_kbps;
  doc["frame_count"] = series.frames.size();
  auto& frames = doc["frames"] = nlohmann::json::array();
  for (const auto& f : series.frames) {
    frames.push_back({{"frame_size_bytes", f.frame_size_bytes},
                      {"AvMotionX", f.av_motion_x},
                      {"AvMotionY", f.av_motion_y},
                      {"SpatialComplexity", f.spatial_complexity}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ladderkit
