#include "ladderkit/media.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace ladderkit {

namespace {

struct ChromaTag {
  ChromaFormat format;
  int bit_depth;
};

bool parse_chroma_tag(std::string_view tag, ChromaTag& out) {
  int depth = 8;
  std::string_view base = tag;
  if (auto p = tag.find('p'); p != std::string_view::npos && p + 1 < tag.size() &&
                              std::isdigit(static_cast<unsigned char>(tag[p + 1]))) {
    base = tag.substr(0, p);
    auto digits = tag.substr(p + 1);
    if (std::from_chars(digits.data(), digits.data() + digits.size(), depth).ec != std::errc{}) {
      return false;
    }
  }
  if (depth != 8 && depth != 10) return false;
  if (base == "420" || base == "420jpeg" || base == "420paldv" || base == "420mpeg2") {
    out = {ChromaFormat::k420, depth};
  } else if (base == "422") {
    out = {ChromaFormat::k422, depth};
  } else if (base == "444") {
    out = {ChromaFormat::k444, depth};
  } else {
    return false;
  }
  if (depth != 8 && base != "420" && base != "422" && base != "444") return false;
  return true;
}

std::string canonical_chroma_tag(ChromaFormat format, int bit_depth) {
  std::string tag{to_string(format)};
  tag.erase(std::remove(tag.begin(), tag.end(), ':'), tag.end());
  if (bit_depth != 8) tag += "p" + std::to_string(bit_depth);
  return tag;
}

int parse_int_tag(std::string_view value, std::size_t offset, const char* what) {
  int result = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
  if (ec != std::errc{} || ptr != value.data() + value.size() || result <= 0) {
    throw ParseError(std::string("malformed ") + what + " parameter '" + std::string(value) + "'",
                     offset);
  }
  return result;
}

std::size_t bytes_per_sample(int bit_depth) { return bit_depth > 8 ? 2 : 1; }

void decode_plane(const std::uint8_t* data, int bit_depth, Plane& plane) {
  const std::size_t count = plane.samples.size();
  if (bit_depth > 8) {
    for (std::size_t i = 0; i < count; ++i) {
      plane.samples[i] = static_cast<std::uint16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    }
  } else {
    std::copy(data, data + count, plane.samples.begin());
  }
}

void encode_plane(const Plane& plane, int bit_depth, std::vector<std::uint8_t>& out) {
  if (bit_depth > 8) {
    for (auto s : plane.samples) {
      out.push_back(static_cast<std::uint8_t>(s & 0xff));
      out.push_back(static_cast<std::uint8_t>(s >> 8));
    }
  } else {
    for (auto s : plane.samples) out.push_back(static_cast<std::uint8_t>(s));
  }
}

// Decodes one frame payload starting at `data`; caller guarantees size.
PlanarFrame decode_frame(const std::uint8_t* data, int width, int height, int bit_depth,
                         ChromaFormat chroma) {
  PlanarFrame frame = PlanarFrame::blank(width, height, bit_depth, chroma);
  const std::size_t bps = bytes_per_sample(bit_depth);
  decode_plane(data, bit_depth, frame.y);
  data += frame.y.samples.size() * bps;
  decode_plane(data, bit_depth, frame.u);
  data += frame.u.samples.size() * bps;
  decode_plane(data, bit_depth, frame.v);
  return frame;
}

void encode_frame(const PlanarFrame& frame, std::vector<std::uint8_t>& out) {
  encode_plane(frame.y, frame.bit_depth, out);
  encode_plane(frame.u, frame.bit_depth, out);
  encode_plane(frame.v, frame.bit_depth, out);
}

std::string framerate_text(const Framerate& f) {
  return std::to_string(f.num) + ":" + std::to_string(f.den);
}

}  // namespace

std::string_view to_string(ChromaFormat format) {
  switch (format) {
    case ChromaFormat::k420: return "4:2:0";
    case ChromaFormat::k422: return "4:2:2";
    case ChromaFormat::k444: return "4:4:4";
  }
  return "?";
}

ChromaFormat parse_chroma_format(std::string_view text) {
  if (text == "4:2:0" || text == "420") return ChromaFormat::k420;
  if (text == "4:2:2" || text == "422") return ChromaFormat::k422;
  if (text == "4:4:4" || text == "444") return ChromaFormat::k444;
  throw std::invalid_argument("unsupported chroma format '" + std::string(text) + "'");
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

Plane::Plane(int w, int h, std::uint16_t fill)
    : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

int chroma_width(int width, ChromaFormat chroma) {
  return chroma == ChromaFormat::k444 ? width : (width + 1) / 2;
}

int chroma_height(int height, ChromaFormat chroma) {
  return chroma == ChromaFormat::k420 ? (height + 1) / 2 : height;
}

std::size_t frame_byte_size(int width, int height, int bit_depth, ChromaFormat chroma) {
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  const std::size_t chroma_samples =
      static_cast<std::size_t>(chroma_width(width, chroma)) * chroma_height(height, chroma);
  return (luma + 2 * chroma_samples) * bytes_per_sample(bit_depth);
}

PlanarFrame PlanarFrame::blank(int width, int height, int bit_depth, ChromaFormat chroma,
                               std::uint16_t fill) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame dimensions must be positive");
  if (bit_depth != 8 && bit_depth != 10) throw std::invalid_argument("bit depth must be 8 or 10");
  PlanarFrame f;
  f.width = width;
  f.height = height;
  f.bit_depth = bit_depth;
  f.chroma = chroma;
  f.y = Plane(width, height, fill);
  const int cw = chroma_width(width, chroma);
  const int ch = chroma_height(height, chroma);
  f.u = Plane(cw, ch, fill);
  f.v = Plane(cw, ch, fill);
  return f;
}

void PlanarFrame::validate() const {
  if (bit_depth != 8 && bit_depth != 10) throw std::invalid_argument("bit depth must be 8 or 10");
  if (y.width != width || y.height != height ||
      y.samples.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("luma plane does not match frame dimensions");
  }
  const int cw = chroma_width(width, chroma);
  const int ch = chroma_height(height, chroma);
  for (const Plane* p : {&u, &v}) {
    if (p->width != cw || p->height != ch ||
        p->samples.size() != static_cast<std::size_t>(cw) * ch) {
      throw std::invalid_argument("chroma plane does not match chroma format");
    }
  }
  const std::uint32_t limit = 1u << bit_depth;
  for (const Plane* p : {&y, &u, &v}) {
    for (auto s : p->samples) {
      if (s >= limit) throw std::invalid_argument("sample value exceeds bit depth");
    }
  }
}

Framerate Framerate::from_fps(double fps) {
  if (!(fps > 0.0)) throw std::invalid_argument("framerate must be positive");
  const double rounded = std::round(fps);
  if (std::abs(fps - rounded) < 1e-9) return {static_cast<int>(rounded), 1};
  const double ntsc = std::round(fps * 1.001);
  if (std::abs(fps - ntsc * 1000.0 / 1001.0) < 1e-6) return {static_cast<int>(ntsc) * 1000, 1001};
  return {static_cast<int>(std::round(fps * 1000.0)), 1000};
}

void SceneClip::validate() const {
  if (frames.empty()) throw std::invalid_argument("scene clip has no frames");
  const auto& first = frames.front();
  for (const auto& f : frames) {
    f.validate();
    if (f.width != first.width || f.height != first.height || f.bit_depth != first.bit_depth ||
        f.chroma != first.chroma) {
      throw std::invalid_argument("frames in a scene must share geometry and format");
    }
  }
}

SceneClip parse_y4m(std::span<const std::uint8_t> bytes, std::string scene_id) {
  static constexpr std::string_view kMagic = "YUV4MPEG2";
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ParseError("missing YUV4MPEG2 signature", 0);
  }
  auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
  if (newline == bytes.end()) throw ParseError("unterminated stream header", bytes.size());
  const std::size_t header_end = static_cast<std::size_t>(newline - bytes.begin());
  std::string_view header(reinterpret_cast<const char*>(bytes.data()), header_end);

  SceneClip clip;
  clip.scene_id = std::move(scene_id);
  int width = 0, height = 0;
  ChromaTag chroma{ChromaFormat::k420, 8};
  std::size_t pos = kMagic.size();
  while (pos < header.size()) {
    if (header[pos] != ' ') throw ParseError("expected space between header parameters", pos);
    ++pos;
    std::size_t end = header.find(' ', pos);
    if (end == std::string_view::npos) end = header.size();
    std::string_view tag = header.substr(pos, end - pos);
    if (tag.empty()) throw ParseError("empty header parameter", pos);
    std::string_view value = tag.substr(1);
    switch (tag[0]) {
      case 'W': width = parse_int_tag(value, pos, "width"); break;
      case 'H': height = parse_int_tag(value, pos, "height"); break;
      case 'F': {
        auto colon = value.find(':');
        if (colon == std::string_view::npos) throw ParseError("malformed framerate parameter", pos);
        clip.framerate.num = parse_int_tag(value.substr(0, colon), pos, "framerate");
        clip.framerate.den = parse_int_tag(value.substr(colon + 1), pos, "framerate");
        break;
      }
      case 'C':
        if (!parse_chroma_tag(value, chroma)) {
          throw ParseError("unsupported chroma tag 'C" + std::string(value) + "'", pos);
        }
        break;
      case 'I': case 'A': case 'X': break;
      default:
        throw ParseError("unknown header parameter '" + std::string(tag) + "'", pos);
    }
    clip.y4m_tags.emplace_back(tag);
    pos = end;
  }
  if (width == 0 || height == 0) throw ParseError("header lacks W or H parameter", header_end);

  const std::size_t payload = frame_byte_size(width, height, chroma.bit_depth, chroma.format);
  static constexpr std::string_view kFrame = "FRAME";
  std::size_t offset = header_end + 1;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kFrame.size() ||
        !std::equal(kFrame.begin(), kFrame.end(), bytes.begin() + offset)) {
      throw ParseError("expected FRAME marker", offset);
    }
    auto eol = std::find(bytes.begin() + offset, bytes.end(), std::uint8_t{'\n'});
    if (eol == bytes.end()) throw ParseError("unterminated FRAME header", offset);
    const std::size_t data_start = static_cast<std::size_t>(eol - bytes.begin()) + 1;
    const std::size_t available = bytes.size() - data_start;
    if (available < payload) {
      throw ParseError("truncated frame " + std::to_string(clip.frames.size()) + ": expected " +
                           std::to_string(payload) + " bytes, received " +
                           std::to_string(available),
                       data_start);
    }
    clip.frames.push_back(
        decode_frame(bytes.data() + data_start, width, height, chroma.bit_depth, chroma.format));
    offset = data_start + payload;
  }
  if (clip.frames.empty()) throw ParseError("stream contains no frames", offset);
  return clip;
}

std::vector<std::uint8_t> serialize_y4m(const SceneClip& clip) {
  clip.validate();
  const auto& first = clip.frames.front();
  std::string header = "YUV4MPEG2";
  bool wrote_chroma = false;
  if (clip.y4m_tags.empty()) {
    header += " W" + std::to_string(first.width) + " H" + std::to_string(first.height) + " F" +
              framerate_text(clip.framerate);
  }
  for (const auto& tag : clip.y4m_tags) {
    switch (tag[0]) {
      case 'W': header += " W" + std::to_string(first.width); break;
      case 'H': header += " H" + std::to_string(first.height); break;
      case 'F': header += " F" + framerate_text(clip.framerate); break;
      case 'C': {
        ChromaTag parsed{};
        wrote_chroma = true;
        if (parse_chroma_tag(std::string_view(tag).substr(1), parsed) &&
            parsed.format == first.chroma && parsed.bit_depth == first.bit_depth) {
          header += " " + tag;
        } else {
          header += " C" + canonical_chroma_tag(first.chroma, first.bit_depth);
        }
        break;
      }
      default: header += " " + tag;
    }
  }
  if (!wrote_chroma) header += " C" + canonical_chroma_tag(first.chroma, first.bit_depth);
  header += '\n';

  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + clip.frames.size() *
                               (6 + frame_byte_size(first.width, first.height, first.bit_depth,
                                                    first.chroma)));
  for (const auto& frame : clip.frames) {
    static constexpr std::string_view kFrame = "FRAME\n";
    out.insert(out.end(), kFrame.begin(), kFrame.end());
    encode_frame(frame, out);
  }
  return out;
}

RawVideoInfo parse_raw_sidecar(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("sidecar is not valid JSON: ") + e.what());
  }
  RawVideoInfo info;
  try {
    info.width = j.at("width").get<int>();
    info.height = j.at("height").get<int>();
    info.bit_depth = j.value("bit_depth", 8);
    info.chroma = parse_chroma_format(j.value("chroma", std::string("4:2:0")));
    info.fps = j.value("fps", 30.0);
    info.scene_id = j.value("scene_id", std::string("scene"));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("sidecar field error: ") + e.what());
  }
  return info;
}

SceneClip parse_raw_yuv(std::span<const std::uint8_t> bytes, const RawVideoInfo& info) {
  if (bytes.empty()) throw ParseError("empty input: raw YUV stream has no bytes", 0);
  if (info.width <= 0 || info.height <= 0) throw std::invalid_argument("raw video dimensions must be positive");
  if (info.bit_depth != 8 && info.bit_depth != 10) throw std::invalid_argument("bit depth must be 8 or 10");
  const std::size_t frame_size = frame_byte_size(info.width, info.height, info.bit_depth, info.chroma);
  if (bytes.size() % frame_size != 0) {
    throw ParseError("stream size " + std::to_string(bytes.size()) +
                         " is not a multiple of the frame size " + std::to_string(frame_size),
                     bytes.size() - bytes.size() % frame_size);
  }
  SceneClip clip;
  clip.scene_id = info.scene_id;
  clip.framerate = Framerate::from_fps(info.fps);
  const std::size_t count = bytes.size() / frame_size;
  clip.frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    clip.frames.push_back(decode_frame(bytes.data() + i * frame_size, info.width, info.height,
                                       info.bit_depth, info.chroma));
  }
  return clip;
}

std::vector<std::uint8_t> serialize_raw_yuv(const SceneClip& clip) {
  clip.validate();
  std::vector<std::uint8_t> out;
  for (const auto& f : clip.frames) encode_frame(f, out);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int block_columns(const Plane& plane, int w) { return (plane.width + w - 1) / w; }
int block_rows(const Plane& plane, int w) { return (plane.height + w - 1) / w; }

void extract_block(const Plane& plane, int bx, int by, int w, std::span<double> out) {
  const int x0 = bx * w;
  const int y0 = by * w;
  for (int r = 0; r < w; ++r) {
    const int sy = std::min(y0 + r, plane.height - 1);
    const auto src = plane.row(sy);
    double* dst = out.data() + static_cast<std::size_t>(r) * w;
    const int inside = std::max(0, std::min(w, plane.width - x0));
    for (int c = 0; c < inside; ++c) dst[c] = src[x0 + c];
    const double edge = src[plane.width - 1];
    for (int c = inside; c < w; ++c) dst[c] = edge;
  }
}

std::vector<Block> tile_blocks(const Plane& plane, int w) {
  if (w < 4) throw std::invalid_argument("block size must be at least 4");
  const int cols = block_columns(plane, w);
  const int rows = block_rows(plane, w);
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(cols) * rows);
  for (int by = 0; by < rows; ++by) {
    for (int bx = 0; bx < cols; ++bx) {
      Block b{bx * w, by * w, w, std::vector<double>(static_cast<std::size_t>(w) * w)};
      extract_block(plane, bx, by, w, b.samples);
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

std::vector<Patch> crop_patches(const Plane& luma, int q) {
  if (q < 2) throw std::invalid_argument("patch size must be at least 2");
  if (luma.width < q || luma.height < q) {
    throw std::invalid_argument("plane " + std::to_string(luma.width) + "x" +
                                std::to_string(luma.height) + " is smaller than one " +
                                std::to_string(q) + "x" + std::to_string(q) + " patch");
  }
  const int cols = luma.width / q;
  const int rows = luma.height / q;
  std::vector<Patch> patches;
  patches.reserve(static_cast<std::size_t>(cols) * rows);
  for (int py = 0; py < rows; ++py) {
    for (int px = 0; px < cols; ++px) {
      Patch p{px * q, py * q, q, {}};
      p.samples.reserve(static_cast<std::size_t>(q) * q);
      for (int r = 0; r < q; ++r) {
        auto src = luma.row(p.y0 + r).subspan(p.x0, q);
        p.samples.insert(p.samples.end(), src.begin(), src.end());
      }
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

}  // namespace ladderkit
