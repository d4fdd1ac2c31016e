#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ladderkit {

enum class ChromaFormat { k420, k422, k444 };

std::string_view to_string(ChromaFormat format);
ChromaFormat parse_chroma_format(std::string_view text);

/// Error raised while decoding a video stream. `offset()` is the byte
/// position in the input where decoding failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Row-major sample matrix in native integer range.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;

  Plane() = default;
  Plane(int w, int h, std::uint16_t fill = 0);

  std::uint16_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::span<const std::uint16_t> row(int y) const {
    return {samples.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width)};
  }
};

struct PlanarFrame {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  ChromaFormat chroma = ChromaFormat::k420;
  Plane y, u, v;

  /// Allocates a frame with correctly sized planes filled with `fill`.
  static PlanarFrame blank(int width, int height, int bit_depth, ChromaFormat chroma,
                           std::uint16_t fill = 0);

  /// Throws std::invalid_argument if plane sizes or sample ranges are wrong.
  void validate() const;

  const Plane& plane(int index) const { return index == 0 ? y : (index == 1 ? u : v); }
};

int chroma_width(int width, ChromaFormat chroma);
int chroma_height(int height, ChromaFormat chroma);
/// Bytes needed to store one frame (all planes) in planar layout.
std::size_t frame_byte_size(int width, int height, int bit_depth, ChromaFormat chroma);

struct Framerate {
  int num = 30;
  int den = 1;
  double fps() const { return static_cast<double>(num) / den; }
  static Framerate from_fps(double fps);
};

struct SceneClip {
  std::string scene_id;
  Framerate framerate;
  std::vector<PlanarFrame> frames;
  /// Original YUV4MPEG2 header parameters, kept so re-serialization is lossless.
  std::vector<std::string> y4m_tags;

  int width() const { return frames.front().width; }
  int height() const { return frames.front().height; }
  int bit_depth() const { return frames.front().bit_depth; }

  void validate() const;
};

/// Decodes a YUV4MPEG2 stream. Supported chroma tags: 420, 420jpeg, 420paldv,
/// 420mpeg2, 422, 444 and their p10 variants. 10-bit samples are 16-bit LE.
SceneClip parse_y4m(std::span<const std::uint8_t> bytes, std::string scene_id = "scene");
std::vector<std::uint8_t> serialize_y4m(const SceneClip& clip);

struct RawVideoInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  ChromaFormat chroma = ChromaFormat::k420;
  double fps = 30.0;
  std::string scene_id = "scene";
};

/// Reads the JSON sidecar describing a headerless planar YUV file.
RawVideoInfo parse_raw_sidecar(std::string_view json_text);

SceneClip parse_raw_yuv(std::span<const std::uint8_t> bytes, const RawVideoInfo& info);
std::vector<std::uint8_t> serialize_raw_yuv(const SceneClip& clip);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// A w x w analysis block; samples are row-major, origin is the top-left
/// source coordinate.
struct Block {
  int x0 = 0;
  int y0 = 0;
  int size = 0;
  std::vector<double> samples;
};

/// Copies the block at block-grid position (bx, by) into `out` (w*w values),
/// replicating the last row/column for pixels beyond the plane edge.
void extract_block(const Plane& plane, int bx, int by, int w, std::span<double> out);
int block_columns(const Plane& plane, int w);
int block_rows(const Plane& plane, int w);

/// Tiles the plane into w x w blocks, left-to-right then top-to-bottom.
/// Partial edge blocks are padded by edge replication.
std::vector<Block> tile_blocks(const Plane& plane, int w);

struct Patch {
  int x0 = 0;
  int y0 = 0;
  int size = 0;
  std::vector<std::uint16_t> samples;
};

/// Non-overlapping Q x Q patches; right/bottom remainders are discarded.
std::vector<Patch> crop_patches(const Plane& luma, int q);

}  // namespace ladderkit
