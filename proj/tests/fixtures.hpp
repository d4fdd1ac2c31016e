// Synthetic inputs shared by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladderkit/jnd_features.hpp"
#include "ladderkit/media.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::path(LADDERKIT_TEST_SCRATCH) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline void fill_random(ladderkit::Plane& p, std::mt19937_64& rng, int max_value) {
  std::uniform_int_distribution<int> u(0, max_value);
  for (auto& s : p.samples) s = static_cast<std::uint16_t>(u(rng));
}

inline ladderkit::PlanarFrame random_frame(std::mt19937_64& rng, int width, int height, int bit_depth = 8,
                                           ladderkit::ChromaFormat chroma = ladderkit::ChromaFormat::k420) {
  auto f = ladderkit::PlanarFrame::blank(width, height, bit_depth, chroma);
  const int max_value = (1 << bit_depth) - 1;
  fill_random(f.y, rng, max_value);
  fill_random(f.u, rng, max_value);
  fill_random(f.v, rng, max_value);
  return f;
}

/// Textured moving content: a sinusoidal pattern of the given amplitude
/// drifting `motion` pixels per frame plus mild noise.
inline ladderkit::SceneClip textured_clip(const std::string& id, int width, int height, int frames, double amplitude,
                                          double motion, std::uint64_t seed, double base = 110.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 2.0);
  ladderkit::SceneClip clip;
  clip.scene_id = id;
  clip.framerate = {30, 1};
  for (int t = 0; t < frames; ++t) {
    auto f = ladderkit::PlanarFrame::blank(width, height, 8, ladderkit::ChromaFormat::k420, 128);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double xs = x + motion * t;
        const double v = base + amplitude * std::sin(xs * 0.21) * std::cos(y * 0.17) + noise(rng);
        f.y.at(x, y) = static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
    for (int y = 0; y < f.u.height; ++y) {
      for (int x = 0; x < f.u.width; ++x) {
        f.u.at(x, y) = static_cast<std::uint16_t>(128 + std::lround(10 * std::sin((x + y) * 0.1)));
        f.v.at(x, y) = static_cast<std::uint16_t>(128 - std::lround(10 * std::cos(x * 0.13)));
      }
    }
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

inline ladderkit::BitstreamSeries synthetic_bitstream(std::size_t frames, std::uint64_t seed, double motion = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ladderkit::BitstreamSeries s;
  s.framerate = 30;
  s.bitrate_kbps = 4500;
  for (std::size_t i = 0; i < frames; ++i) {
    s.frames.push_back({(i == 0 ? 60000.0 : 15000.0) + 3000.0 * u(rng), motion + u(rng), 0.5 * motion * u(rng),
                        200.0 + 50.0 * u(rng)});
  }
  return s;
}

// ---- A synthetic rate-quality world ----
//
// Quality rises with bits per pixel and falls with texture energy; lower
// resolutions lose detail that caps their quality, so they win only at low
// bitrates. CRF falls with bits per pixel.

inline double pixels(int height) { return std::round(height * 16.0 / 9.0) * height; }

inline double synthetic_vmaf(double E_Y, double h, double L_Y, int height, double bitrate_kbps) {
  const double bpp = bitrate_kbps * 1000.0 / (pixels(height) * 30.0);
  const double difficulty = 1.0 + E_Y / 25.0 + h / 40.0 + std::abs(L_Y - 110.0) / 400.0;
  const double cap = 100.0 - 90.0 * std::pow(1.0 - height / 1080.0, 1.2) * (0.6 + E_Y / 60.0);
  return cap * (1.0 - std::exp(-9.0 * std::sqrt(bpp) / difficulty));
}

inline double synthetic_crf(double E_Y, double h, double L_Y, int height, double bitrate_kbps) {
  const double bpp = bitrate_kbps * 1000.0 / (pixels(height) * 30.0);
  const double crf = 33.0 - 6.0 * std::log(bpp / 0.02) + 0.12 * E_Y + 0.05 * h - 0.01 * (L_Y - 110.0);
  return std::clamp(crf, 0.0, 51.0);
}

/// Training CSV for train-vmaf / train-crf over random scene features.
inline std::string rd_training_csv(std::size_t scenes, std::uint64_t seed, const std::vector<int>& heights,
                                   const std::vector<double>& bitrates) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> e(2.0, 60.0), hh(0.0, 25.0), l(60.0, 170.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::ostringstream out;
  out.precision(17);
  out << "scene_id,E_Y,h,L_Y,resolution,bitrate_kbps,crf,vmaf,psnr\n";
  for (std::size_t s = 0; s < scenes; ++s) {
    const double E_Y = e(rng), h = hh(rng), L_Y = l(rng);
    for (int height : heights) {
      for (double b : bitrates) {
        const double v = std::clamp(synthetic_vmaf(E_Y, h, L_Y, height, b) + noise(rng), 0.0, 100.0);
        const double c = std::clamp(synthetic_crf(E_Y, h, L_Y, height, b) + noise(rng), 0.0, 51.0);
        out << "s" << s << ',' << E_Y << ',' << h << ',' << L_Y << ',' << height << "p," << b << ',' << c << ','
            << v << ',' << 25.0 + v / 5.0 << '\n';
      }
    }
  }
  return out.str();
}

/// JND training CSV: the default 15 features with thresholds around 32.
inline std::string jnd_training_csv(std::size_t scenes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto& names = ladderkit::default_jnd_selection();
  std::ostringstream out;
  out.precision(17);
  out << "scene_id";
  for (const auto& n : names) out << ",\"" << n << '"';
  out << ",c_T\n";
  for (std::size_t s = 0; s < scenes; ++s) {
    std::vector<double> x(names.size());
    for (auto& v : x) v = z(rng);
    const double c_t = 32.0 + 1.5 * std::tanh(x[0]) - 1.0 * std::tanh(x[5]) + 0.3 * z(rng);
    out << "j" << s;
    for (double v : x) out << ',' << v;
    out << ',' << c_t << '\n';
  }
  return out.str();
}

}  // namespace fixtures
