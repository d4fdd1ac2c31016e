#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ladderkit/complexity.hpp"
#include "ladderkit/feature_selection.hpp"
#include "ladderkit/glcm.hpp"
#include "ladderkit/jnd_features.hpp"
#include "ladderkit/pooling.hpp"
#include "oracles.hpp"

using namespace ladderkit;
using doctest::Approx;

TEST_CASE("glcm of a 2x2 patch") {
  const std::vector<std::uint16_t> patch{0, 1, 0, 1};
  const auto m = glcm(patch, 2, 2, {0, 1}, 2);
  CHECK(m.total() == 4);
  CHECK(m.probability(0, 1) == 0.5);
  CHECK(m.probability(1, 0) == 0.5);
  CHECK(m.probability(0, 0) == 0.0);
  const auto f = glcm_features(m);
  CHECK(f.contrast == 1.0);
  CHECK(f.dissimilarity == 1.0);
  CHECK(f.homogeneity == 0.5);
  CHECK(f.angular_second_moment == 0.5);
  CHECK(f.energy == Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("glcm of a constant patch") {
  const std::vector<std::uint16_t> patch(64 * 64, 77);
  const auto m = glcm(patch, 64, 64, {0, 1}, 256);
  REQUIRE(m.entries().size() == 1);
  CHECK(m.probability(77, 77) == 1.0);
  const auto f = glcm_features(m);
  CHECK(f.contrast == 0);
  CHECK(f.dissimilarity == 0);
  CHECK(f.homogeneity == 1);
  CHECK(f.angular_second_moment == 1);
  CHECK(f.energy == 1);
  CHECK(f.correlation == 1);
}

TEST_CASE("glcm counts and features match the counting oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = 3 + static_cast<int>(rng() % 14), cols = 3 + static_cast<int>(rng() % 14);
    const int levels = 2 + static_cast<int>(rng() % 30);
    const GlcmOffset off{static_cast<int>(rng() % 3) - 1, static_cast<int>(rng() % 3)};
    if (off.dy == 0 && off.dx == 0) continue;
    std::vector<std::uint16_t> patch(static_cast<std::size_t>(rows) * cols);
    for (auto& v : patch) v = static_cast<std::uint16_t>(rng() % levels);
    const auto m = glcm(patch, rows, cols, off, levels);
    const auto counts = oracle::glcm_counts(patch, rows, cols, off.dy, off.dx, levels);
    for (int a = 0; a < levels; ++a)
      for (int b = 0; b < levels; ++b) REQUIRE(m.count(a, b) == counts[a * levels + b]);
    const auto f = glcm_features(m);
    const auto h = oracle::haralick(counts, levels);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(glcm_feature_value(f, i) == Approx(h.get(i)).epsilon(1e-12));
    }
    CHECK(f.energy * f.energy == Approx(f.angular_second_moment).epsilon(1e-12));
  }
}

TEST_CASE("glcm argument errors") {
  const std::vector<std::uint16_t> patch{0, 1, 2, 3};
  CHECK_THROWS(glcm(patch, 2, 2, {0, 1}, 3));  // value 3 >= levels
  CHECK_THROWS(glcm(patch, 2, 2, {0, 2}, 4));  // no pair fits
}

TEST_CASE("pooling hand values and conventions") {
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(pool(s, PoolStat::kMean) == 2.5);
  CHECK(pool(s, PoolStat::kStd) == Approx(1.11803).epsilon(1e-5));
  CHECK(pool(s, PoolStat::kMax) == 4);
  CHECK(std::abs(pool(s, PoolStat::kSkew)) < 1e-12);
  CHECK(pool(s, PoolStat::kKurt) == Approx(-1.36).epsilon(1e-12));

  const std::vector<double> flat(7, 3.25);
  CHECK(pool(flat, PoolStat::kStd) == 0);
  CHECK(pool(flat, PoolStat::kSkew) == 0);
  CHECK(pool(flat, PoolStat::kKurt) == 0);
  CHECK(pool(flat, PoolStat::kMax) == 3.25);
  CHECK(pool(flat, PoolStat::kMean) == 3.25);
  CHECK_THROWS(pool(std::vector<double>{}, PoolStat::kMean));
  CHECK(pooled_name(PoolStat::kKurt, "AvMotionX") == "kurt(AvMotionX)");
  CHECK(parse_pool_stat("skew") == PoolStat::kSkew);
}

TEST_CASE("pooling matches direct formulas; symmetric series have zero skew") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = fixtures::random_vector(rng, 2 + rng() % 50, -100, 100);
    for (std::size_t k = 0; k < kAllPoolStats.size(); ++k) {
      CHECK(pool(x, kAllPoolStats[k]) == Approx(oracle::pool(x, oracle::stat_names()[k])).epsilon(1e-9));
    }
    std::vector<double> sym;
    const double c = static_cast<double>(rng() % 100);
    for (std::size_t i = 0; i < 8; ++i) {
      sym.push_back(c + x[i % x.size()]);
      sym.push_back(c - x[i % x.size()]);
    }
    CHECK(std::abs(pool(sym, PoolStat::kSkew)) < 1e-12);
  }
}

TEST_CASE("bitstream feature files") {
  const char* three = R"({"framerate": 30, "bitrate_kbps": 2000, "frames": [
      {"frame_size_bytes": 100, "AvMotionX": 1, "AvMotionY": 2, "SpatialComplexity": 3},
      {"frame_size_bytes": 110, "AvMotionX": 1.5, "AvMotionY": 2, "SpatialComplexity": 3},
      {"frame_size_bytes": 90, "AvMotionX": 0.5, "AvMotionY": 2, "SpatialComplexity": 3}]})";
  const auto s = parse_bitstream_features(three);
  CHECK(s.frames.size() == 3);
  CHECK(s.frames[1].av_motion_x == 1.5);
  CHECK_THROWS(parse_bitstream_features(three, 4));

  const char* missing = R"({"framerate": 30, "bitrate_kbps": 2000, "frames": [
      {"frame_size_bytes": 100, "AvMotionX": 1, "SpatialComplexity": 3}]})";
  try {
    parse_bitstream_features(missing);
    FAIL("expected error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("AvMotionY") != std::string::npos);
  }

  const auto generated = fixtures::synthetic_bitstream(5, 3);
  const auto back = parse_bitstream_features(serialize_bitstream_features(generated));
  REQUIRE(back.frames.size() == 5);
  CHECK(back.bitrate_kbps == generated.bitrate_kbps);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.frames[i].frame_size_bytes == generated.frames[i].frame_size_bytes);
    CHECK(back.frames[i].av_motion_y == generated.frames[i].av_motion_y);
    CHECK(back.frames[i].spatial_complexity == generated.frames[i].spatial_complexity);
  }
}

TEST_CASE("pooled glcm trivial cases") {
  SceneClip one;
  one.frames.push_back(PlanarFrame::blank(64, 64, 8, ChromaFormat::k420, 0));
  std::mt19937_64 rng(1);
  fixtures::fill_random(one.frames[0].y, rng, 255);
  const auto single = pooled_glcm(one, {});
  CHECK(single.size() == 150);
  const double v = single.at("mean(mean(contrast))");
  CHECK(single.at("max(max(contrast))") == v);
  CHECK(single.at("std(mean(contrast))") == 0);
  CHECK(single.at("kurt(skew(energy))") == 0);
  CHECK(single.at("mean(std(energy))") == 0);

  SceneClip flat;
  for (int i = 0; i < 3; ++i) flat.frames.push_back(PlanarFrame::blank(128, 64, 8, ChromaFormat::k420, 50));
  CHECK(pooled_glcm(flat, {}).at("mean(mean(homogeneity))") == 1.0);
}

TEST_CASE("pooled glcm equals flat recomputation") {
  std::mt19937_64 rng(77);
  SceneClip clip;
  for (int i = 0; i < 2; ++i) {
    auto f = PlanarFrame::blank(40, 24, 8, ChromaFormat::k420);
    fixtures::fill_random(f.y, rng, 15);
    clip.frames.push_back(f);
  }
  GlcmOptions opt;
  opt.patch_size = 8;
  const auto pooled = pooled_glcm(clip, opt);
  const auto& stats = oracle::stat_names();
  const auto& names = glcm_feature_names();
  // per_frame[stat][feature] series over frames
  std::vector<std::vector<std::vector<double>>> series(5, std::vector<std::vector<double>>(6));
  for (const auto& frame : clip.frames) {
    std::vector<std::vector<double>> per_patch(6);
    for (int py = 0; py + 8 <= 24; py += 8) {
      for (int px = 0; px + 8 <= 40; px += 8) {
        std::vector<std::uint16_t> patch;
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c) patch.push_back(frame.y.at(px + c, py + r));
        const auto h = oracle::haralick(oracle::glcm_counts(patch, 8, 8, 0, 1, 256), 256);
        for (std::size_t k = 0; k < 6; ++k) per_patch[k].push_back(h.get(k));
      }
    }
    for (std::size_t s = 0; s < 5; ++s)
      for (std::size_t k = 0; k < 6; ++k) series[s][k].push_back(oracle::pool(per_patch[k], stats[s]));
  }
  for (std::size_t outer = 0; outer < 5; ++outer) {
    for (std::size_t inner = 0; inner < 5; ++inner) {
      for (std::size_t k = 0; k < 6; ++k) {
        const std::string key = stats[outer] + "(" + stats[inner] + "(" + names[k] + "))";
        CHECK(pooled.at(key) == Approx(oracle::pool(series[inner][k], stats[outer])).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("glcm quantization to fewer levels") {
  SceneClip clip;
  auto f = PlanarFrame::blank(16, 16, 8, ChromaFormat::k420);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) f.y.at(x, y) = static_cast<std::uint16_t>(x * 16);
  clip.frames.push_back(f);
  GlcmOptions opt;
  opt.patch_size = 16;
  opt.levels = 16;
  // Horizontal neighbours differ by exactly one quantized level.
  CHECK(pooled_glcm(clip, opt).at("mean(mean(dissimilarity))") == Approx(1.0));
  CHECK(effective_glcm_levels(opt, 8) == 16);
  CHECK(effective_glcm_levels({}, 10) == 1024);
}

TEST_CASE("jnd vector assembly") {
  SceneClip gray;
  for (int i = 0; i < 3; ++i) gray.frames.push_back(PlanarFrame::blank(64, 64, 8, ChromaFormat::k420, 100));
  const auto scene = scene_complexity(gray);
  BitstreamSeries still;
  still.framerate = 30;
  still.bitrate_kbps = 1000;
  for (int i = 0; i < 3; ++i) still.frames.push_back({500, 0, 0, 10});
  const auto v = assemble_jnd_vector(scene, still, pooled_glcm(gray, {}));
  CHECK(v.names == default_jnd_selection());
  CHECK(v.values.size() == 15);
  CHECK(v.at("max(L_Y)") == Approx(100));
  CHECK(v.at("kurt(AvMotionX)") == 0);
  CHECK(v.at("mean(mean(homogeneity))") == 1);

  std::vector<std::string> permuted(default_jnd_selection().rbegin(), default_jnd_selection().rend());
  const auto r = assemble_jnd_vector(scene, still, pooled_glcm(gray, {}), permuted);
  CHECK(r.names == permuted);
  CHECK(r.values.front() == v.values.back());
  CHECK_THROWS(assemble_jnd_vector(FeaturePool{}, default_jnd_selection()));
}

TEST_CASE("jnd vector entries equal recomputation from the pools") {
  const auto clip = fixtures::textured_clip("r", 128, 64, 4, 50, 2.5, 9);
  const auto bits = fixtures::synthetic_bitstream(4, 10);
  const auto scene = scene_complexity(clip);
  const auto glcm_pool = pooled_glcm(clip, {});
  const auto v = assemble_jnd_vector(scene, bits, glcm_pool);

  std::vector<double> l_y, l_u, mx, my, sc;
  for (const auto& f : scene.per_frame) {
    l_y.push_back(f.planes.L_Y);
    l_u.push_back(f.planes.L_U);
  }
  for (const auto& f : bits.frames) {
    mx.push_back(f.av_motion_x);
    my.push_back(f.av_motion_y);
    sc.push_back(f.spatial_complexity);
  }
  CHECK(v.at("max(L_Y)") == Approx(oracle::pool(l_y, "max")));
  CHECK(v.at("max(L_U)") == Approx(oracle::pool(l_u, "max")));
  CHECK(v.at("kurt(AvMotionX)") == Approx(oracle::pool(mx, "kurt")).epsilon(1e-9));
  CHECK(v.at("kurt(AvMotionY)") == Approx(oracle::pool(my, "kurt")).epsilon(1e-9));
  CHECK(v.at("kurt(SpatialComplexity)") == Approx(oracle::pool(sc, "kurt")).epsilon(1e-9));
  for (std::size_t i = 5; i < 15; ++i) CHECK(v.values[i] == glcm_pool.at(v.names[i]));
}

TEST_CASE("forward selection basics") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0, 1);
  Matrix X(0, 5);
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = z(rng);
    X.append_row(row);
    y.push_back(row[3]);
  }
  const std::vector<std::string> names{"x0", "x1", "x2", "x3", "x4"};
  SvrParams p;
  p.C = 10;
  p.epsilon = 0.01;
  const auto model = svr_fit_predict(p);
  const auto first = forward_sfs(X, y, names, 1, model, 5, 1);
  CHECK(first.names == std::vector<std::string>{"x3"});

  const auto all = forward_sfs(X, y, names, 5, model, 5, 1);
  auto sorted = all.selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(std::isnan(all.steps[1].candidate_scores[3]));
  CHECK_THROWS(forward_sfs(X, y, names, 6, model, 5, 1));
  CHECK_THROWS(forward_sfs(X, y, names, 0, model, 5, 1));
}
