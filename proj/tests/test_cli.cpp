#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "ladderkit/bjontegaard.hpp"
#include "ladderkit/cli.hpp"
#include "ladderkit/model_io.hpp"
#include "ladderkit/pipeline.hpp"

using namespace ladderkit;
using doctest::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ladderkit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json read_json(const fs::path& p) { return json::parse(fixtures::read_text(p)); }

fs::path write_tiny_scene(const fs::path& dir, bool with_bitstream = true) {
  const auto clip = fixtures::textured_clip("tiny", 128, 64, 4, 40, 2, 3);
  fixtures::write_bytes(dir / "tiny.y4m", serialize_y4m(clip));
  if (with_bitstream) {
    fixtures::write_text(dir / "tiny.bits.json", serialize_bitstream_features(fixtures::synthetic_bitstream(4, 1)));
  }
  return dir / "tiny.y4m";
}

RandomForestModel stub_forest(const std::string& target, const std::string& res, double below, double above,
                              double split_kbps) {
  RandomForestModel m;
  m.params.n_estimators = 1;
  m.feature_names = model_input_names();
  m.target_name = target;
  m.resolution_tag = res;
  DecisionTree t;
  if (below == above) {
    t.nodes.push_back({-1, 0, -1, -1, below});
  } else {
    t.nodes.push_back({3, std::log(split_kbps), 1, 2, 0});
    t.nodes.push_back({-1, 0, -1, -1, below});
    t.nodes.push_back({-1, 0, -1, -1, above});
  }
  m.trees.push_back(t);
  return m;
}

void write_stub_models(const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& res : {"360p", "432p", "720p"}) {
    save_model(stub_forest("vmaf", res, 10, 10, 1), (dir / (std::string("vmaf_") + res + ".json")).string());
    save_model(stub_forest("crf", res, 40, 40, 1), (dir / (std::string("crf_") + res + ".json")).string());
  }
  save_model(stub_forest("vmaf", "540p", 80, 80, 1), (dir / "vmaf_540p.json").string());
  save_model(stub_forest("vmaf", "1080p", 70, 95, 2000), (dir / "vmaf_1080p.json").string());
  save_model(stub_forest("crf", "540p", 30, 30, 1), (dir / "crf_540p.json").string());
  save_model(stub_forest("crf", "1080p", 26, 20, 4000), (dir / "crf_1080p.json").string());

  SvrModel jnd;
  jnd.feature_names = {"f0"};
  jnd.feature_mean = {0};
  jnd.feature_scale = {1};
  jnd.support_vectors = Matrix(0, 1);
  jnd.bias = 24;
  jnd.target_name = "c_T";
  save_model(jnd, (dir / "jnd_svr.json").string());
}

void write_stub_features(const fs::path& dir) {
  SceneComplexity s;
  s.scene_id = "golden";
  s.E_Y = 12;
  s.h = 3;
  s.L_Y = 100;
  s.per_frame.resize(1);
  fixtures::write_text(dir / "golden.complexity.json",
                       pipeline::complexity_document(s, pipeline::PipelineConfig{}).dump(2));
  const JndFeatureVector v{{"f0"}, {1.5}};
  fixtures::write_text(dir / "golden.jnd.json",
                       pipeline::jnd_document("golden", v, {{"f0", 1.5}}, 256, pipeline::PipelineConfig{}).dump(2));
}

std::string rd_csv(const std::vector<std::tuple<std::string, double, double>>& rows, double rate_scale = 1.0) {
  std::ostringstream out;
  out.precision(17);
  out << "scene_id,ladder_name,resolution,bitrate_kbps,psnr_db,vmaf\n";
  for (const auto& [scene, b, q] : rows) out << scene << ",L,1080p," << b * rate_scale << ',' << q / 2 << ',' << q << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("analyze writes complexity and JND files") {
  const auto dir = fixtures::scratch_dir("cli_analyze");
  const auto input = write_tiny_scene(dir);
  const auto r = invoke({"--output-dir", (dir / "out").string(), "analyze", input.string(), "--bitstream",
                      (dir / "tiny.bits.json").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto complexity = read_json(dir / "out" / "tiny.complexity.json");
  CHECK(complexity.at("kind") == "scene_complexity");
  CHECK(complexity.at("frames").size() == 4);
  CHECK(complexity.at("formula_version") == kComplexityFormulaVersion);
  for (const auto* key : {"tool_version", "config_hash", "seed"}) CHECK(complexity.at("provenance").contains(key));

  const auto jnd = read_json(dir / "out" / "tiny.jnd.json");
  REQUIRE(jnd.at("features").size() == 15);
  CHECK(jnd.at("features")[0].at("name") == "max(L_Y)");
  CHECK(jnd.at("glcm").at("patch_size") == 64);
  CHECK(jnd.at("glcm").at("levels") == 256);
  CHECK(jnd.at("candidates").size() == 35 + 22 + 150);

  // Byte-identical on rerun and with more threads.
  const auto first = fixtures::read_text(dir / "out" / "tiny.jnd.json");
  const auto first_c = fixtures::read_text(dir / "out" / "tiny.complexity.json");
  const auto again = invoke({"--threads", "3", "--output-dir", (dir / "again").string(), "analyze", input.string(),
                          "--bitstream", (dir / "tiny.bits.json").string()});
  REQUIRE(again.code == 0);
  CHECK(fixtures::read_text(dir / "again" / "tiny.jnd.json") == first);
  CHECK(fixtures::read_text(dir / "again" / "tiny.complexity.json") == first_c);
}

TEST_CASE("analyze without bitstream warns and skips JND features") {
  const auto dir = fixtures::scratch_dir("cli_analyze_nobits");
  const auto input = write_tiny_scene(dir, false);
  const auto r = invoke({"analyze", input.string(), "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(fs::exists(dir / "tiny.complexity.json"));
  CHECK_FALSE(fs::exists(dir / "tiny.jnd.json"));
}

TEST_CASE("analyze raw yuv with sidecar and reports parse errors") {
  const auto dir = fixtures::scratch_dir("cli_analyze_raw");
  const auto clip = fixtures::textured_clip("raw", 64, 32, 2, 30, 1, 4);
  fixtures::write_bytes(dir / "raw.yuv", serialize_raw_yuv(clip));
  fixtures::write_text(dir / "raw.yuv.json", R"({"width": 64, "height": 32, "fps": 25, "scene_id": "rawscene"})");
  auto r = invoke({"analyze", (dir / "raw.yuv").string(), "--output-dir", dir.string(), "--block-size", "16"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = read_json(dir / "rawscene.complexity.json");
  CHECK(doc.at("analyzer").at("block_size") == 16);

  auto bytes = serialize_y4m(clip);
  bytes.resize(bytes.size() - 10);
  fixtures::write_bytes(dir / "cut.y4m", bytes);
  r = invoke({"analyze", (dir / "cut.y4m").string(), "--output-dir", dir.string()});
  CHECK(r.code != 0);
  const auto err = json::parse(r.err);
  CHECK(err.at("command") == "analyze");
  CHECK(err.contains("byte_offset"));
}

TEST_CASE("train-vmaf writes one model per resolution and is reproducible") {
  const auto dir = fixtures::scratch_dir("cli_train");
  fixtures::write_text(dir / "rd.csv", fixtures::rd_training_csv(12, 3, {540, 1080}, {300, 900, 2400, 5800}));
  fixtures::write_text(dir / "config.json", R"({"random_forest": {"n_estimators": 20}})");
  auto r = invoke({"--config", (dir / "config.json").string(), "--output-dir", (dir / "a").string(), "train-vmaf",
                (dir / "rd.csv").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "a" / "vmaf_540p.json"));
  CHECK(fs::exists(dir / "a" / "vmaf_1080p.json"));
  const auto report = read_json(dir / "a" / "vmaf_training_report.json");
  CHECK(report.at("resolutions").at("540p").at("cross_validation").at("folds").size() == 5);
  CHECK(report.at("config").at("random_forest").at("n_estimators") == 20);
  CHECK(r.out.find("mean R2") != std::string::npos);

  r = invoke({"--config", (dir / "config.json").string(), "--threads", "2", "--output-dir", (dir / "b").string(),
           "train-vmaf", (dir / "rd.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(fixtures::read_text(dir / "a" / "vmaf_1080p.json") == fixtures::read_text(dir / "b" / "vmaf_1080p.json"));
  CHECK(fixtures::read_text(dir / "a" / "vmaf_training_report.json") ==
        fixtures::read_text(dir / "b" / "vmaf_training_report.json"));

  r = invoke({"--config", (dir / "config.json").string(), "--seed", "9", "--output-dir", (dir / "c").string(),
           "train-crf", (dir / "rd.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(read_json(dir / "c" / "crf_540p.json").at("provenance").at("seed") == 9);
}

TEST_CASE("training CSV schema errors carry line numbers") {
  const auto dir = fixtures::scratch_dir("cli_train_bad");
  fixtures::write_text(dir / "bad.csv",
                       "scene_id,E_Y,h,L_Y,resolution,bitrate_kbps,crf,vmaf,psnr\n"
                       "a,1,2,3,540p,300,30,70,35\n"
                       "b,1,2,3,540p,abc,30,70,35\n");
  auto r = invoke({"train-vmaf", (dir / "bad.csv").string(), "--output-dir", dir.string()});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).at("line") == 3);

  fixtures::write_text(dir / "missing.csv", "scene_id,E_Y,h,resolution,bitrate_kbps,vmaf\n");
  r = invoke({"train-vmaf", (dir / "missing.csv").string(), "--output-dir", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("L_Y") != std::string::npos);

  fixtures::write_text(dir / "neg.csv",
                       "scene_id,E_Y,h,L_Y,resolution,bitrate_kbps,crf,vmaf,psnr\n"
                       "a,1,2,3,540p,-5,30,70,35\n");
  r = invoke({"train-crf", (dir / "neg.csv").string(), "--output-dir", dir.string()});
  CHECK(json::parse(r.err).at("line") == 2);
}

TEST_CASE("train-jnd reports per-fold MAE") {
  const auto dir = fixtures::scratch_dir("cli_train_jnd");
  fixtures::write_text(dir / "jnd.csv", fixtures::jnd_training_csv(40, 2));
  const auto r = invoke({"train-jnd", (dir / "jnd.csv").string(), "--output-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(dir / "jnd_training_report.json");
  const auto& cv = report.at("cross_validation");
  REQUIRE(cv.at("folds").size() == 5);
  double sum = 0;
  for (const auto& f : cv.at("folds")) sum += f.at("mae").get<double>();
  CHECK(cv.at("mean_mae").get<double>() == Approx(sum / 5));
  const auto model = load_svr((dir / "jnd_svr.json").string());
  CHECK(model.feature_names == default_jnd_selection());
  CHECK(model.C == 0.1);
  CHECK(model.epsilon == 1e-4);
}

TEST_CASE("select-features writes the chosen names") {
  const auto dir = fixtures::scratch_dir("cli_select");
  std::ostringstream csv;
  csv << "scene_id,a,b,c,d,c_T\n";
  for (int i = 0; i < 30; ++i) {
    const double a = std::sin(i * 1.3), b = std::cos(i * 0.7), c = (i % 7) / 7.0, d = ((i * 5) % 11) / 11.0;
    csv << "s" << i << ',' << a << ',' << b << ',' << c << ',' << d << ',' << 30 + 4 * b << '\n';
  }
  fixtures::write_text(dir / "cand.csv", csv.str());
  fixtures::write_text(dir / "cfg.json", R"({"svr": {"C": 10, "epsilon": 0.01}})");
  const auto r = invoke({"--config", (dir / "cfg.json").string(), "select-features", (dir / "cand.csv").string(), "-k",
                      "2", "--output-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = read_json(dir / "selected_features.json");
  REQUIRE(doc.at("selected").size() == 2);
  CHECK(doc.at("selected")[0] == "b");
  CHECK(doc.at("steps").size() == 2);
}

TEST_CASE("predict-ladder with stub models matches the golden ladder") {
  const auto dir = fixtures::scratch_dir("cli_predict");
  write_stub_models(dir / "models");
  write_stub_features(dir);
  const auto r = invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models",
                      (dir / "models").string(), "--output-dir", (dir / "out").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "scene golden: 8 kept, 2 eliminated, c_T=24.0\n");
  CHECK(fixtures::read_text(dir / "out" / "golden.ladder.csv") ==
        fixtures::read_text(fs::path(LADDERKIT_TEST_DATA) / "golden" / "stub_ladder.csv"));
  const auto doc = read_json(dir / "out" / "golden.ladder.json");
  CHECK(doc.at("c_T") == 24.0);
  CHECK(doc.at("entries").size() == 10);
  CHECK(doc.at("config").at("ladder").at("bitrates_kbps").size() == 10);

  const auto again = invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models",
                          (dir / "models").string(), "--output-dir", (dir / "again").string()});
  CHECK(fixtures::read_text(dir / "again" / "golden.ladder.json") == fixtures::read_text(dir / "out" / "golden.ladder.json"));
}

TEST_CASE("predict-ladder --no-jnd keeps every rung") {
  const auto dir = fixtures::scratch_dir("cli_predict_nojnd");
  write_stub_models(dir / "models");
  write_stub_features(dir);
  fs::remove(dir / "golden.jnd.json");
  const auto r = invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models",
                      (dir / "models").string(), "--no-jnd", "--output-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = read_json(dir / "golden.ladder.json");
  CHECK(doc.at("c_T").is_null());
  CHECK(doc.at("entries").size() == 10);
  for (const auto& e : doc.at("entries")) CHECK(e.at("eliminated") == false);
  CHECK(r.out == "scene golden: 10 kept, 0 eliminated\n");

  // Without --no-jnd the missing JND features are an error.
  CHECK(invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models", (dir / "models").string(),
             "--output-dir", dir.string()})
            .code != 0);
}

TEST_CASE("predict-ladder rejects missing or mismatched models") {
  const auto dir = fixtures::scratch_dir("cli_predict_bad");
  write_stub_models(dir / "models");
  write_stub_features(dir);
  fs::remove(dir / "models" / "crf_720p.json");
  auto r = invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models", (dir / "models").string(),
                "--output-dir", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("720p") != std::string::npos);

  write_stub_models(dir / "models");
  SvrModel other;
  other.feature_names = {"g0"};
  other.feature_mean = {0};
  other.feature_scale = {1};
  other.support_vectors = Matrix(0, 1);
  save_model(other, (dir / "models" / "jnd_svr.json").string());
  r = invoke({"predict-ladder", (dir / "golden.complexity.json").string(), "--models", (dir / "models").string(),
           "--output-dir", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("g0") != std::string::npos);
}

TEST_CASE("oracle-ladder picks the hull per scene") {
  const auto dir = fixtures::scratch_dir("cli_oracle");
  std::ostringstream csv;
  csv << "scene_id,ladder_name,resolution,bitrate_kbps,psnr_db,vmaf\n";
  for (double b : {100.0, 1000.0, 2000.0, 4000.0, 9000.0}) {
    const double low = 30 + 9 * std::log(b / 100), high = low + 3 * std::log(b / 2000);
    csv << "s,grid,540p," << b << ",30," << low << '\n' << "s,grid,1080p," << b << ",30," << high << '\n';
  }
  fixtures::write_text(dir / "rd.csv", csv.str());
  const auto r = invoke({"oracle-ladder", (dir / "rd.csv").string(), "--output-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = read_json(dir / "oracle_ladder.json");
  for (const auto& e : doc.at("scenes")[0].at("entries")) {
    CHECK(e.at("resolution") == (e.at("bitrate_kbps").get<double>() < 2000 ? "540p" : "1080p"));
  }
}

TEST_CASE("evaluate reports zeros, halved rates and per-scene means") {
  const auto dir = fixtures::scratch_dir("cli_evaluate");
  const std::vector<std::tuple<std::string, double, double>> one{
      {"a", 1000, 60}, {"a", 2000, 70}, {"a", 4000, 78}, {"a", 8000, 85}};
  fixtures::write_text(dir / "ref.csv", rd_csv(one));
  fixtures::write_text(dir / "half.csv", rd_csv(one, 0.5));
  auto r = invoke({"evaluate", "--ref", (dir / "ref.csv").string(), "--test", (dir / "ref.csv").string(), "--output-dir",
                (dir / "same").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto doc = read_json(dir / "same" / "evaluation.json");
  CHECK(std::abs(doc.at("mean").at("bd_rate_pct").get<double>()) < 1e-12);
  CHECK(std::abs(doc.at("mean").at("bd_quality").get<double>()) < 1e-12);
  CHECK(doc.at("mean").at("delta_s") == 0.0);

  r = invoke({"evaluate", "--ref", (dir / "ref.csv").string(), "--test", (dir / "half.csv").string(), "--metric", "psnr",
           "--output-dir", (dir / "half").string()});
  REQUIRE(r.code == 0);
  doc = read_json(dir / "half" / "evaluation.json");
  CHECK(doc.at("metric") == "psnr");
  CHECK(doc.at("scenes")[0].at("bd_rate_pct").get<double>() == Approx(-50).epsilon(1e-11));
  CHECK(doc.at("scenes")[0].at("delta_s").get<double>() == Approx(-0.5));

  // Two scenes: means equal the average of per-scene values.
  std::vector<std::tuple<std::string, double, double>> ref2 = one, test2;
  for (const auto& [s, b, q] : one) ref2.emplace_back("b", b * 1.3, q - 4);
  for (const auto& [s, b, q] : ref2) test2.emplace_back(s, b * (s == "a" ? 0.8 : 0.6), q + (s == "a" ? 0.5 : 1.0));
  fixtures::write_text(dir / "ref2.csv", rd_csv(ref2));
  fixtures::write_text(dir / "test2.csv", rd_csv(test2));
  r = invoke({"evaluate", "--ref", (dir / "ref2.csv").string(), "--test", (dir / "test2.csv").string(), "--output-dir",
           (dir / "two").string()});
  REQUIRE(r.code == 0);
  doc = read_json(dir / "two" / "evaluation.json");
  REQUIRE(doc.at("scenes").size() == 2);
  double rate = 0, quality = 0, ds = 0;
  for (const auto& sc : {std::string("a"), std::string("b")}) {
    RdCurve rc, tc;
    std::vector<double> rb, tb;
    for (const auto& [s, b, q] : ref2)
      if (s == sc) rc.points.push_back({b, q}), rb.push_back(b);
    for (const auto& [s, b, q] : test2)
      if (s == sc) tc.points.push_back({b, q}), tb.push_back(b);
    rate += bd_rate(rc, tc).value / 2;
    quality += bd_quality(rc, tc).value / 2;
    ds += storage_delta(rb, tb) / 2;
  }
  CHECK(doc.at("mean").at("bd_rate_pct").get<double>() == Approx(rate).epsilon(1e-12));
  CHECK(doc.at("mean").at("bd_quality").get<double>() == Approx(quality).epsilon(1e-12));
  CHECK(doc.at("mean").at("delta_s").get<double>() == Approx(ds).epsilon(1e-12));
  const auto table = fixtures::read_text(dir / "two" / "evaluation.csv");
  CHECK(table.find("\nmean,") != std::string::npos);
  CHECK(r.out.find("BD-rate") != std::string::npos);
}

TEST_CASE("config handling") {
  const auto dir = fixtures::scratch_dir("cli_config");
  fixtures::write_text(dir / "typo.json", R"({"ladder": {"bitrates_kbps": [100, 200]}, "sead": 3})");
  auto r = invoke({"--config", (dir / "typo.json").string(), "evaluate", "--ref", (dir / "typo.json").string(),
                "--test", (dir / "typo.json").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("sead") != std::string::npos);

  pipeline::PipelineConfig a;
  auto b = a;
  b.threads = 8;
  CHECK(pipeline::config_hash(a) == pipeline::config_hash(b));
  b.seed = 1;
  CHECK(pipeline::config_hash(a) != pipeline::config_hash(b));
  const auto round = pipeline::config_from_json(pipeline::config_to_json(b));
  CHECK(pipeline::config_hash(round) == pipeline::config_hash(b));

  CHECK(invoke({"no-such-command"}).code != 0);
  CHECK(invoke({}).code != 0);
}
