#include "ladderkit/model_io.hpp"

#include <fstream>
#include <sstream>

namespace ladderkit {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, std::size_t cols) {
  Matrix m(0, cols);
  for (const auto& r : rows) m.append_row(r.get<std::vector<double>>());
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json header(const char* kind, const std::string& resolution, const std::string& target,
            const std::vector<std::string>& names, const json& provenance) {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["kind"] = kind;
  doc["resolution_tag"] = resolution;
  doc["target"] = target;
  doc["feature_names"] = names;
  doc["provenance"] = provenance;
  return doc;
}

RandomForestModel forest_from_json(const json& doc) {
  RandomForestModel m;
  m.resolution_tag = doc.at("resolution_tag").get<std::string>();
  m.target_name = doc.at("target").get<std::string>();
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  const auto& hp = doc.at("hyperparameters");
  m.params.n_estimators = hp.at("n_estimators").get<int>();
  m.params.max_depth = hp.at("max_depth").get<int>();
  m.params.min_samples_split = hp.at("min_samples_split").get<int>();
  m.params.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
  m.params.bootstrap = hp.at("bootstrap").get<bool>();
  const auto& payload = doc.at("payload");
  m.seed = payload.at("seed").get<std::uint64_t>();
  m.sample_count = payload.at("sample_count").get<std::size_t>();
  for (const auto& t : payload.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto value = t.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0) {
      throw ModelFormatError("corrupt model: tree arrays have inconsistent lengths");
    }
    DecisionTree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& node = tree.nodes[i];
      node = {feature[i], threshold[i], left[i], right[i], value[i]};
      if (node.feature >= 0) {
        const auto bad = [n](int c) { return c <= 0 || static_cast<std::size_t>(c) >= n; };
        if (bad(node.left) || bad(node.right) ||
            static_cast<std::size_t>(node.feature) >= m.feature_names.size()) {
          throw ModelFormatError("corrupt model: node references out of range");
        }
      }
    }
    m.trees.push_back(std::move(tree));
  }
  if (m.trees.size() != static_cast<std::size_t>(m.params.n_estimators)) {
    throw ModelFormatError("corrupt model: tree count does not match n_estimators");
  }
  return m;
}

SvrModel svr_from_json(const json& doc) {
  SvrModel m;
  m.target_name = doc.at("target").get<std::string>();
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  const auto& hp = doc.at("hyperparameters");
  m.C = hp.at("C").get<double>();
  m.epsilon = hp.at("epsilon").get<double>();
  m.gamma = hp.at("gamma").get<double>();
  const auto& payload = doc.at("payload");
  const std::size_t d = m.feature_names.size();
  m.support_vectors = matrix_from_json(payload.at("support_vectors"), d);
  m.coefficients = payload.at("coefficients").get<std::vector<double>>();
  m.support_indices = payload.at("support_indices").get<std::vector<std::size_t>>();
  m.bias = payload.at("bias").get<double>();
  m.feature_mean = payload.at("feature_mean").get<std::vector<double>>();
  m.feature_scale = payload.at("feature_scale").get<std::vector<double>>();
  const auto& diag = payload.at("diagnostics");
  m.kkt_violation = diag.at("kkt_violation").get<double>();
  m.dual_objective = diag.at("dual_objective").get<double>();
  m.iterations = diag.at("iterations").get<std::int64_t>();
  m.converged = diag.at("converged").get<bool>();
  if (m.coefficients.size() != m.support_vectors.rows() || m.feature_mean.size() != d ||
      m.feature_scale.size() != d || m.support_indices.size() != m.coefficients.size()) {
    throw ModelFormatError("corrupt model: SVR arrays have inconsistent lengths");
  }
  return m;
}

}  // namespace

json model_to_json(const RandomForestModel& model, const json& provenance) {
  json doc = header("random_forest", model.resolution_tag, model.target_name, model.feature_names, provenance);
  doc["hyperparameters"] = {{"n_estimators", model.params.n_estimators},
                            {"max_depth", model.params.max_depth},
                            {"min_samples_split", model.params.min_samples_split},
                            {"min_samples_leaf", model.params.min_samples_leaf},
                            {"bootstrap", model.params.bootstrap}};
  json trees = json::array();
  for (const auto& tree : model.trees) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                     {"value", value}});
  }
  doc["payload"] = {{"seed", model.seed}, {"sample_count", model.sample_count}, {"trees", std::move(trees)}};
  return doc;
}

json model_to_json(const SvrModel& model, const json& provenance) {
  json doc = header("svr", "", model.target_name, model.feature_names, provenance);
  doc["hyperparameters"] = {{"kernel", "rbf"}, {"C", model.C}, {"epsilon", model.epsilon}, {"gamma", model.gamma}};
  doc["payload"] = {{"support_vectors", matrix_to_json(model.support_vectors)},
                    {"coefficients", model.coefficients},
                    {"support_indices", model.support_indices},
                    {"bias", model.bias},
                    {"feature_mean", model.feature_mean},
                    {"feature_scale", model.feature_scale},
                    {"diagnostics",
                     {{"kkt_violation", model.kkt_violation},
                      {"dual_objective", model.dual_objective},
                      {"iterations", model.iterations},
                      {"converged", model.converged}}}};
  return doc;
}

AnyModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw ModelFormatError("corrupt model: document is not an object");
    const auto version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw ModelFormatError("unsupported model schema_version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelSchemaVersion) + ")");
    }
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "random_forest") return forest_from_json(doc);
    if (kind == "svr") return svr_from_json(doc);
    throw ModelFormatError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("corrupt model: ") + e.what());
  }
}

void save_model(const RandomForestModel& model, const std::string& path, const json& provenance) {
  write_text(path, model_to_json(model, provenance).dump() + "\n");
}

void save_model(const SvrModel& model, const std::string& path, const json& provenance) {
  write_text(path, model_to_json(model, provenance).dump(2) + "\n");
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ModelFormatError("corrupt model '" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

RandomForestModel load_forest(const std::string& path) {
  auto m = load_model(path);
  if (auto* f = std::get_if<RandomForestModel>(&m)) return std::move(*f);
  throw ModelFormatError("'" + path + "' is not a random forest model");
}

SvrModel load_svr(const std::string& path) {
  auto m = load_model(path);
  if (auto* s = std::get_if<SvrModel>(&m)) return std::move(*s);
  throw ModelFormatError("'" + path + "' is not an SVR model");
}

}  // namespace ladderkit
