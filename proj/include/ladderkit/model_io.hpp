#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "ladderkit/random_forest.hpp"
#include "ladderkit/svr.hpp"

namespace ladderkit {

inline constexpr int kModelSchemaVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyModel = std::variant<RandomForestModel, SvrModel>;

/// Model documents: {schema_version, kind, resolution_tag, target,
/// hyperparameters, feature_names, payload, provenance}. Doubles are written
/// with round-trip precision, so a reloaded model predicts bit-identically.
nlohmann::json model_to_json(const RandomForestModel& model,
                             const nlohmann::json& provenance = nlohmann::json::object());
nlohmann::json model_to_json(const SvrModel& model,
                             const nlohmann::json& provenance = nlohmann::json::object());
AnyModel model_from_json(const nlohmann::json& doc);

void save_model(const RandomForestModel& model, const std::string& path,
                const nlohmann::json& provenance = nlohmann::json::object());
void save_model(const SvrModel& model, const std::string& path,
                const nlohmann::json& provenance = nlohmann::json::object());
AnyModel load_model(const std::string& path);
RandomForestModel load_forest(const std::string& path);
SvrModel load_svr(const std::string& path);

}  // namespace ladderkit
