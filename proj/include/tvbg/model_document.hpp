#pragma once

// JSON and CSV forms of the pipeline's values. ModelDocument is the persisted result of
// a fit; its layout is versioned by kSchemaVersion.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tvbg/calibration.hpp"
#include "tvbg/scenarios.hpp"

namespace tvbg {

inline constexpr int kSchemaVersion = 1;

struct ModelDocument {
  int schema_version = kSchemaVersion;
  std::string country;
  Date t1;
  Date t4;
  double population_n = 0.0;
  double initial_infected = 0.0;
  double sigma = kDefaultSigma;
  double lambda = kDefaultLambda;
  double scale = 1.0;
  FitReport report;
  std::string created_at;  // ISO-8601 UTC timestamp
  std::string data_fingerprint;

  ModelContext context() const { return {t1, t4, population_n, initial_infected, sigma}; }
  /// 1-based rank lookup; throws DataError when out of range.
  const FittedModel& model(std::size_t rank) const;
};

ModelDocument make_document(const ObservationSet& obs, FitReport report, std::string created_at);

/// Content id: hash of the data fingerprint and the configuration echo.
std::string model_id(const ModelDocument& doc);

nlohmann::json to_json(const ThetaSet& theta);
ThetaSet theta_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitConfig& config);
/// Missing keys keep their defaults, so a partial file is a valid override.
FitConfig fit_config_from_json(const nlohmann::json& j, FitConfig base = {});
nlohmann::json to_json(const FittedModel& model);
FittedModel fitted_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelDocument& doc);
ModelDocument model_document_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ObservationSet& obs);
ObservationSet observation_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j, ScenarioSpec base = {});
nlohmann::json to_json(const Projection& projection);
nlohmann::json coefficient_conventions_json();

/// Canonical text form: two-space indent, trailing newline.
std::string dump_document(const ModelDocument& doc);
ModelDocument parse_document(const std::string& text);
void save_document(const ModelDocument& doc, const std::filesystem::path& path);
ModelDocument load_document(const std::filesystem::path& path);

/// Header `date,beta,gamma,S,E,I,R,R0`, one row per day, values printed round-trip exact.
std::string projection_csv(const Projection& projection);

}  // namespace tvbg
