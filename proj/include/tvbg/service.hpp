#pragma once

// HTTP/JSON front end.
//
//   GET  /api/countries
//   GET  /api/observations/{country}?start=YYYY-MM-DD&end=YYYY-MM-DD[&scale=][&population=]
//   POST /api/fit          {country, start, end, population?, scale?, top?, seed?, config?}
//   GET  /api/models/{id}
//   POST /api/project      {model_id, rank?, t5_offset_days?, horizon_days?, coef1?, ...}
//   GET  /api/schema
//
// Errors are {"code", "message", "details"} with 400 (validation), 404 (unknown
// country or model), 422 (fit cannot complete) or 500.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "tvbg/data_ingest.hpp"
#include "tvbg/model_document.hpp"

namespace tvbg {

struct ServiceOptions {
  std::filesystem::path data_dir;
  std::filesystem::path model_store_dir;
  std::filesystem::path population_file;  // optional
  // Upper bound on objective evaluations per fit request; a fit that needs more is
  // answered with 422 instead of running on.
  std::size_t fit_max_evaluations = 20'000'000;
  std::size_t fit_threads = 1;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Model documents on disk, one `<id>.json` per model. Single writer, many readers.
class ModelStore {
 public:
  explicit ModelStore(std::filesystem::path dir);
  void put(const std::string& id, const ModelDocument& doc);
  /// Throws NotFoundError for unknown ids.
  ModelDocument get(const std::string& id) const;

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

class Service {
 public:
  explicit Service(ServiceOptions options);

  ApiResponse countries();
  ApiResponse observations(const std::string& country, const std::map<std::string, std::string>& query);
  ApiResponse fit(const nlohmann::json& body);
  ApiResponse get_model(const std::string& id);
  ApiResponse project(const nlohmann::json& body);
  ApiResponse schema() const;

  /// Runs `handler`, translating library exceptions into structured error responses.
  template <typename F>
  static ApiResponse guarded(F&& handler);

 private:
  const CountryData& data();
  ObservationSet observations_for(const std::string& country, Date start, Date end,
                                  std::optional<double> population, double scale);

  ServiceOptions options_;
  ModelStore store_;
  std::mutex data_mutex_;
  std::unique_ptr<CountryData> data_;
  std::map<std::string, double> populations_;
};

ApiResponse error_response(const std::exception& e);

/// Binds the service to host:port (port 0 picks a free port) and serves on a background
/// thread until stop() or destruction.
class HttpServer {
 public:
  HttpServer(Service& service, const std::string& host, int port);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const;
  void stop();
  /// Blocks until the server stops.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

template <typename F>
ApiResponse Service::guarded(F&& handler) {
  try {
    return handler();
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

}  // namespace tvbg
