#include "tvbg/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "tvbg/errors.hpp"

namespace tvbg {

using nlohmann::json;

namespace {

ValidationError invalid(const std::string& code, const std::string& message) {
  return ValidationError(std::vector<Violation>{{code, message}});
}

ApiResponse error_body(int status, const std::string& code, const std::string& message,
                       json details = json::object()) {
  return {status, {{"code", code}, {"message", message}, {"details", std::move(details)}}};
}

std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double parse_number(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw invalid(what, fmt::format("{} is not a number: '{}'", what, text));
  }
}

template <typename T>
T body_get(const json& body, const char* key, T fallback) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw invalid(key, fmt::format("field '{}' has the wrong type", key));
  }
}

std::string body_require(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw invalid(key, fmt::format("field '{}' is required", key));
  }
  return it->get<std::string>();
}

}  // namespace

ApiResponse error_response(const std::exception& e) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    json details = json::array();
    for (const auto& violation : v->violations()) {
      details.push_back({{"code", violation.code}, {"message", violation.message}});
    }
    return error_body(400, "validation_error", e.what(), {{"violations", details}});
  }
  if (const auto* f = dynamic_cast<const FormatError*>(&e)) {
    return error_body(400, "format_error", e.what(), {{"row", f->row()}, {"column", f->column()}});
  }
  if (dynamic_cast<const NotFoundError*>(&e)) return error_body(404, "not_found", e.what());
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const LengthError*>(&e) ||
      dynamic_cast<const DataError*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return error_body(400, "bad_request", e.what());
  }
  if (const auto* f = dynamic_cast<const FitError*>(&e)) {
    static const char* kinds[] = {"window_too_short", "infeasible", "budget_exhausted"};
    return error_body(422, "fit_failed", e.what(), {{"reason", kinds[static_cast<int>(f->kind())]}});
  }
  return error_body(500, "internal", e.what());
}

ModelStore::ModelStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ModelStore::put(const std::string& id, const ModelDocument& doc) {
  std::unique_lock lock(mutex_);
  const auto tmp = dir_ / (id + ".json.tmp");
  save_document(doc, tmp);
  std::filesystem::rename(tmp, dir_ / (id + ".json"));
}

ModelDocument ModelStore::get(const std::string& id) const {
  const bool plain = !id.empty() && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  std::shared_lock lock(mutex_);
  const auto path = dir_ / (id + ".json");
  if (!plain || !std::filesystem::exists(path)) {
    throw NotFoundError(fmt::format("unknown model id '{}'", id));
  }
  return load_document(path);
}

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.model_store_dir) {
  if (!options_.population_file.empty()) populations_ = load_population_table(options_.population_file);
}

const CountryData& Service::data() {
  std::lock_guard lock(data_mutex_);
  if (!data_) {
    try {
      data_ = std::make_unique<CountryData>(CountryData::load(options_.data_dir));
    } catch (const Error& e) {
      // The tables are server configuration, not request input.
      throw Error(fmt::format("data directory {} is unusable: {}", options_.data_dir.string(), e.what()));
    }
  }
  return *data_;
}

ObservationSet Service::observations_for(const std::string& country, Date start, Date end,
                                         std::optional<double> population, double scale) {
  const auto& d = data();
  if (!d.confirmed.entries.count(country)) {
    throw NotFoundError(fmt::format("unknown country '{}'", country));
  }
  if (!population) {
    auto it = populations_.find(country);
    if (it == populations_.end()) {
      throw invalid("population", fmt::format("no population on file for '{}'; pass one", country));
    }
    population = it->second;
  }
  return derive_observations(d.confirmed, d.recovered, d.deaths, country, start, end, *population,
                             scale);
}

ApiResponse Service::countries() {
  return guarded([&] {
    json list = json::array();
    for (const auto& c : data().countries()) {
      json row = {{"name", c}};
      if (auto it = populations_.find(c); it != populations_.end()) row["population"] = it->second;
      list.push_back(row);
    }
    const auto& t = data().confirmed;
    return ApiResponse{200,
                       {{"countries", list},
                        {"first_date", t.first_date ? t.first_date->iso() : ""},
                        {"last_date", t.last_date ? t.last_date->iso() : ""}}};
  });
}

ApiResponse Service::observations(const std::string& country,
                                  const std::map<std::string, std::string>& query) {
  return guarded([&] {
    auto get = [&](const char* key) -> std::optional<std::string> {
      auto it = query.find(key);
      return it == query.end() ? std::nullopt : std::optional(it->second);
    };
    const auto start = get("start"), end = get("end");
    if (!start || !end) throw invalid("window", "query parameters start and end are required");
    const double scale = get("scale") ? parse_number(*get("scale"), "scale") : 1.0;
    std::optional<double> population;
    if (auto p = get("population")) population = parse_number(*p, "population");
    const auto obs = observations_for(country, Date::parse_iso(*start), Date::parse_iso(*end),
                                      population, scale);
    return ApiResponse{200, to_json(obs)};
  });
}

ApiResponse Service::fit(const json& body) {
  return guarded([&] {
    if (!body.is_object()) throw invalid("body", "request body must be a JSON object");
    const auto country = body_require(body, "country");
    const auto start = Date::parse_iso(body_require(body, "start"));
    const auto end = Date::parse_iso(body_require(body, "end"));
    std::optional<double> population;
    if (body.contains("population") && !body["population"].is_null()) {
      population = body_get<double>(body, "population", 0.0);
    }
    const double scale = body_get<double>(body, "scale", 1.0);

    FitConfig config;
    if (auto it = body.find("config"); it != body.end()) config = fit_config_from_json(*it, config);
    config.top_k = body_get<std::size_t>(body, "top", config.top_k);
    config.seed = body_get<std::uint64_t>(body, "seed", config.seed);
    config.threads = options_.fit_threads;
    if (config.max_evaluations == 0 || config.max_evaluations > options_.fit_max_evaluations) {
      config.max_evaluations = options_.fit_max_evaluations;
    }

    const auto obs = observations_for(country, start, end, population, scale);
    auto doc = make_document(obs, tvbg::fit(obs, config), utc_now_iso());
    const auto id = model_id(doc);
    store_.put(id, doc);
    return ApiResponse{200, {{"id", id}, {"created_at", doc.created_at},
                             {"report", to_json(doc.report)}}};
  });
}

ApiResponse Service::get_model(const std::string& id) {
  return guarded([&] { return ApiResponse{200, to_json(store_.get(id))}; });
}

ApiResponse Service::project(const json& body) {
  return guarded([&] {
    if (!body.is_object()) throw invalid("body", "request body must be a JSON object");
    const auto id = body_require(body, "model_id");
    const auto rank = body_get<std::size_t>(body, "rank", 1);
    const auto spec = scenario_spec_from_json(body);
    spec.validate().throw_if_invalid();
    const auto doc = store_.get(id);
    if (rank < 1 || rank > doc.report.models.size()) {
      throw invalid("rank", fmt::format("rank {} not in 1..{}", rank, doc.report.models.size()));
    }
    const auto projection = tvbg::project(doc.model(rank), doc.context(), spec);
    auto out = to_json(projection);
    out["model_id"] = id;
    out["rank"] = rank;
    out["spec"] = to_json(spec);
    return ApiResponse{200, out};
  });
}

ApiResponse Service::schema() const {
  return {200,
          {{"schema_version", kSchemaVersion},
           {"projection_csv_header", "date,beta,gamma,S,E,I,R,R0"},
           {"scenario",
            {{"t5_offset_days", "days after T4 when the first coefficient pair takes full effect"},
             {"horizon_days", "days after T4 where the projection ends"},
             {"coefficient_conventions", coefficient_conventions_json()}}}}};
}

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    throw invalid("body", fmt::format("request body is not valid JSON: {}", e.what()));
  }
}

}  // namespace

HttpServer::HttpServer(Service& service, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.Get("/api/countries", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.countries());
  });
  srv.Get(R"(/api/observations/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    reply(res, service.observations(httplib::detail::decode_url(req.matches[1], false), query));
  });
  srv.Post("/api/fit", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, Service::guarded([&] { return service.fit(parse_body(req)); }));
  });
  srv.Get(R"(/api/models/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_model(req.matches[1]));
  });
  srv.Post("/api/project", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, Service::guarded([&] { return service.project(parse_body(req)); }));
  });
  srv.Get("/api/schema", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.schema());
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      reply(res, error_body(res.status, res.status == 404 ? "not_found" : "http_error",
                            fmt::format("HTTP {}", res.status)));
    }
  });

  impl_->port = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (impl_->port < 0) throw Error(fmt::format("cannot bind {}:{}", host, port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::port() const { return impl_->port; }

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tvbg
