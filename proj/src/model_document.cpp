#include "tvbg/model_document.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tvbg/errors.hpp"
#include "tvbg/hash.hpp"

namespace tvbg {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

Date read_date(const json& j, const char* key) { return Date::parse_iso(j.at(key).get<std::string>()); }

std::string level_search_name(LevelSearch s) { return s == LevelSearch::lattice ? "lattice" : "simplex"; }

LevelSearch level_search_of(const std::string& s) {
  if (s == "lattice") return LevelSearch::lattice;
  if (s == "simplex") return LevelSearch::simplex;
  throw FormatError(fmt::format("unknown level_search '{}'", s));
}

json rate_values(const RateSeries& r) { return r.values; }

}  // namespace

const FittedModel& ModelDocument::model(std::size_t rank) const {
  if (rank < 1 || rank > report.models.size()) {
    throw DataError(fmt::format("model rank {} not in 1..{}", rank, report.models.size()));
  }
  return report.models[rank - 1];
}

ModelDocument make_document(const ObservationSet& obs, FitReport report, std::string created_at) {
  ModelDocument doc;
  doc.country = obs.country;
  doc.t1 = obs.t1;
  doc.t4 = obs.t4;
  doc.population_n = obs.population_n;
  doc.initial_infected = obs.idata.front();
  doc.sigma = report.config.sigma;
  doc.lambda = report.config.lambda;
  doc.scale = obs.scale;
  doc.data_fingerprint = report.observation_fingerprint;
  doc.report = std::move(report);
  doc.created_at = std::move(created_at);
  return doc;
}

std::string model_id(const ModelDocument& doc) {
  const json key = {{"data", doc.data_fingerprint}, {"config", to_json(doc.report.config)}};
  return sha256_hex(key.dump()).substr(0, 16);
}

json to_json(const ThetaSet& t) {
  return {{"t2", t.t2.iso()},          {"t3", t.t3.iso()},          {"beta_t2", t.beta_t2},
          {"beta_t3", t.beta_t3},      {"beta_t4", t.beta_t4},      {"gamma_t2", t.gamma_t2},
          {"gamma_t3", t.gamma_t3},    {"gamma_t4", t.gamma_t4},    {"lambda", t.lambda}};
}

ThetaSet theta_from_json(const json& j) {
  ThetaSet t;
  t.t2 = read_date(j, "t2");
  t.t3 = read_date(j, "t3");
  t.beta_t2 = j.at("beta_t2").get<double>();
  t.beta_t3 = j.at("beta_t3").get<double>();
  t.beta_t4 = j.at("beta_t4").get<double>();
  t.gamma_t2 = j.at("gamma_t2").get<double>();
  t.gamma_t3 = j.at("gamma_t3").get<double>();
  t.gamma_t4 = j.at("gamma_t4").get<double>();
  read_opt(j, "lambda", t.lambda);
  return t;
}

json to_json(const FitConfig& c) {
  return {{"top_k", c.top_k},
          {"w1", c.w1},
          {"w2", c.w2},
          {"beta_min", c.beta_min},
          {"beta_max", c.beta_max},
          {"gamma_min", c.gamma_min},
          {"gamma_max", c.gamma_max},
          {"node_step", c.node_step},
          {"multistart", c.multistart},
          {"local_iterations", c.local_iterations},
          {"restarts", c.restarts},
          {"max_evaluations", c.max_evaluations},
          {"seed", c.seed},
          {"lambda", c.lambda},
          {"sigma", c.sigma},
          {"level_search", level_search_name(c.level_search)},
          {"lattice_points", c.lattice_points},
          {"t2_offsets", c.t2_offsets},
          {"t3_offsets", c.t3_offsets}};
}

FitConfig fit_config_from_json(const json& j, FitConfig c) {
  if (!j.is_object()) throw FormatError("fit configuration must be a JSON object");
  read_opt(j, "top_k", c.top_k);
  read_opt(j, "w1", c.w1);
  read_opt(j, "w2", c.w2);
  read_opt(j, "beta_min", c.beta_min);
  read_opt(j, "beta_max", c.beta_max);
  read_opt(j, "gamma_min", c.gamma_min);
  read_opt(j, "gamma_max", c.gamma_max);
  read_opt(j, "node_step", c.node_step);
  read_opt(j, "multistart", c.multistart);
  read_opt(j, "local_iterations", c.local_iterations);
  read_opt(j, "restarts", c.restarts);
  read_opt(j, "max_evaluations", c.max_evaluations);
  read_opt(j, "seed", c.seed);
  read_opt(j, "lambda", c.lambda);
  read_opt(j, "sigma", c.sigma);
  if (auto it = j.find("level_search"); it != j.end()) c.level_search = level_search_of(it->get<std::string>());
  read_opt(j, "lattice_points", c.lattice_points);
  read_opt(j, "t2_offsets", c.t2_offsets);
  read_opt(j, "t3_offsets", c.t3_offsets);
  read_opt(j, "threads", c.threads);
  return c;
}

json to_json(const FittedModel& m) {
  return {{"rank", m.rank},
          {"fval", m.fval},
          {"theta", to_json(m.theta)},
          {"rmse_infected", m.rmse_infected},
          {"rmse_removed", m.rmse_removed},
          {"peak_date", m.peak_date.iso()},
          {"peak_value", m.peak_value}};
}

FittedModel fitted_model_from_json(const json& j) {
  FittedModel m;
  m.rank = j.at("rank").get<std::size_t>();
  m.fval = j.at("fval").get<double>();
  m.theta = theta_from_json(j.at("theta"));
  m.rmse_infected = j.at("rmse_infected").get<double>();
  m.rmse_removed = j.at("rmse_removed").get<double>();
  m.peak_date = read_date(j, "peak_date");
  m.peak_value = j.at("peak_value").get<double>();
  return m;
}

json to_json(const FitReport& r) {
  json models = json::array();
  for (const auto& m : r.models) models.push_back(to_json(m));
  return {{"models", models},
          {"fmax", r.fmax},
          {"evaluated_count", r.evaluated_count},
          {"config", to_json(r.config)},
          {"observation_fingerprint", r.observation_fingerprint}};
}

FitReport fit_report_from_json(const json& j) {
  FitReport r;
  for (const auto& m : j.at("models")) r.models.push_back(fitted_model_from_json(m));
  r.fmax = j.at("fmax").get<double>();
  r.evaluated_count = j.at("evaluated_count").get<std::size_t>();
  r.config = fit_config_from_json(j.at("config"));
  r.observation_fingerprint = j.at("observation_fingerprint").get<std::string>();
  return r;
}

json to_json(const ModelDocument& d) {
  return {{"schema_version", d.schema_version},
          {"country", d.country},
          {"t1", d.t1.iso()},
          {"t4", d.t4.iso()},
          {"population_n", d.population_n},
          {"initial_infected", d.initial_infected},
          {"sigma", d.sigma},
          {"lambda", d.lambda},
          {"scale", d.scale},
          {"models", to_json(d.report)},
          {"created_at", d.created_at},
          {"data_fingerprint", d.data_fingerprint}};
}

ModelDocument model_document_from_json(const json& j) {
  ModelDocument d;
  try {
    d.schema_version = j.at("schema_version").get<int>();
    if (d.schema_version != kSchemaVersion) {
      throw FormatError(fmt::format("unsupported schema_version {}", d.schema_version));
    }
    d.country = j.at("country").get<std::string>();
    d.t1 = read_date(j, "t1");
    d.t4 = read_date(j, "t4");
    d.population_n = j.at("population_n").get<double>();
    d.initial_infected = j.at("initial_infected").get<double>();
    d.sigma = j.at("sigma").get<double>();
    d.lambda = j.at("lambda").get<double>();
    d.scale = j.at("scale").get<double>();
    d.report = fit_report_from_json(j.at("models"));
    d.created_at = j.at("created_at").get<std::string>();
    d.data_fingerprint = j.at("data_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed model document: {}", e.what()));
  }
  return d;
}

json to_json(const ObservationSet& o) {
  return {{"country", o.country}, {"t1", o.t1.iso()},          {"t4", o.t4.iso()},
          {"population_n", o.population_n}, {"scale", o.scale}, {"idata", o.idata},
          {"rcum", o.rcum},       {"warnings", o.warnings}};
}

ObservationSet observation_set_from_json(const json& j) {
  ObservationSet o;
  try {
    o.country = j.at("country").get<std::string>();
    o.t1 = read_date(j, "t1");
    o.t4 = read_date(j, "t4");
    o.population_n = j.at("population_n").get<double>();
    read_opt(j, "scale", o.scale);
    o.idata = j.at("idata").get<std::vector<double>>();
    o.rcum = j.at("rcum").get<std::vector<double>>();
    read_opt(j, "warnings", o.warnings);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed observation set: {}", e.what()));
  }
  return o;
}

json to_json(const ScenarioSpec& s) {
  return {{"t5_offset_days", s.t5_offset_days}, {"horizon_days", s.horizon_days},
          {"coef1", s.coef1}, {"coef2", s.coef2}, {"coef11", s.coef11}, {"coef22", s.coef22}};
}

ScenarioSpec scenario_spec_from_json(const json& j, ScenarioSpec s) {
  try {
    read_opt(j, "t5_offset_days", s.t5_offset_days);
    read_opt(j, "horizon_days", s.horizon_days);
    read_opt(j, "coef1", s.coef1);
    read_opt(j, "coef2", s.coef2);
    read_opt(j, "coef11", s.coef11);
    read_opt(j, "coef22", s.coef22);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed scenario: {}", e.what()));
  }
  return s;
}

json coefficient_conventions_json() {
  json rows = json::array();
  for (const auto& c : coefficient_conventions()) {
    rows.push_back({{"name", c.name}, {"period", c.period}, {"rate", c.rate},
                    {"above_one", c.above_one}, {"below_one", c.below_one}});
  }
  return rows;
}

json to_json(const Projection& p) {
  json dates = json::array(), s = json::array(), e = json::array(), i = json::array(), r = json::array();
  for (std::size_t k = 0; k < p.trajectory.size(); ++k) {
    dates.push_back(p.trajectory.date_at(k).iso());
    s.push_back(p.trajectory.states[k].s);
    e.push_back(p.trajectory.states[k].e);
    i.push_back(p.trajectory.states[k].i);
    r.push_back(p.trajectory.states[k].r);
  }
  json warnings = json::array();
  for (const auto& w : p.trajectory.warnings) warnings.push_back(w.message);
  return {{"origin_date", p.trajectory.origin_date.iso()},
          {"t5", p.t5.iso()},
          {"horizon", p.horizon.iso()},
          {"dates", dates},
          {"beta", rate_values(p.beta_ext)},
          {"gamma", rate_values(p.gamma_ext)},
          {"r0", rate_values(p.r0_series)},
          {"S", s},
          {"E", e},
          {"I", i},
          {"R", r},
          {"peak_date", p.peak.date.iso()},
          {"peak_value", p.peak.value},
          {"value_at_horizon", p.value_at_horizon},
          {"warnings", warnings},
          {"coefficient_conventions", coefficient_conventions_json()}};
}

std::string dump_document(const ModelDocument& doc) { return to_json(doc).dump(2) + "\n"; }

ModelDocument parse_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("model document is not valid JSON: {}", e.what()));
  }
  return model_document_from_json(j);
}

void save_document(const ModelDocument& doc, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(fmt::format("cannot write {}", path.string()));
  f << dump_document(doc);
}

ModelDocument load_document(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_document(ss.str());
}

std::string projection_csv(const Projection& p) {
  std::string out = "date,beta,gamma,S,E,I,R,R0\n";
  for (std::size_t k = 0; k < p.trajectory.size(); ++k) {
    const auto& st = p.trajectory.states[k];
    out += fmt::format("{},{},{},{},{},{},{},{}\n", p.trajectory.date_at(k).iso(), p.beta_ext[k],
                       p.gamma_ext[k], st.s, st.e, st.i, st.r, p.r0_series[k]);
  }
  return out;
}

}  // namespace tvbg
