#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tvbg/calibration.hpp"
#include "tvbg/data_ingest.hpp"
#include "tvbg/errors.hpp"
#include "tvbg/kernels.hpp"
#include "tvbg/model_document.hpp"
#include "tvbg/scenarios.hpp"
#include "tvbg/service.hpp"

namespace tvbg::cli {

namespace {

using nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

struct Failure {
  int exit_code;
  ApiResponse body;
};

Failure classify(const std::exception& e) {
  auto body = error_response(e);
  if (dynamic_cast<const UsageError*>(&e)) {
    body.body["code"] = "bad_arguments";
    return {kBadArguments, body};
  }
  if (dynamic_cast<const ValidationError*>(&e)) return {kBadArguments, body};
  if (dynamic_cast<const FitError*>(&e)) return {kFitFailure, body};
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const LengthError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    return {kDataError, body};
  }
  return {kInternal, body};
}

Date parse_date_arg(const std::string& text, const char* flag) {
  try {
    return Date::parse_iso(text);
  } catch (const FormatError& e) {
    throw UsageError(fmt::format("{}: {}", flag, e.what()));
  }
}

std::string default_created_at(Date t4) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    const auto secs = std::strtoll(epoch, nullptr, 10);
    const Date day = Date(1970, 1, 1) + static_cast<int>(secs / 86400);
    const auto rem = secs % 86400;
    return fmt::format("{}T{:02}:{:02}:{:02}Z", day.iso(), rem / 3600, rem % 3600 / 60, rem % 60);
  }
  return t4.iso() + "T00:00:00Z";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(fmt::format("cannot write {}", path.string()));
  f << content;
  if (!f) throw DataError(fmt::format("write to {} failed", path.string()));
}

struct FitArgs {
  std::string country;
  std::string start;
  std::string end;
  std::optional<double> population;
  std::string data_dir = "data/jhu";
  std::string populations = "data/populations.json";
  double scale = 1.0;
  std::size_t top = 3;
  std::optional<std::uint64_t> seed;
  std::string config_file;
  std::size_t threads = 1;
  std::optional<std::size_t> max_evaluations;
  std::string level_search;
  std::string created_at;
  std::string out;
};

struct ProjectArgs {
  std::string models;
  std::size_t rank = 1;
  ScenarioSpec spec;
  std::string out;
  std::string json_out;
};

struct ObservationsArgs {
  std::string country;
  std::string start;
  std::string end;
  std::optional<double> population;
  std::string data_dir = "data/jhu";
  std::string populations = "data/populations.json";
  double scale = 1.0;
  std::string out;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data/jhu";
  std::string model_store_dir = "models";
  std::string populations = "data/populations.json";
  std::size_t threads = 1;
  std::size_t max_evaluations = ServiceOptions{}.fit_max_evaluations;
};

ObservationSet load_observations(const std::string& country, Date t1, Date t4,
                                 std::optional<double> population, const std::string& data_dir,
                                 const std::string& populations_file, double scale) {
  if (!population) {
    const auto table = load_population_table(populations_file);
    auto it = table.find(country);
    if (it == table.end()) {
      throw UsageError(fmt::format("no population for '{}' in {}; pass --population", country,
                                   populations_file));
    }
    population = it->second;
  }
  const auto data = CountryData::load(data_dir);
  return derive_observations(data.confirmed, data.recovered, data.deaths, country, t1, t4,
                             *population, scale);
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const Date t1 = parse_date_arg(a.start, "--start");
  const Date t4 = parse_date_arg(a.end, "--end");

  FitConfig config;
  if (!a.config_file.empty()) {
    std::ifstream f(a.config_file);
    if (!f) throw DataError(fmt::format("cannot open {}", a.config_file));
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}: {}", a.config_file, e.what()));
    }
    config = fit_config_from_json(j, config);
  }
  config.top_k = a.top;
  if (a.seed) config.seed = *a.seed;
  if (a.max_evaluations) config.max_evaluations = *a.max_evaluations;
  if (!a.level_search.empty()) {
    config.level_search = a.level_search == "lattice" ? LevelSearch::lattice : LevelSearch::simplex;
  }
  config.threads = a.threads;
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const auto obs = load_observations(a.country, t1, t4, a.population, a.data_dir, a.populations, a.scale);
  for (const auto& w : obs.warnings) fmt::print(err, "warning: {}\n", w);

  const auto report = fit(obs, config);
  const auto created = a.created_at.empty() ? default_created_at(t4) : a.created_at;
  const auto doc = make_document(obs, report, created);
  write_file(a.out, dump_document(doc));

  fmt::print(out, "{} {}..{}  N={}  scale={}  cells={}  evaluations={}  isa={}\n", obs.country,
             t1.iso(), t4.iso(), obs.population_n, obs.scale, report.models.size(),
             report.evaluated_count, kernels::isa_name(kernels::active_isa()));
  fmt::print(out, "{:>4}  {:>14}  {:>10}  {:>10}  {:>10}  {:>12}\n", "rank", "Fval", "T2", "T3",
             "peak", "peak I");
  for (const auto& m : report.models) {
    fmt::print(out, "{:>4}  {:>14.6g}  {:>10}  {:>10}  {:>10}  {:>12.6g}\n", m.rank, m.fval,
               m.theta.t2.iso(), m.theta.t3.iso(), m.peak_date.iso(), m.peak_value);
  }
  const double fmin = report.models.empty() ? 0.0 : report.models.front().fval;
  fmt::print(out, "Fmax = {:.6g}  Fmax/Fmin = {}\n", report.fmax,
             fmin > 0.0 ? fmt::format("{:.6g}", report.fmax / fmin) : std::string("inf"));
  fmt::print(out, "model id {} written to {}\n", model_id(doc), a.out);
  return kOk;
}

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  const auto problems = a.spec.validate();
  problems.throw_if_invalid();
  const auto doc = load_document(a.models);
  if (a.rank < 1 || a.rank > doc.report.models.size()) {
    throw UsageError(fmt::format("--rank {} not in 1..{}", a.rank, doc.report.models.size()));
  }
  const auto projection = project(doc.model(a.rank), doc.context(), a.spec);
  write_file(a.out, projection_csv(projection));
  if (!a.json_out.empty()) write_file(a.json_out, to_json(projection).dump(2) + "\n");

  const auto& m = doc.model(a.rank);
  fmt::print(out, "{} model {} (Fval {:.6g})  T4={}  T5={}  horizon={}\n", doc.country, a.rank,
             m.fval, doc.t4.iso(), projection.t5.iso(), projection.horizon.iso());
  fmt::print(out, "peak I {:.6g} on {}\n", projection.peak.value, projection.peak.date.iso());
  fmt::print(out, "I at horizon {:.6g}\n", projection.value_at_horizon);
  fmt::print(out, "R0 at T4 {:.6g}, at horizon {:.6g}\n", projection.r0_series.at(doc.t4),
             projection.r0_series.at(projection.horizon));
  fmt::print(out, "series written to {}\n", a.out);
  return kOk;
}

int cmd_observations(const ObservationsArgs& a, std::ostream& out) {
  const Date t1 = parse_date_arg(a.start, "--start");
  const Date t4 = parse_date_arg(a.end, "--end");
  const auto obs = load_observations(a.country, t1, t4, a.population, a.data_dir, a.populations, a.scale);
  const auto text = to_json(obs).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_file(a.out, text);
  }
  return kOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  ServiceOptions options;
  options.data_dir = a.data_dir;
  options.model_store_dir = a.model_store_dir;
  options.population_file = a.populations;
  options.fit_threads = a.threads;
  options.fit_max_evaluations = a.max_evaluations;
  Service service(options);
  HttpServer server(service, a.host, a.port);
  fmt::print(out, "listening on http://{}:{}\n", a.host, server.port());
  out.flush();
  server.wait();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-varying SEIR model: fit, project, serve", "tvbg-seir"};
  app.require_subcommand(1);
  bool error_json = false;
  app.add_flag("--error-json", error_json, "Report failures as a JSON object on stderr");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Calibrate the model on [start, end] and write a model document");
  fit_cmd->add_option("--country", fa.country, "Country/Region as spelled in the tables")->required();
  fit_cmd->add_option("--start", fa.start, "T1, YYYY-MM-DD")->required();
  fit_cmd->add_option("--end", fa.end, "T4, YYYY-MM-DD")->required();
  fit_cmd->add_option("--population", fa.population, "Population N (default: from --populations)");
  fit_cmd->add_option("--data-dir", fa.data_dir, "Directory holding the three global tables")->capture_default_str();
  fit_cmd->add_option("--populations", fa.populations, "JSON object country -> population")->capture_default_str();
  fit_cmd->add_option("--scale", fa.scale, "Multiply the case series by this factor")->capture_default_str();
  fit_cmd->add_option("--top", fa.top, "Number of ranked models to keep")->capture_default_str()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fa.seed, "Multistart seed");
  fit_cmd->add_option("--config", fa.config_file, "FitConfig JSON overrides");
  fit_cmd->add_option("--threads", fa.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-evaluations", fa.max_evaluations, "Objective evaluation budget (0: unlimited)");
  fit_cmd->add_option("--level-search", fa.level_search, "simplex or lattice")->check(CLI::IsMember({"simplex", "lattice"}));
  fit_cmd->add_option("--created-at", fa.created_at, "Timestamp recorded in the document");
  fit_cmd->add_option("--out", fa.out, "Model document path")->required();

  ProjectArgs pa;
  auto* project_cmd = app.add_subcommand("project", "Project a fitted model past T4 under a scenario");
  project_cmd->add_option("--models", pa.models, "Model document from `fit`")->required();
  project_cmd->add_option("--rank", pa.rank, "Which ranked model to use")->capture_default_str();
  project_cmd->add_option("--t5", pa.spec.t5_offset_days, "Days from T4 to T5")->capture_default_str();
  project_cmd->add_option("--horizon", pa.spec.horizon_days, "Days from T4 to the horizon")->capture_default_str();
  project_cmd->add_option("--coef1", pa.spec.coef1, "beta(T4)/coef1 at T5")->capture_default_str();
  project_cmd->add_option("--coef2", pa.spec.coef2, "gamma(T4)*coef2 at T5")->capture_default_str();
  project_cmd->add_option("--coef11", pa.spec.coef11, "beta(T5)*coef11 at the horizon")->capture_default_str();
  project_cmd->add_option("--coef22", pa.spec.coef22, "gamma(T5)/coef22 at the horizon")->capture_default_str();
  project_cmd->add_option("--out", pa.out, "CSV output path")->required();
  project_cmd->add_option("--json", pa.json_out, "Also write the projection as JSON");

  ObservationsArgs oa;
  auto* obs_cmd = app.add_subcommand("observations", "Print the derived Idata/Rcum series as JSON");
  obs_cmd->add_option("--country", oa.country)->required();
  obs_cmd->add_option("--start", oa.start)->required();
  obs_cmd->add_option("--end", oa.end)->required();
  obs_cmd->add_option("--population", oa.population);
  obs_cmd->add_option("--data-dir", oa.data_dir)->capture_default_str();
  obs_cmd->add_option("--populations", oa.populations)->capture_default_str();
  obs_cmd->add_option("--scale", oa.scale)->capture_default_str();
  obs_cmd->add_option("--out", oa.out);

  ServeArgs sa;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON API");
  serve_cmd->add_option("--host", sa.host)->capture_default_str();
  serve_cmd->add_option("--port", sa.port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", sa.data_dir)->capture_default_str();
  serve_cmd->add_option("--model-store-dir", sa.model_store_dir)->capture_default_str();
  serve_cmd->add_option("--populations", sa.populations)->capture_default_str();
  serve_cmd->add_option("--threads", sa.threads)->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--max-evaluations", sa.max_evaluations, "Per-request evaluation budget")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    if (error_json) {
      err << json{{"code", "bad_arguments"}, {"message", e.what()}, {"details", json::object()},
                  {"exit_code", static_cast<int>(kBadArguments)}}.dump()
          << "\n";
    } else {
      err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    }
    return kBadArguments;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fa, out, err);
    if (project_cmd->parsed()) return cmd_project(pa, out);
    if (obs_cmd->parsed()) return cmd_observations(oa, out);
    if (serve_cmd->parsed()) return cmd_serve(sa, out);
    return kBadArguments;
  } catch (const std::exception& e) {
    auto failure = classify(e);
    if (error_json) {
      failure.body.body["exit_code"] = failure.exit_code;
      err << failure.body.body.dump() << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    return failure.exit_code;
  }
}

}  // namespace tvbg::cli
