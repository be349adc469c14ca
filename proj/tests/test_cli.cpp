#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "tvbg/model_document.hpp"
#include "tvbg/service.hpp"

using namespace tvbg;
using fixtures::d;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tvbg-seir");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Env {
  fixtures::TempDir root;

  Env() {
    const auto obs = fixtures::synthetic(fixtures::reference_theta(d("2020-03-08"), 5, 11),
                                         d("2020-03-08"), d("2020-03-28"), 1e6, 15);
    fixtures::write_jhu_tables(root / "data", obs);
    fixtures::write_text(root / "quick.json",
                         R"({"multistart": 2, "local_iterations": 60, "restarts": 0, "node_step": 3})");
  }

  std::vector<std::string> fit_args(const std::string& out) const {
    return {"fit", "--country", "Synthetica", "--start", "2020-03-08", "--end", "2020-03-28",
            "--population", "1000000", "--data-dir", (root / "data").string(), "--config",
            (root / "quick.json").string(), "--top", "3", "--out", (root / out).string()};
  }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("argument errors exit with 2") {
  CHECK(run({}).code == cli::kBadArguments);
  CHECK(run({"fit"}).code == cli::kBadArguments);
  CHECK(run({"bogus"}).code == cli::kBadArguments);
  Env env;
  auto args = env.fit_args("m.json");
  args[4] = "2020-13-01";
  const auto r = run(args);
  CHECK(r.code == cli::kBadArguments);
  CHECK(r.err.find("--start") != std::string::npos);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("data and fit errors") {
  Env env;
  auto args = env.fit_args("m.json");
  args[2] = "Atlantis";
  CHECK(run(args).code == cli::kDataError);
  args = env.fit_args("m.json");
  args[10] = (env.root / "nowhere").string();
  CHECK(run(args).code == cli::kDataError);
  args = env.fit_args("m.json");
  args[6] = "2020-03-10";
  CHECK(run(args).code == cli::kFitFailure);

  args.insert(args.begin(), "--error-json");
  const auto r = run(args);
  CHECK(r.code == cli::kFitFailure);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["code"] == "fit_failed");
  CHECK(j["details"]["reason"] == "window_too_short");
  CHECK(j["exit_code"] == 4);

  args = env.fit_args("m.json");
  args.erase(args.begin() + 7, args.begin() + 9);  // no --population, no table entry
  CHECK(run(args).code == cli::kBadArguments);
}

TEST_CASE("fit twice gives byte-identical documents") {
  Env env;
  const auto a = run(env.fit_args("a.json"));
  REQUIRE(a.code == 0);
  const auto b = run(env.fit_args("b.json"));
  REQUIRE(b.code == 0);
  CHECK(fixtures::read_text(env.root / "a.json") == fixtures::read_text(env.root / "b.json"));
  CHECK(a.out.find("Fmax") != std::string::npos);
  CHECK(a.out.find("Fmax/Fmin") != std::string::npos);
  const auto doc = load_document(env.root / "a.json");
  CHECK(doc.report.models.size() == 3);
  CHECK(doc.created_at == "2020-03-28T00:00:00Z");
  CHECK(a.out.find(doc.report.models[0].theta.t2.iso()) != std::string::npos);
}

TEST_CASE("scale is applied before fitting") {
  Env env;
  auto args = env.fit_args("x100.json");
  args.insert(args.end(), {"--scale", "100"});
  REQUIRE(run(args).code == 0);
  const auto doc = load_document(env.root / "x100.json");
  CHECK(doc.scale == 100);
  CHECK(doc.initial_infected == 1500);
}

TEST_CASE("project") {
  Env env;
  REQUIRE(run(env.fit_args("m.json")).code == 0);
  const auto models = (env.root / "m.json").string();

  auto r = run({"project", "--models", models, "--t5", "25", "--out", (env.root / "base.csv").string(),
                "--json", (env.root / "base.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("T5=2020-04-22") != std::string::npos);
  const auto rows = csv_rows(fixtures::read_text(env.root / "base.csv"));
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == std::vector<std::string>{"date", "beta", "gamma", "S", "E", "I", "R", "R0"});
  std::size_t t4_row = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][0] == "2020-03-28") t4_row = k;
  }
  REQUIRE(t4_row > 0);
  for (std::size_t k = t4_row; k < rows.size(); ++k) {
    CHECK(rows[k][1] == rows[t4_row][1]);
    CHECK(rows[k][2] == rows[t4_row][2]);
  }
  CHECK(rows.back()[0] == "2020-05-27");

  auto horizon_i = [&](const char* coef) {
    const auto out = (env.root / fmt::format("c{}.csv", coef)).string();
    REQUIRE(run({"project", "--models", models, "--coef11", coef, "--out", out}).code == 0);
    return std::stod(csv_rows(fixtures::read_text(out)).back()[5]);
  };
  CHECK(horizon_i("1.8") > horizon_i("1.4"));

  CHECK(run({"project", "--models", models, "--coef1", "0", "--out", (env.root / "x.csv").string()}).code ==
        cli::kBadArguments);
  CHECK(run({"project", "--models", models, "--coef22", "-1", "--out", (env.root / "x.csv").string()}).code ==
        cli::kBadArguments);
  CHECK(run({"project", "--models", models, "--rank", "7", "--out", (env.root / "x.csv").string()}).code ==
        cli::kBadArguments);
  CHECK(run({"project", "--models", (env.root / "none.json").string(), "--out",
             (env.root / "x.csv").string()})
            .code == cli::kDataError);
}

TEST_CASE("cli and api projections agree") {
  Env env;
  REQUIRE(run(env.fit_args("m.json")).code == 0);
  const auto doc = load_document(env.root / "m.json");
  const auto id = model_id(doc);
  std::filesystem::create_directories(env.root / "store");
  std::filesystem::copy_file(env.root / "m.json", env.root / "store" / (id + ".json"));

  REQUIRE(run({"project", "--models", (env.root / "m.json").string(), "--rank", "2", "--t5", "12",
               "--horizon", "40", "--coef1", "1.3", "--coef2", "0.8", "--coef11", "1.6", "--coef22", "1.1",
               "--out", (env.root / "p.csv").string()})
              .code == 0);
  ServiceOptions options;
  options.data_dir = env.root / "data";
  options.model_store_dir = env.root / "store";
  Service svc(options);
  const auto r = svc.project({{"model_id", id}, {"rank", 2}, {"t5_offset_days", 12}, {"horizon_days", 40},
                              {"coef1", 1.3}, {"coef2", 0.8}, {"coef11", 1.6}, {"coef22", 1.1}});
  REQUIRE(r.status == 200);
  const auto rows = csv_rows(fixtures::read_text(env.root / "p.csv"));
  REQUIRE(rows.size() == r.body["I"].size() + 1);
  const char* columns[] = {"beta", "gamma", "S", "E", "I", "R", "r0"};
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k][0] == r.body["dates"][k - 1]);
    for (std::size_t c = 0; c < 7; ++c) {
      REQUIRE(std::stod(rows[k][c + 1]) == r.body[columns[c]][k - 1].get<double>());
    }
  }
}

TEST_CASE("observations") {
  Env env;
  const auto r = run({"observations", "--country", "Synthetica", "--start", "2020-03-08", "--end",
                      "2020-03-12", "--population", "1000000", "--data-dir", (env.root / "data").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["idata"].size() == 5);
}

}
