// Acceptance suite. `acceptance` runs every criterion; `acceptance 3 5` runs a subset.
// Each criterion prints one PASS/FAIL line; the exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "cli.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "tvbg/calibration.hpp"
#include "tvbg/data_ingest.hpp"
#include "tvbg/kernels.hpp"
#include "tvbg/rate_splines.hpp"
#include "tvbg/scenarios.hpp"
#include "tvbg/seir.hpp"

using namespace tvbg;
using fixtures::d;

namespace {

// Pinned tolerances and limits.
constexpr double kConservationTol = 1e-9;
constexpr double kConservationMillis = 10.0;
constexpr double kStepRelTol = 1e-12;
constexpr double kSplineTol = 1e-12;
constexpr int kSplineSamples = 1000;
constexpr double kRecoveryRmseFraction = 0.01;
constexpr int kRecoveryNodeSlackDays = 2;
constexpr double kRecoverySeconds = 300.0;
constexpr double kBulgariaSeconds = 600.0;
constexpr double kCoefTol = 1e-12;
constexpr double kR0Tol = 1e-12;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome conservation() {
  std::mt19937_64 rng(20200308);
  std::uniform_real_distribution<double> b(0.0, 2.0), g(0.01, 1.0), f(0.0, 0.05);
  double worst = 0.0, slowest_ms = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const double n = std::pow(10.0, 2 + rep % 7);
    const EpidemicConstants c{kDefaultSigma, n};
    std::vector<double> beta(365), gamma(365);
    for (int k = 0; k < 365; ++k) {
      beta[k] = b(rng);
      gamma[k] = g(rng);
    }
    const auto init = initial_state(c, f(rng) * n, f(rng) * n);
    const auto t0 = Clock::now();
    const auto traj = simulate(init, beta, gamma, c, 365);
    slowest_ms = std::max(slowest_ms, seconds_since(t0) * 1e3);
    for (const auto& x : traj.states) worst = std::max(worst, std::fabs(x.total() - n) / n);
  }
  return {worst <= kConservationTol && slowest_ms < kConservationMillis,
          fmt::format("max |S+E+I+R-N|/N = {:.3g} (tol {:.0e}), slowest 365-day run {:.3f} ms (limit {} ms)",
                      worst, kConservationTol, slowest_ms, kConservationMillis)};
}

Outcome euler_step() {
  const EpidemicConstants c{1.0 / 5.2, 1000.0};
  const auto got = step({990, 5, 5, 0}, 0.5, 0.1, c);
  // infection 0.5*990*5/1000, onset 5/5.2, removal 0.1*5
  const long double inf = 0.5L * 990 * 5 / 1000, onset = 5 / 5.2L, rem = 0.1L * 5;
  const long double want[4] = {990 - inf, 5 + inf - onset, 5 + onset - rem, rem};
  const double have[4] = {got.s, got.e, got.i, got.r};
  double worst = 0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, static_cast<double>(std::fabs((have[k] - want[k]) / want[k])));
  return {worst <= kStepRelTol,
          fmt::format("(s, e, i, r) = ({}, {}, {}, {}), max rel error {:.3g} (tol {:.0e})", got.s, got.e,
                      got.i, got.r, worst, kStepRelTol)};
}

Outcome spline_exactness() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> b(0.01, 2.0), g(0.01, 1.0);
  const Date t1 = d("2020-03-08");
  double worst = 0;
  std::size_t monotone_breaks = 0, lead_in_breaks = 0;
  for (int rep = 0; rep < kSplineSamples; ++rep) {
    const int days = 7 + rep % 60;
    std::uniform_int_distribution<int> node(1, days - 1);
    int k2 = node(rng), k3 = node(rng);
    if (k2 > k3) std::swap(k2, k3);
    double bs[3] = {b(rng), b(rng), b(rng)}, gs[3] = {g(rng), g(rng), g(rng)};
    std::sort(bs, bs + 3, std::greater<>());
    std::sort(gs, gs + 3);
    ThetaSet th{t1 + k2, t1 + k3, bs[0], bs[1], bs[2], gs[0], gs[1], gs[2]};
    if (k2 == k3) {
      th.beta_t3 = th.beta_t2;
      th.gamma_t3 = th.gamma_t2;
    }
    const Date t4 = t1 + days;
    const auto c = build_rate_curves(th, t1, t4);
    for (auto [got, want] : {std::pair{c.beta.at(th.t2), th.beta_t2}, {c.beta.at(th.t3), th.beta_t3},
                             {c.beta.at(t4), th.beta_t4}, {c.gamma.at(th.t2), th.gamma_t2},
                             {c.gamma.at(th.t3), th.gamma_t3}, {c.gamma.at(t4), th.gamma_t4}}) {
      worst = std::max(worst, std::fabs(got - want));
    }
    for (std::size_t k = 1; k < c.beta.size(); ++k) {
      if (c.beta[k] > c.beta[k - 1] || c.gamma[k] < c.gamma[k - 1]) ++monotone_breaks;
    }
    for (Date t = t1; t <= th.t2; t = t + 1) {
      if (c.beta.at(t) != th.beta_t2 || c.gamma.at(t) != th.gamma_t2) ++lead_in_breaks;
    }
  }
  return {worst <= kSplineTol && monotone_breaks == 0 && lead_in_breaks == 0,
          fmt::format("{} thetas: max node error {:.3g} (tol {:.0e}), monotonicity breaks {}, "
                      "non-constant lead-in days {}",
                      kSplineSamples, worst, kSplineTol, monotone_breaks, lead_in_breaks)};
}

Outcome synthetic_recovery() {
  const Date t1 = d("2020-03-08"), t4 = t1 + 41;
  const ThetaSet truth{t1 + 9, t1 + 27, 0.85, 0.32, 0.18, 0.045, 0.07, 0.11};
  const auto obs = fixtures::synthetic(truth, t1, t4, 1e6, 25);
  FitConfig cfg;
  cfg.threads = worker_threads();
  const auto t0 = Clock::now();
  const auto rep = fit(obs, cfg);
  const double secs = seconds_since(t0);
  const auto& best = rep.models.front();
  double peak = 0;
  for (double v : obs.idata) peak = std::max(peak, v);
  const int dt2 = best.theta.t2 - truth.t2, dt3 = best.theta.t3 - truth.t3;
  const bool ok = best.rmse_infected <= kRecoveryRmseFraction * peak &&
                  std::abs(dt2) <= kRecoveryNodeSlackDays && std::abs(dt3) <= kRecoveryNodeSlackDays &&
                  secs <= kRecoverySeconds;
  return {ok, fmt::format("I RMSE {:.4g} = {:.3g}% of peak {:.6g} (limit {}%), T2 off by {} d, T3 off by {} d "
                          "(limit {} d), {:.1f} s (limit {} s), {} evaluations",
                          best.rmse_infected, 100 * best.rmse_infected / peak, peak,
                          100 * kRecoveryRmseFraction, dt2, dt3, kRecoveryNodeSlackDays, secs,
                          kRecoverySeconds, rep.evaluated_count)};
}

Outcome brute_force() {
  const Date t1 = d("2020-03-08"), t4 = t1 + 12;
  const ThetaSet truth{t1 + 4, t1 + 7, 0.83, 0.41, 0.27, 0.07, 0.19, 0.33};
  const auto obs = fixtures::synthetic(truth, t1, t4, 1e5, 40);
  FitConfig cfg;
  cfg.level_search = LevelSearch::lattice;
  cfg.lattice_points = 5;
  cfg.t2_offsets = {3, 4, 5};
  cfg.t3_offsets = {6, 7, 8};
  const auto rep = fit(obs, cfg);

  std::vector<double> bv, gv;
  for (int j = 0; j < 5; ++j) {
    bv.push_back(cfg.beta_min + (cfg.beta_max - cfg.beta_min) * j / 4.0);
    gv.push_back(cfg.gamma_min + (cfg.gamma_max - cfg.gamma_min) * j / 4.0);
  }
  const std::vector<double> ones(13, 1.0);
  long double best = std::numeric_limits<long double>::infinity();
  ThetaSet winner;
  std::size_t enumerated = 0;
  for (int k2 : cfg.t2_offsets)
    for (int k3 : cfg.t3_offsets)
      for (double b2 : bv)
        for (double b3 : bv)
          for (double b4 : bv)
            for (double g2 : gv)
              for (double g3 : gv)
                for (double g4 : gv) {
                  if (b3 > b2 || b4 > b3 || g3 < g2 || g4 < g3) continue;
                  ++enumerated;
                  const auto f = oracle::objective(12, k2, k3, {b2, b3, b4, g2, g3, g4}, 0.4L, 1.0L / 5.2L,
                                                   1e5L, obs.idata, obs.rcum, ones, ones);
                  if (f < best) {
                    best = f;
                    winner = {t1 + k2, t1 + k3, b2, b3, b4, g2, g3, g4};
                  }
                }
  const auto& got = rep.models.front();
  const bool same = got.theta == winner;
  return {same, fmt::format("{} candidates enumerated; fit winner T2={} T3={} F={:.10g}, enumeration "
                            "winner T2={} T3={} F={:.10g}, identical Theta: {}",
                            enumerated, got.theta.t2.iso(), got.theta.t3.iso(), got.fval, winner.t2.iso(),
                            winner.t3.iso(), static_cast<double>(best), same ? "yes" : "no")};
}

struct BulgariaFit {
  std::optional<ObservationSet> obs;
  std::optional<FitReport> report;
  double seconds = 0;
  std::string problem;
};

std::filesystem::path jhu_dir() {
  if (const char* env = std::getenv("TVBG_JHU_DIR"); env && *env) return env;
  return std::filesystem::path(TVBG_SOURCE_DIR) / "data" / "jhu";
}

const BulgariaFit& bulgaria() {
  static const BulgariaFit cached = [] {
    BulgariaFit out;
    const auto dir = jhu_dir();
    try {
      const auto data = CountryData::load(dir);
      out.obs = derive_observations(data.confirmed, data.recovered, data.deaths, "Bulgaria",
                                    d("2020-03-08"), d("2020-04-18"), 7e6);
    } catch (const std::exception& e) {
      out.problem = fmt::format("JHU data unavailable under {} ({}); run tools/fetch_jhu_data.sh", dir.string(),
                                e.what());
      return out;
    }
    FitConfig cfg;
    cfg.threads = worker_threads();
    const auto t0 = Clock::now();
    try {
      out.report = fit(*out.obs, cfg);
    } catch (const std::exception& e) {
      out.problem = fmt::format("fit failed: {}", e.what());
    }
    out.seconds = seconds_since(t0);
    return out;
  }();
  return cached;
}

Outcome bulgaria_structure() {
  const auto& b = bulgaria();
  if (!b.report) return {false, b.problem};
  const auto& m = b.report->models.front();
  const bool node_ok = m.theta.t2 >= d("2020-03-14") && m.theta.t2 <= d("2020-03-23");
  const bool peak_ok = m.peak_date >= d("2020-04-10") && m.peak_date <= d("2020-04-17");
  return {node_ok && peak_ok && b.seconds <= kBulgariaSeconds,
          fmt::format("best T2 {} (want 2020-03-14..2020-03-23), I peak {} (want 2020-04-10..2020-04-17), "
                      "Fval {:.6g}, {:.1f} s (limit {} s)",
                      m.theta.t2.iso(), m.peak_date.iso(), m.fval, b.seconds, kBulgariaSeconds)};
}

Outcome bulgaria_scenarios() {
  const auto& b = bulgaria();
  if (!b.report) return {false, b.problem};
  const auto& m = b.report->models.front();
  const auto ctx = ModelContext::of(*b.obs);

  const auto base = project(m, ctx, ScenarioSpec{});
  const double b4 = base.beta_ext.at(ctx.t4), g4 = base.gamma_ext.at(ctx.t4);
  std::size_t moved = 0;
  for (Date t = ctx.t4; t <= base.horizon; t = t + 1) {
    if (base.beta_ext.at(t) != b4 || base.gamma_ext.at(t) != g4) ++moved;
  }

  std::vector<double> horizon_i;
  for (double c : {1.0, 1.4, 1.8}) {
    ScenarioSpec s;
    s.coef11 = c;
    horizon_i.push_back(project(m, ctx, s).value_at_horizon);
  }
  const bool ordered = horizon_i[0] < horizon_i[1] && horizon_i[1] < horizon_i[2];

  double worst = 0;
  for (double c : {0.5, 1.25, 2.0, 3.0}) {
    ScenarioSpec s;
    s.coef1 = c;
    const auto p = project(m, ctx, s);
    worst = std::max(worst, std::fabs(p.beta_ext.at(p.t5) - b4 / c) / (b4 / c));
  }
  return {moved == 0 && ordered && worst <= kCoefTol,
          fmt::format("unit coefficients: {} post-T4 days off the T4 rates; horizon I at coef11 1.0/1.4/1.8 = "
                      "{:.6g} / {:.6g} / {:.6g}; max |beta(T5) - beta(T4)/coef1| rel {:.3g} (tol {:.0e})",
                      moved, horizon_i[0], horizon_i[1], horizon_i[2], worst, kCoefTol)};
}

Outcome r0_invariance() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> b(0.01, 2.0), g(0.01, 1.0);
  const Date t1 = d("2020-03-08");
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    RateSeries beta{t1, {}}, gamma{t1, {}};
    for (int k = 0; k < 90; ++k) {
      beta.values.push_back(b(rng));
      gamma.values.push_back(g(rng));
    }
    const auto r0 = reproduction_number(beta, gamma);
    for (double c : {0.1, 2.0, 10.0}) {
      RateSeries sb = beta, sg = gamma;
      for (auto& v : sb.values) v *= c;
      for (auto& v : sg.values) v *= c;
      const auto r = reproduction_number(sb, sg);
      for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, std::fabs(r[k] - r0[k]) / r0[k]);
    }
  }
  return {worst <= kR0Tol, fmt::format("100 series x c in {{0.1, 2, 10}}: max rel change {:.3g} (tol {:.0e})",
                                       worst, kR0Tol)};
}

Outcome determinism() {
  fixtures::TempDir root;
  const Date t1 = d("2020-03-08");
  const auto obs = fixtures::synthetic(fixtures::reference_theta(t1, 7, 16), t1, t1 + 24, 1e6, 12);
  fixtures::write_jhu_tables(root / "data", obs);
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"tvbg-seir", "fit", "--country", "Synthetica", "--start", t1.iso(),
                                    "--end", (t1 + 24).iso(), "--population", "1000000", "--data-dir",
                                    (root / "data").string(), "--seed", "42", "--top", "3",
                                    "--threads", std::to_string(worker_threads()), "--out",
                                    (root / out).string()};
  };
  std::ostringstream sink;
  const int a = cli::run(args("a.json"), sink, sink);
  const int b = cli::run(args("b.json"), sink, sink);
  const auto ta = fixtures::read_text(root / "a.json"), tb = fixtures::read_text(root / "b.json");
  const bool same = a == 0 && b == 0 && !ta.empty() && ta == tb;
  return {same, fmt::format("exit codes {} and {}; documents of {} and {} bytes, byte-identical: {}", a, b,
                            ta.size(), tb.size(), ta == tb ? "yes" : "no")};
}

Outcome ingestion() {
  const std::string header = "Province/State,Country/Region,Lat,Long,3/8/20,3/9/20,3/10/20,3/11/20\n";
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  try {
    const auto conf = parse_timeseries_csv(
        header + "North,X,0,0,0,1,2,4\n\"South, Bay\",X,0,0,0,0,1,2\n,Y,0,0,5,9,7,10\n", SeriesKind::confirmed);
    const auto rec = parse_timeseries_csv(header + ",X,0,0,0,0,1,1\n,Y,0,0,0,1,1,2\n", SeriesKind::recovered);
    const auto dead = parse_timeseries_csv(header + ",X,0,0,0,0,0,1\n,Y,0,0,0,0,0,0\n", SeriesKind::deaths);
    expect(conf.series("X") == std::vector<std::int64_t>{0, 1, 3, 6}, "province sum");
    expect(*conf.first_date == Date(2020, 3, 8) && *conf.last_date == Date(2020, 3, 11), "M/D/YY dates");
    const auto x = derive_observations(conf, rec, dead, "X", d("2020-03-09"), d("2020-03-11"), 1000);
    expect(x.idata == std::vector<double>{1, 2, 3}, "first differences");
    expect(x.rcum == std::vector<double>{0, 1, 2}, "removed rebased");
    const auto y = derive_observations(conf, rec, dead, "Y", d("2020-03-09"), d("2020-03-11"), 1000);
    expect(y.idata == std::vector<double>{4, 0, 3}, "negative difference clamped");
    expect(y.warnings.size() == 1, "clamp warned");
    const auto x100 = derive_observations(conf, rec, dead, "X", d("2020-03-09"), d("2020-03-11"), 1000, 100);
    expect(x100.idata == std::vector<double>{100, 200, 300} && x100.rcum == std::vector<double>{0, 100, 200},
           "x100 scaling");
  } catch (const std::exception& e) {
    failed.push_back(e.what());
  }
  std::string detail = "province sum, M/D/YY, differencing, clamp, x100: ";
  if (failed.empty()) {
    detail += "all exact";
  } else {
    for (const auto& f : failed) detail += f + "; ";
    detail += "failed";
  }
  return {failed.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "conservation", conservation},
      {2, "Euler step oracle", euler_step},
      {3, "spline exactness", spline_exactness},
      {4, "synthetic recovery", synthetic_recovery},
      {5, "brute-force lattice equivalence", brute_force},
      {6, "Bulgaria structural reproduction", bulgaria_structure},
      {7, "scenario identity and ordering", bulgaria_scenarios},
      {8, "R0 invariance", r0_invariance},
      {9, "fit determinism", determinism},
      {10, "ingestion fixtures", ingestion},
  };
  std::vector<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.push_back(std::atoi(argv[k]));

  std::cout << fmt::format("kernel isa: {}\n", kernels::isa_name(kernels::active_isa()));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("criterion {:>2} {:<34} {}  {}\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail)
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
