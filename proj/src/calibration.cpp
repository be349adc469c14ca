#include "tvbg/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "tvbg/errors.hpp"
#include "tvbg/hash.hpp"
#include "tvbg/kernels.hpp"
#include "tvbg/nelder_mead.hpp"
#include "tvbg/scenarios.hpp"

namespace tvbg {
namespace {

constexpr int kMinWindowDays = 7;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Levels {
  double b2, b3, b4, g2, g3, g4;

  auto tie() const { return std::tie(b2, b3, b4, g2, g3, g4); }
};

struct Bounds {
  double bmin, bmax, gmin, gmax;
};

// Unit-box coordinates -> monotone levels. Beta is built upward from its T4 level,
// gamma upward from its T2 level; each coordinate is the fraction of the remaining
// headroom taken by the next increment, so every point of the box is admissible.
Levels levels_from_unit(const double p[6], const Bounds& b) {
  Levels lv{};
  lv.b4 = std::min(b.bmax, b.bmin + (b.bmax - b.bmin) * p[0]);
  lv.b3 = lv.b4 + std::max(0.0, b.bmax - lv.b4) * p[1];
  lv.b2 = lv.b3 + std::max(0.0, b.bmax - lv.b3) * p[2];
  lv.g2 = std::min(b.gmax, b.gmin + (b.gmax - b.gmin) * p[3]);
  lv.g3 = lv.g2 + std::max(0.0, b.gmax - lv.g2) * p[4];
  lv.g4 = lv.g3 + std::max(0.0, b.gmax - lv.g3) * p[5];
  return lv;
}

double safe_fraction(double num, double den) {
  return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
}

std::array<double, 6> unit_from_levels(const Levels& lv, const Bounds& b) {
  return {safe_fraction(lv.b4 - b.bmin, b.bmax - b.bmin), safe_fraction(lv.b3 - lv.b4, b.bmax - lv.b4),
          safe_fraction(lv.b2 - lv.b3, b.bmax - lv.b3), safe_fraction(lv.g2 - b.gmin, b.gmax - b.gmin),
          safe_fraction(lv.g3 - lv.g2, b.gmax - lv.g2), safe_fraction(lv.g4 - lv.g3, b.gmax - lv.g3)};
}

// Coordinates searched inside a cell. With T2 == T3 the T3 levels are tied to the T2
// levels, i.e. the beta increment above T3 and the gamma increment above T2 are zero.
std::vector<int> free_dims(bool coincident) {
  if (coincident) return {0, 1, 3, 5};
  return {0, 1, 2, 3, 4, 5};
}

bool less_fval(double a, double b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

// Heuristic level guess from early exponential growth: for SEIR with constant rates the
// growth rate g satisfies beta = (g + gamma)(g + sigma) / sigma.
Levels heuristic_levels(const ObservationSet& obs, const FitConfig& cfg) {
  const std::size_t span = std::min<std::size_t>(obs.idata.size(), 8);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t d = 0; d < span; ++d) {
    if (obs.idata[d] > 0.0) {
      const double x = static_cast<double>(d), y = std::log(obs.idata[d]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
  }
  double growth = 0.1;
  if (count >= 2) {
    const double den = count * sxx - sx * sx;
    if (den > 0.0) growth = (count * sxy - sx * sy) / den;
  }
  growth = std::clamp(growth, 0.0, 0.5);
  const double g2 = std::clamp(0.1, cfg.gamma_min, cfg.gamma_max);
  const double b2 =
      std::clamp((growth + g2) * (growth + cfg.sigma) / cfg.sigma, cfg.beta_min, cfg.beta_max);
  Levels lv{};
  lv.b2 = b2;
  lv.b3 = std::max(cfg.beta_min, b2 * 0.5);
  lv.b4 = std::max(cfg.beta_min, b2 * 0.25);
  lv.g2 = g2;
  lv.g3 = std::clamp(g2 * 1.5, g2, cfg.gamma_max);
  lv.g4 = std::clamp(g2 * 2.0, lv.g3, cfg.gamma_max);
  return lv;
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Shared, read-only context plus per-cell scratch buffers.
class CellEvaluator {
 public:
  CellEvaluator(const ObservationSet& obs, const FitConfig& cfg, std::span<const double> w1,
                std::span<const double> w2, int k2, int k3)
      : obs_(obs), cfg_(cfg), w1_(w1), w2_(w2), basis_(obs.window_days(), k2, k3, cfg.lambda) {
    const auto init = initial_state({cfg.sigma, obs.population_n}, obs.idata[0], 0.0);
    s0_ = init.s;
    i0_ = init.i;
  }

  /// Evaluates each level set, returning objective values in order.
  void evaluate(std::span<const Levels> cands, std::span<double> out) {
    const std::size_t L = cands.size();
    const std::size_t days = static_cast<std::size_t>(obs_.window_days()) + 1;
    const std::size_t steps = days - 1;
    beta_.assign(steps * L, 0.0);
    gamma_.assign(steps * L, 0.0);
    curve_.resize(days);
    for (std::size_t l = 0; l < L; ++l) {
      basis_.realize(cands[l].b2, cands[l].b3, cands[l].b4, curve_);
      for (std::size_t k = 0; k < steps; ++k) beta_[k * L + l] = curve_[k];
      basis_.realize(cands[l].g2, cands[l].g3, cands[l].g4, curve_);
      for (std::size_t k = 0; k < steps; ++k) gamma_[k * L + l] = curve_[k];
    }
    s0v_.assign(L, s0_);
    e0v_.assign(L, 0.0);
    i0v_.assign(L, i0_);
    r0v_.assign(L, 0.0);
    infected_.resize(days * L);
    removed_.resize(days * L);
    kernels::LaneBatch batch{L, steps, beta_, gamma_, s0v_, e0v_, i0v_, r0v_, cfg_.sigma,
                             obs_.population_n};
    kernels::simulate_ir(batch, infected_, removed_);
    sse_i_.resize(L);
    sse_r_.resize(L);
    kernels::weighted_sse(infected_, obs_.idata, w1_, L, sse_i_);
    kernels::weighted_sse(removed_, obs_.rcum, w2_, L, sse_r_);
    for (std::size_t l = 0; l < L; ++l) {
      out[l] = sse_i_[l] + sse_r_[l];
      ++evaluated_;
      if (std::isfinite(out[l])) fmax_ = std::max(fmax_, out[l]);
    }
  }

  std::size_t evaluated() const { return evaluated_; }
  double fmax() const { return fmax_; }

 private:
  const ObservationSet& obs_;
  const FitConfig& cfg_;
  std::span<const double> w1_;
  std::span<const double> w2_;
  SplineBasis basis_;
  double s0_ = 0.0;
  double i0_ = 0.0;
  std::vector<double> beta_, gamma_, curve_, s0v_, e0v_, i0v_, r0v_, infected_, removed_, sse_i_,
      sse_r_;
  std::size_t evaluated_ = 0;
  double fmax_ = 0.0;
};

struct CellResult {
  int k2 = 0;
  int k3 = 0;
  Levels best{};
  double fval = kInf;
  std::size_t evaluated = 0;
  double fmax = 0.0;
};

bool better_within_cell(double fa, const Levels& a, double fb, const Levels& b) {
  if (less_fval(fa, fb)) return true;
  if (less_fval(fb, fa)) return false;
  return a.tie() < b.tie();
}

class BudgetCounter {
 public:
  explicit BudgetCounter(std::size_t limit) : limit_(limit) {}
  void charge(std::size_t n) {
    const auto used = used_.fetch_add(n) + n;
    if (limit_ != 0 && used > limit_) {
      throw FitError(FitError::Kind::budget_exhausted,
                     fmt::format("evaluation budget of {} exhausted", limit_));
    }
  }

 private:
  std::size_t limit_;
  std::atomic<std::size_t> used_{0};
};

std::vector<double> lattice_values(double lo, double hi, std::size_t points) {
  std::vector<double> v(points);
  if (points == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t j = 0; j < points; ++j) {
    v[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
  }
  return v;
}

CellResult search_lattice(CellEvaluator& ev, const FitConfig& cfg, int k2, int k3,
                          BudgetCounter& budget) {
  const auto bv = lattice_values(cfg.beta_min, cfg.beta_max, cfg.lattice_points);
  const auto gv = lattice_values(cfg.gamma_min, cfg.gamma_max, cfg.lattice_points);
  const bool coincident = k2 == k3;
  std::vector<Levels> cands;
  for (double b2 : bv)
    for (double b3 : bv)
      for (double b4 : bv)
        for (double g2 : gv)
          for (double g3 : gv)
            for (double g4 : gv) {
              if (!(b2 >= b3 && b3 >= b4 && g2 <= g3 && g3 <= g4)) continue;
              if (coincident && (b3 != b2 || g3 != g2)) continue;
              cands.push_back({b2, b3, b4, g2, g3, g4});
            }
  std::vector<double> vals(cands.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t off = 0; off < cands.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, cands.size() - off);
    budget.charge(n);
    ev.evaluate(std::span(cands).subspan(off, n), std::span(vals).subspan(off, n));
  }
  CellResult res{k2, k3};
  for (std::size_t j = 0; j < cands.size(); ++j) {
    if (better_within_cell(vals[j], cands[j], res.fval, res.best)) {
      res.fval = vals[j];
      res.best = cands[j];
    }
  }
  return res;
}

CellResult search_simplex(CellEvaluator& ev, const ObservationSet& obs, const FitConfig& cfg,
                          int k2, int k3, BudgetCounter& budget) {
  const Bounds bounds{cfg.beta_min, cfg.beta_max, cfg.gamma_min, cfg.gamma_max};
  const auto dims = free_dims(k2 == k3);

  auto to_levels = [&](const Point& x) {
    double p[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t j = 0; j < dims.size(); ++j) p[dims[j]] = x[j];
    return levels_from_unit(p, bounds);
  };

  std::vector<Levels> scratch;
  BatchObjective batch = [&](std::span<const Point> pts, std::span<double> vals) {
    budget.charge(pts.size());
    scratch.clear();
    for (const auto& pt : pts) scratch.push_back(to_levels(pt));
    ev.evaluate(scratch, vals);
  };

  // Starts: one heuristic guess, then seeded uniform draws. The stream depends only on
  // (seed, T2, T3), so cells can run in any order.
  std::vector<Point> starts;
  {
    const auto u = unit_from_levels(heuristic_levels(obs, cfg), bounds);
    Point x;
    for (int d : dims) x.push_back(u[d]);
    starts.push_back(std::move(x));
  }
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k3)};
  std::mt19937_64 rng(seq);
  for (std::size_t m = 0; m < cfg.multistart; ++m) {
    Point x(dims.size());
    for (auto& v : x) v = unit_draw(rng);
    starts.push_back(std::move(x));
  }

  NelderMeadOptions opt;
  opt.max_iterations = cfg.local_iterations;

  CellResult res{k2, k3};
  for (const auto& start : starts) {
    auto run = nelder_mead_box(batch, start, opt);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
      NelderMeadOptions polish = opt;
      polish.initial_step = 0.05;
      auto again = nelder_mead_box(batch, run.x, polish);
      if (less_fval(again.f, run.f)) run = std::move(again);
    }
    const auto lv = to_levels(run.x);
    if (better_within_cell(run.f, lv, res.fval, res.best)) {
      res.fval = run.f;
      res.best = lv;
    }
  }
  return res;
}

ThetaSet theta_of(const CellResult& c, Date t1, double lambda) {
  return {t1 + c.k2, t1 + c.k3, c.best.b2, c.best.b3, c.best.b4,
          c.best.g2, c.best.g3, c.best.g4, lambda};
}

double rms(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

void ObservationSet::validate() const {
  if (t4 < t1) throw LengthError("observation window ends before it starts");
  const auto days = static_cast<std::size_t>(window_days()) + 1;
  if (idata.size() != days || rcum.size() != days) {
    throw LengthError(fmt::format("observation series must cover {} days (idata {}, rcum {})", days,
                                  idata.size(), rcum.size()));
  }
  if (!(population_n > 0.0)) throw DomainError("population must be positive");
  for (double x : idata) {
    if (!(x >= 0.0)) throw DomainError("daily new infected counts must be nonnegative");
  }
  for (std::size_t k = 1; k < rcum.size(); ++k) {
    if (rcum[k] < rcum[k - 1]) throw DomainError("cumulative removed series decreases");
  }
}

void FitConfig::validate() const {
  std::vector<Violation> bad;
  if (top_k < 1) bad.push_back({"top_k", "top_k must be >= 1"});
  if (!(beta_min > 0.0 && beta_min <= beta_max)) bad.push_back({"beta_bounds", "beta bounds must be positive and ordered"});
  if (!(gamma_min > 0.0 && gamma_min <= gamma_max)) bad.push_back({"gamma_bounds", "gamma bounds must be positive and ordered"});
  if (node_step < 1) bad.push_back({"node_step", "node grid step must be >= 1"});
  if (!(lambda > 0.0)) bad.push_back({"lambda", "lambda must be > 0"});
  if (!(sigma > 0.0)) bad.push_back({"sigma", "sigma must be > 0"});
  if (lattice_points < 1) bad.push_back({"lattice_points", "lattice needs >= 1 point"});
  for (const auto* w : {&w1, &w2}) {
    if (w->empty() || std::any_of(w->begin(), w->end(), [](double x) { return !(x >= 0.0); })) {
      bad.push_back({"weights", "weights must be nonempty and nonnegative"});
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

std::vector<double> expand_weights(const std::vector<double>& weights, std::size_t days) {
  if (weights.size() == 1) return std::vector<double>(days, weights[0]);
  if (weights.size() != days) {
    throw LengthError(fmt::format("weights have {} entries, window has {} days", weights.size(), days));
  }
  return weights;
}

double objective_from_rates(std::span<const double> beta, std::span<const double> gamma,
                            const ObservationSet& obs, const FitConfig& config) {
  obs.validate();
  const auto days = static_cast<std::size_t>(obs.window_days()) + 1;
  const std::size_t steps = days - 1;
  if (beta.size() < steps || gamma.size() < steps) {
    throw LengthError(fmt::format("rate series cover {}/{} days, need {}", beta.size(),
                                  gamma.size(), steps));
  }
  const auto w1 = expand_weights(config.w1, days);
  const auto w2 = expand_weights(config.w2, days);
  const auto init = initial_state({config.sigma, obs.population_n}, obs.idata[0], 0.0);
  const double s0 = init.s, e0 = 0.0, i0 = init.i, r0 = 0.0;
  std::vector<double> infected(days), removed(days);
  kernels::LaneBatch batch{1, steps, beta.first(steps), gamma.first(steps), {&s0, 1}, {&e0, 1},
                           {&i0, 1}, {&r0, 1}, config.sigma, obs.population_n};
  kernels::simulate_ir(batch, infected, removed);
  double sse_i = 0.0, sse_r = 0.0;
  kernels::weighted_sse(infected, obs.idata, w1, 1, {&sse_i, 1});
  kernels::weighted_sse(removed, obs.rcum, w2, 1, {&sse_r, 1});
  return sse_i + sse_r;
}

double objective(const ThetaSet& theta, const ObservationSet& obs, const FitConfig& config) {
  const auto curves = build_rate_curves(theta, obs.t1, obs.t4);
  return objective_from_rates(curves.beta.values, curves.gamma.values, obs, config);
}

Trajectory model_trajectory(const ThetaSet& theta, const ObservationSet& obs, double sigma) {
  obs.validate();
  const auto curves = build_rate_curves(theta, obs.t1, obs.t4);
  const EpidemicConstants constants{sigma, obs.population_n};
  return simulate(initial_state(constants, obs.idata[0], 0.0), curves.beta.values,
                  curves.gamma.values, constants, static_cast<std::size_t>(obs.window_days()),
                  obs.t1);
}

ResidualSeries residuals(const FittedModel& model, const ObservationSet& obs, double sigma) {
  const auto traj = model_trajectory(model.theta, obs, sigma);
  ResidualSeries out{obs.t1, {}, {}};
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.infected.push_back(traj.states[k].i - obs.idata[k]);
    out.removed.push_back(traj.states[k].r - obs.rcum[k]);
  }
  return out;
}

std::string observation_fingerprint(const ObservationSet& obs) {
  const nlohmann::json j = {{"country", obs.country},   {"t1", obs.t1.iso()},
                            {"t4", obs.t4.iso()},       {"population_n", obs.population_n},
                            {"scale", obs.scale},       {"idata", obs.idata},
                            {"rcum", obs.rcum}};
  return sha256_hex(j.dump());
}

FitReport fit(const ObservationSet& obs, const FitConfig& config) {
  config.validate();
  obs.validate();
  const int D = obs.window_days();
  if (D < kMinWindowDays) {
    throw FitError(FitError::Kind::window_too_short,
                   fmt::format("fit window of {} days is shorter than {} days", D, kMinWindowDays));
  }
  const auto days = static_cast<std::size_t>(D) + 1;
  const auto w1 = expand_weights(config.w1, days);
  const auto w2 = expand_weights(config.w2, days);

  // Admissible node pairs: 1 <= k2 <= k3 <= D - 1.
  std::vector<int> k2s = config.t2_offsets, k3s = config.t3_offsets;
  if (k2s.empty()) {
    for (int k = 1; k <= D - 1; k += config.node_step) k2s.push_back(k);
  }
  if (k3s.empty()) {
    for (int k = 1; k <= D - 1; k += config.node_step) k3s.push_back(k);
  }
  std::sort(k2s.begin(), k2s.end());
  std::sort(k3s.begin(), k3s.end());
  k2s.erase(std::unique(k2s.begin(), k2s.end()), k2s.end());
  k3s.erase(std::unique(k3s.begin(), k3s.end()), k3s.end());
  std::vector<std::pair<int, int>> cells;
  for (int k2 : k2s) {
    for (int k3 : k3s) {
      if (k2 >= 1 && k2 <= k3 && k3 <= D - 1) cells.emplace_back(k2, k3);
    }
  }
  if (cells.empty()) {
    throw FitError(FitError::Kind::infeasible, "no admissible node pair in the fit window");
  }

  BudgetCounter budget(config.max_evaluations);
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1)) {
        const auto [k2, k3] = cells[c];
        CellEvaluator ev(obs, config, w1, w2, k2, k3);
        auto res = config.level_search == LevelSearch::lattice
                       ? search_lattice(ev, config, k2, k3, budget)
                       : search_simplex(ev, obs, config, k2, k3, budget);
        res.evaluated = ev.evaluated();
        res.fmax = ev.fmax();
        results[c] = res;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(cells.size());
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(config.threads, 1, cells.size());
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  FitReport report;
  report.config = config;
  report.observation_fingerprint = observation_fingerprint(obs);
  for (const auto& r : results) {
    report.evaluated_count += r.evaluated;
    report.fmax = std::max(report.fmax, r.fmax);
  }
  std::sort(results.begin(), results.end(), [](const CellResult& a, const CellResult& b) {
    if (less_fval(a.fval, b.fval)) return true;
    if (less_fval(b.fval, a.fval)) return false;
    return std::tie(a.k2, a.k3) < std::tie(b.k2, b.k3);
  });
  if (!std::isfinite(results.front().fval)) {
    throw FitError(FitError::Kind::infeasible, "every candidate produced a non-finite objective");
  }

  for (std::size_t k = 0; k < results.size() && report.models.size() < config.top_k; ++k) {
    if (!std::isfinite(results[k].fval)) break;
    FittedModel m;
    m.theta = theta_of(results[k], obs.t1, config.lambda);
    m.fval = results[k].fval;
    m.rank = report.models.size() + 1;
    const auto res = residuals(m, obs, config.sigma);
    m.rmse_infected = rms(res.infected);
    m.rmse_removed = rms(res.removed);
    const auto peak = find_peak(model_trajectory(m.theta, obs, config.sigma), obs.t1);
    m.peak_date = peak.date;
    m.peak_value = peak.value;
    report.models.push_back(std::move(m));
  }
  return report;
}

}  // namespace tvbg
