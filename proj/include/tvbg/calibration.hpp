#pragma once

// Least-squares calibration of the spline parameters against daily new cases and
// cumulative removed counts:
//
//   F = sum_t w1(t) (I(t) - Idata(t))^2 + sum_t w2(t) (R(t) - Rcum(t))^2
//
// Search: every admissible integer-day node pair (T2, T3) is a cell; inside a cell the
// six levels are searched either by multistart Nelder-Mead or on a fixed lattice.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tvbg/date.hpp"
#include "tvbg/rate_splines.hpp"
#include "tvbg/seir.hpp"

namespace tvbg {

/// One country's fitting data over [t1, t4]. Series are in model units: the ingestion
/// scale factor has already been applied and is kept here for reference.
struct ObservationSet {
  std::string country;
  Date t1;
  Date t4;
  std::vector<double> idata;
  std::vector<double> rcum;
  double population_n = 0.0;
  double scale = 1.0;
  std::vector<std::string> warnings;  // ingestion notes, not part of the fingerprint

  int window_days() const { return t4 - t1; }
  /// Throws LengthError / DomainError on shape or sign problems.
  void validate() const;
};

enum class LevelSearch { simplex, lattice };

struct FitConfig {
  std::size_t top_k = 3;
  // One entry means a constant weight; otherwise one entry per day of [t1, t4].
  std::vector<double> w1{1.0};
  std::vector<double> w2{1.0};
  double beta_min = 0.01;
  double beta_max = 2.0;
  double gamma_min = 0.01;
  double gamma_max = 1.0;
  int node_step = 1;
  std::size_t multistart = 8;
  std::size_t local_iterations = 400;
  std::size_t restarts = 1;
  std::size_t max_evaluations = 0;  // 0: unlimited
  std::uint64_t seed = 20200418;
  double lambda = kDefaultLambda;
  double sigma = kDefaultSigma;
  LevelSearch level_search = LevelSearch::simplex;
  std::size_t lattice_points = 5;
  // Optional restriction of the node grid, as day offsets from t1.
  std::vector<int> t2_offsets;
  std::vector<int> t3_offsets;
  // Execution only; results do not depend on it.
  std::size_t threads = 1;

  void validate() const;
};

struct FittedModel {
  ThetaSet theta;
  double fval = 0.0;
  std::size_t rank = 0;
  double rmse_infected = 0.0;
  double rmse_removed = 0.0;
  Date peak_date;
  double peak_value = 0.0;
};

struct FitReport {
  std::vector<FittedModel> models;
  double fmax = 0.0;
  std::size_t evaluated_count = 0;
  FitConfig config;
  std::string observation_fingerprint;
};

struct ResidualSeries {
  Date origin_date;
  std::vector<double> infected;  // I(t) - Idata(t)
  std::vector<double> removed;   // R(t) - Rcum(t)
};

/// Objective for explicit per-day rate series (window_days entries are read). Rates
/// are not checked against the search bounds.
double objective_from_rates(std::span<const double> beta, std::span<const double> gamma,
                            const ObservationSet& obs, const FitConfig& config);

double objective(const ThetaSet& theta, const ObservationSet& obs, const FitConfig& config);

/// The model trajectory over [t1, t4] for theta, started from (N - Idata(t1), 0, Idata(t1), 0).
Trajectory model_trajectory(const ThetaSet& theta, const ObservationSet& obs, double sigma);

ResidualSeries residuals(const FittedModel& model, const ObservationSet& obs,
                         double sigma = kDefaultSigma);

FitReport fit(const ObservationSet& obs, const FitConfig& config);

/// SHA-256 over a canonical rendering of the observation values.
std::string observation_fingerprint(const ObservationSet& obs);

/// Per-day weights expanded to `days` entries.
std::vector<double> expand_weights(const std::vector<double>& weights, std::size_t days);

}  // namespace tvbg
