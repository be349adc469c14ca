#pragma once

// What-if projections past the end of the fit window T4.
//
// On [T4, T5] beta blends from beta(T4) to beta(T4) / coef1 and gamma from gamma(T4)
// to gamma(T4) * coef2. On [T5, horizon] beta blends to beta(T5) * coef11 and gamma to
// gamma(T5) / coef22, both reached at the horizon. The convention is asymmetric:
//
//   coef   period      > 1 means                 < 1 means
//   coef1  [T4, T5]    stronger (beta falls)     weaker (beta rises)
//   coef2  [T4, T5]    stronger (gamma rises)    weaker (gamma falls)
//   coef11 after T5    relaxed (beta rises)      tightened (beta falls)
//   coef22 after T5    relaxed (gamma falls)     tightened (gamma rises)

#include <string>
#include <vector>

#include "tvbg/calibration.hpp"
#include "tvbg/rate_splines.hpp"
#include "tvbg/seir.hpp"

namespace tvbg {

struct ScenarioSpec {
  int t5_offset_days = 15;
  int horizon_days = 60;
  double coef1 = 1.0;
  double coef2 = 1.0;
  double coef11 = 1.0;
  double coef22 = 1.0;

  ValidationResult validate() const;
};

/// What a projection needs from the fit besides Theta.
struct ModelContext {
  Date t1;
  Date t4;
  double population_n = 0.0;
  double initial_infected = 0.0;
  double sigma = kDefaultSigma;

  static ModelContext of(const ObservationSet& obs, double sigma = kDefaultSigma);
};

struct Peak {
  Date date;
  double value = 0.0;
};

struct Projection {
  RateSeries beta_ext;
  RateSeries gamma_ext;
  Trajectory trajectory;
  RateSeries r0_series;
  Date t5;
  Date horizon;
  Peak peak;  // of I(t) on [T4, horizon]
  double value_at_horizon = 0.0;
};

/// Rows of the coefficient convention table above, for documentation surfaces.
struct CoefficientConvention {
  std::string name;
  std::string period;
  std::string rate;
  std::string above_one;
  std::string below_one;
};
const std::vector<CoefficientConvention>& coefficient_conventions();

RateCurves extend_rates(const FittedModel& model, const ModelContext& ctx, const ScenarioSpec& spec);

Projection project(const FittedModel& model, const ModelContext& ctx, const ScenarioSpec& spec);
Projection project(const FittedModel& model, const ObservationSet& obs, const ScenarioSpec& spec,
                   double sigma = kDefaultSigma);

/// Earliest date attaining max I(t) on [from_date, end].
Peak find_peak(const Trajectory& trajectory, Date from_date);

}  // namespace tvbg
