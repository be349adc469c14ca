#include "tvbg/scenarios.hpp"

#include <cmath>

#include <fmt/format.h>

namespace tvbg {

ValidationResult ScenarioSpec::validate() const {
  ValidationResult res;
  if (t5_offset_days <= 0) res.add("t5_offset", "T5 must be at least one day after T4");
  if (horizon_days <= t5_offset_days) res.add("horizon", "horizon must lie after T5");
  const std::pair<const char*, double> coefs[] = {
      {"coef1", coef1}, {"coef2", coef2}, {"coef11", coef11}, {"coef22", coef22}};
  for (const auto& [name, value] : coefs) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      res.add(name, fmt::format("{} must be a positive number, got {}", name, value));
    }
  }
  return res;
}

ModelContext ModelContext::of(const ObservationSet& obs, double sigma) {
  obs.validate();
  return {obs.t1, obs.t4, obs.population_n, obs.idata.front(), sigma};
}

const std::vector<CoefficientConvention>& coefficient_conventions() {
  static const std::vector<CoefficientConvention> table = {
      {"coef1", "[T4, T5]", "beta target = beta(T4) / coef1", "measures strengthened, beta falls",
       "measures weakened, beta rises"},
      {"coef2", "[T4, T5]", "gamma target = gamma(T4) * coef2", "measures strengthened, gamma rises",
       "measures weakened, gamma falls"},
      {"coef11", "[T5, horizon]", "beta target = beta(T5) * coef11", "measures relaxed, beta rises",
       "measures tightened, beta falls"},
      {"coef22", "[T5, horizon]", "gamma target = gamma(T5) / coef22",
       "measures relaxed, gamma falls", "measures tightened, gamma rises"},
  };
  return table;
}

RateCurves extend_rates(const FittedModel& model, const ModelContext& ctx, const ScenarioSpec& spec) {
  spec.validate().throw_if_invalid();
  auto curves = build_rate_curves(model.theta, ctx.t1, ctx.t4);
  const double lambda = model.theta.lambda;
  const int t5_len = spec.t5_offset_days;
  const int late_len = spec.horizon_days - spec.t5_offset_days;

  auto extend = [&](std::vector<double>& v, double t5_target, auto horizon_target_of) {
    const double at_t4 = v.back();
    for (int o = 1; o <= t5_len; ++o) v.push_back(eval_segment(at_t4, t5_target, t5_len, lambda, o));
    const double at_t5 = v.back();
    const double at_horizon = horizon_target_of(at_t5);
    for (int o = 1; o <= late_len; ++o) {
      v.push_back(eval_segment(at_t5, at_horizon, late_len, lambda, o));
    }
  };
  const double beta_t4 = curves.beta.values.back();
  const double gamma_t4 = curves.gamma.values.back();
  extend(curves.beta.values, beta_t4 / spec.coef1, [&](double b5) { return b5 * spec.coef11; });
  extend(curves.gamma.values, gamma_t4 * spec.coef2, [&](double g5) { return g5 / spec.coef22; });
  return curves;
}

Projection project(const FittedModel& model, const ModelContext& ctx, const ScenarioSpec& spec) {
  auto rates = extend_rates(model, ctx, spec);
  const EpidemicConstants constants{ctx.sigma, ctx.population_n};
  const auto total_days = static_cast<std::size_t>(ctx.t4 - ctx.t1 + spec.horizon_days);
  Projection p;
  p.trajectory = simulate(initial_state(constants, ctx.initial_infected, 0.0), rates.beta.values,
                          rates.gamma.values, constants, total_days, ctx.t1);
  p.r0_series = reproduction_number(rates.beta, rates.gamma);
  p.beta_ext = std::move(rates.beta);
  p.gamma_ext = std::move(rates.gamma);
  p.t5 = ctx.t4 + spec.t5_offset_days;
  p.horizon = ctx.t4 + spec.horizon_days;
  p.peak = find_peak(p.trajectory, ctx.t4);
  p.value_at_horizon = p.trajectory.states.back().i;
  return p;
}

Projection project(const FittedModel& model, const ObservationSet& obs, const ScenarioSpec& spec,
                   double sigma) {
  return project(model, ModelContext::of(obs, sigma), spec);
}

Peak find_peak(const Trajectory& trajectory, Date from_date) {
  const int start = from_date - trajectory.origin_date;
  if (start < 0 || static_cast<std::size_t>(start) >= trajectory.size()) {
    throw LengthError(fmt::format("peak search start {} outside trajectory", from_date.iso()));
  }
  auto best = static_cast<std::size_t>(start);
  for (std::size_t k = best + 1; k < trajectory.size(); ++k) {
    if (trajectory.states[k].i > trajectory.states[best].i) best = k;
  }
  return {trajectory.date_at(best), trajectory.states[best].i};
}

}  // namespace tvbg
