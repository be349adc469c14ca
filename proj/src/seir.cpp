#include "tvbg/seir.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tvbg/errors.hpp"

namespace tvbg {

void EpidemicConstants::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError(fmt::format("sigma must be positive, got {}", sigma));
  }
  if (!(population_n > 0.0) || !std::isfinite(population_n)) {
    throw DomainError(fmt::format("population must be positive, got {}", population_n));
  }
}

std::vector<double> Trajectory::infected() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(st.i);
  return out;
}

std::vector<double> Trajectory::removed() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(st.r);
  return out;
}

CompartmentState initial_state(const EpidemicConstants& constants, double i0, double r0) {
  constants.validate();
  if (!(i0 >= 0.0) || !(r0 >= 0.0)) {
    throw DomainError(fmt::format("initial counts must be nonnegative (i0={}, r0={})", i0, r0));
  }
  if (i0 + r0 > constants.population_n) {
    throw DomainError(fmt::format("i0 + r0 = {} exceeds population {}", i0 + r0,
                                  constants.population_n));
  }
  return {constants.population_n - i0 - r0, 0.0, i0, r0};
}

CompartmentState step(const CompartmentState& state, double beta_n, double gamma_n,
                      const EpidemicConstants& constants) {
  if (!(beta_n >= 0.0) || !(gamma_n >= 0.0)) {
    throw DomainError(fmt::format("rates must be nonnegative (beta={}, gamma={})", beta_n, gamma_n));
  }
  const double infection = beta_n * state.s * state.i / constants.population_n;
  const double onset = constants.sigma * state.e;
  const double removal = gamma_n * state.i;
  return {state.s - infection, state.e + infection - onset, state.i + onset - removal,
          state.r + removal};
}

Trajectory simulate(const CompartmentState& init, std::span<const double> beta,
                    std::span<const double> gamma, const EpidemicConstants& constants,
                    std::size_t n_days, Date origin_date) {
  constants.validate();
  if (beta.size() < n_days || gamma.size() < n_days) {
    throw LengthError(fmt::format("rate series cover {}/{} days, need {}", beta.size(),
                                  gamma.size(), n_days));
  }
  Trajectory out{origin_date, {}, {}};
  out.states.reserve(n_days + 1);
  out.states.push_back(init);
  const double floor = -1e-9 * constants.population_n;
  bool warned = false;
  for (std::size_t k = 0; k < n_days; ++k) {
    const auto next = step(out.states.back(), beta[k], gamma[k], constants);
    if (!warned && (next.s < floor || next.e < floor || next.i < floor || next.r < floor)) {
      out.warnings.push_back({k + 1, fmt::format("negative compartment on day {} "
                                                 "(s={}, e={}, i={}, r={})",
                                                 k + 1, next.s, next.e, next.i, next.r)});
      warned = true;
    }
    out.states.push_back(next);
  }
  return out;
}

}  // namespace tvbg
