#pragma once

// Discrete-time SEIR model: forward Euler with a one-day step.
//
//   S' = S - b S I / N
//   E' = E + b S I / N - sigma E
//   I' = I + sigma E - g I
//   R' = R + g I
//
// All four updates read the day-n state. The flow terms cancel in the sum, so
// S + E + I + R stays at N up to round-off.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tvbg/date.hpp"
#include "tvbg/errors.hpp"

namespace tvbg {

inline constexpr double kDefaultSigma = 1.0 / 5.2;

struct CompartmentState {
  double s = 0.0;
  double e = 0.0;
  double i = 0.0;
  double r = 0.0;

  double total() const { return s + e + i + r; }
  friend bool operator==(const CompartmentState&, const CompartmentState&) = default;
};

struct EpidemicConstants {
  double sigma = kDefaultSigma;
  double population_n = 0.0;

  /// Throws DomainError unless sigma > 0 and population_n > 0.
  void validate() const;
};

struct SimulationWarning {
  std::size_t day;  // index of the offending state
  std::string message;
};

struct Trajectory {
  Date origin_date;
  std::vector<CompartmentState> states;
  std::vector<SimulationWarning> warnings;

  std::size_t size() const { return states.size(); }
  Date date_at(std::size_t index) const { return origin_date + static_cast<int>(index); }
  std::vector<double> infected() const;
  std::vector<double> removed() const;
};

/// (N - i0 - r0, 0, i0, r0). E(0) is zero: it is what the susceptible formula and
/// conservation leave over.
CompartmentState initial_state(const EpidemicConstants& constants, double i0, double r0);

CompartmentState step(const CompartmentState& state, double beta_n, double gamma_n,
                      const EpidemicConstants& constants);

/// states[0] = init, states[k+1] = step(states[k], beta[k], gamma[k]). Only the first
/// n_days entries of each rate series are read.
Trajectory simulate(const CompartmentState& init, std::span<const double> beta,
                    std::span<const double> gamma, const EpidemicConstants& constants,
                    std::size_t n_days, Date origin_date = {});

}  // namespace tvbg
