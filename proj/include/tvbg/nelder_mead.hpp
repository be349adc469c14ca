#pragma once

// Nelder-Mead simplex search restricted to the unit box [0, 1]^n. Trial points are
// projected onto the box. Each iteration evaluates reflection, expansion, and both
// contractions together as one batch, then applies the usual acceptance rules, so the
// visited path is that of the textbook method while the objective sees four lanes at
// a time.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tvbg {

using Point = std::vector<double>;

/// Evaluates every point in `points`, writing values in the same order.
using BatchObjective = std::function<void(std::span<const Point> points, std::span<double> values)>;

struct NelderMeadOptions {
  std::size_t max_iterations = 400;
  double initial_step = 0.1;
  double f_tolerance = 1e-10;  // relative spread of vertex values
  double x_tolerance = 1e-7;   // simplex diameter
};

struct NelderMeadResult {
  Point x;
  double f = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead_box(const BatchObjective& objective, Point start,
                                 const NelderMeadOptions& options);

}  // namespace tvbg
