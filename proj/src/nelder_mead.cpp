#include "tvbg/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tvbg/errors.hpp"

namespace tvbg {
namespace {

void project(Point& x) {
  for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
}

Point affine(const Point& base, const Point& toward, double t) {
  Point out(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) out[j] = base[j] + t * (toward[j] - base[j]);
  project(out);
  return out;
}

}  // namespace

NelderMeadResult nelder_mead_box(const BatchObjective& objective, Point start,
                                 const NelderMeadOptions& opt) {
  const std::size_t n = start.size();
  if (n == 0) throw DomainError("Nelder-Mead needs at least one dimension");
  project(start);

  std::vector<Point> simplex{start};
  for (std::size_t j = 0; j < n; ++j) {
    Point v = start;
    v[j] += (v[j] + opt.initial_step <= 1.0) ? opt.initial_step : -opt.initial_step;
    simplex.push_back(std::move(v));
  }
  std::vector<double> f(n + 1);
  objective(simplex, f);
  NelderMeadResult res;
  res.evaluations = n + 1;

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<Point> s2;
    std::vector<double> f2;
    for (auto k : order) {
      s2.push_back(std::move(simplex[k]));
      f2.push_back(f[k]);
    }
    simplex = std::move(s2);
    f = std::move(f2);
  };

  std::vector<Point> trials(4);
  std::vector<double> ft(4);
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(simplex[k][j] - simplex[0][j]));
      }
    }
    const double spread = f[n] - f[0];
    if (spread <= opt.f_tolerance * (std::abs(f[0]) + 1e-300) || diameter <= opt.x_tolerance) {
      res.converged = true;
      break;
    }

    Point centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[k][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    const Point& worst = simplex[n];
    trials[0] = affine(centroid, worst, -1.0);  // reflection
    trials[1] = affine(centroid, worst, -2.0);  // expansion
    trials[2] = affine(centroid, worst, -0.5);  // outside contraction
    trials[3] = affine(centroid, worst, 0.5);   // inside contraction
    objective(trials, ft);
    res.evaluations += 4;

    const double fr = ft[0];
    if (fr < f[0]) {
      const std::size_t pick = ft[1] < fr ? 1 : 0;
      simplex[n] = trials[pick];
      f[n] = ft[pick];
      continue;
    }
    if (fr < f[n - 1]) {
      simplex[n] = trials[0];
      f[n] = fr;
      continue;
    }
    const std::size_t c = fr < f[n] ? 2 : 3;
    if (ft[c] < std::min(fr, f[n])) {
      simplex[n] = trials[c];
      f[n] = ft[c];
      continue;
    }
    // Shrink toward the best vertex.
    std::vector<Point> shrunk;
    for (std::size_t k = 1; k <= n; ++k) shrunk.push_back(affine(simplex[0], simplex[k], 0.5));
    std::vector<double> fs(n);
    objective(shrunk, fs);
    res.evaluations += n;
    for (std::size_t k = 1; k <= n; ++k) {
      simplex[k] = std::move(shrunk[k - 1]);
      f[k] = fs[k - 1];
    }
  }
  sort_simplex();
  res.x = simplex[0];
  res.f = f[0];
  return res;
}

}  // namespace tvbg
