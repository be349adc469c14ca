#pragma once

// Exponential interpolation splines for the transmission rate beta(t) and the
// removal rate gamma(t) over T1 < T2 <= T3 < T4.
//
// The curve is flat at the T2 level on [T1, T2]. On each later segment
// [t_k, t_k+1] of length L it blends toward the next level with
//
//   v(o) = target + (start - target) * (e^{-lambda o} - e^{-lambda L}) / (1 - e^{-lambda L})
//
// which decays at rate lambda and still hits both endpoint levels exactly.

#include <cstddef>
#include <span>
#include <vector>

#include "tvbg/date.hpp"
#include "tvbg/errors.hpp"

namespace tvbg {

inline constexpr double kDefaultLambda = 0.4;

struct ThetaSet {
  Date t2;
  Date t3;
  double beta_t2 = 0.0;
  double beta_t3 = 0.0;
  double beta_t4 = 0.0;
  double gamma_t2 = 0.0;
  double gamma_t3 = 0.0;
  double gamma_t4 = 0.0;
  double lambda = kDefaultLambda;

  friend bool operator==(const ThetaSet&, const ThetaSet&) = default;
};

struct RateSeries {
  Date origin_date;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double at(Date d) const;
};

struct RateCurves {
  RateSeries beta;
  RateSeries gamma;
};

class ValidationResult {
 public:
  bool ok() const { return violations_.empty(); }
  const std::vector<Violation>& violations() const { return violations_; }
  bool has(std::string_view code) const;
  void add(std::string code, std::string message);
  /// Throws ValidationError when not ok.
  void throw_if_invalid() const;

 private:
  std::vector<Violation> violations_;
};

/// Fraction of (start - target) still present after `offset` days of a segment of
/// length `seg_len`. 1 at offset 0, 0 at offset seg_len, exactly.
double blend_weight(double lambda, int seg_len, int offset);

double eval_segment(double start_level, double target_level, int seg_len, double lambda,
                    int offset);

ValidationResult validate_theta(const ThetaSet& theta, Date t1, Date t4);

RateCurves build_rate_curves(const ThetaSet& theta, Date t1, Date t4);

/// Elementwise beta / gamma. Throws DomainError if any gamma <= 0, LengthError on
/// misaligned series.
RateSeries reproduction_number(const RateSeries& beta, const RateSeries& gamma);

/// Blend weights for one node pair, cached so that realizing many level sets on the
/// same nodes needs no exp() calls. realize() matches build_rate_curves bit for bit.
class SplineBasis {
 public:
  /// Offsets are days from T1; window_days = T4 - T1.
  SplineBasis(int window_days, int node2_offset, int node3_offset, double lambda);

  int window_days() const { return window_days_; }
  int node2_offset() const { return k2_; }
  int node3_offset() const { return k3_; }

  /// Fills out[0..window_days] with the curve through (level_t2, level_t3, level_t4).
  void realize(double level_t2, double level_t3, double level_t4, std::span<double> out) const;

 private:
  int window_days_;
  int k2_;
  int k3_;
  std::vector<double> mid_weights_;   // offsets 0..k3-k2
  std::vector<double> late_weights_;  // offsets 0..D-k3
};

/// Endpoint-exact blend used by every segment: start at w == 1, target at w == 0, and
/// otherwise kept inside [min, max] of the two levels.
double blend(double start_level, double target_level, double weight);

}  // namespace tvbg
