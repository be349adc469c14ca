#include "tvbg/rate_splines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tvbg {

double RateSeries::at(Date d) const {
  const int k = d - origin_date;
  if (k < 0 || static_cast<std::size_t>(k) >= values.size()) {
    throw LengthError(fmt::format("date {} outside rate series", d.iso()));
  }
  return values[static_cast<std::size_t>(k)];
}

bool ValidationResult::has(std::string_view code) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [&](const Violation& v) { return v.code == code; });
}

void ValidationResult::add(std::string code, std::string message) {
  violations_.push_back({std::move(code), std::move(message)});
}

void ValidationResult::throw_if_invalid() const {
  if (!ok()) throw ValidationError(violations_);
}

double blend_weight(double lambda, int seg_len, int offset) {
  if (offset <= 0) return 1.0;
  if (offset >= seg_len) return 0.0;
  // (e^{-l o} - e^{-l L}) / (1 - e^{-l L}) written with expm1 to keep precision for small l.
  const double head = std::exp(-lambda * offset) * -std::expm1(-lambda * (seg_len - offset));
  return head / -std::expm1(-lambda * seg_len);
}

double blend(double start_level, double target_level, double weight) {
  if (weight == 1.0) return start_level;
  if (weight == 0.0) return target_level;
  const double v = target_level + (start_level - target_level) * weight;
  return std::clamp(v, std::min(start_level, target_level), std::max(start_level, target_level));
}

double eval_segment(double start_level, double target_level, int seg_len, double lambda,
                    int offset) {
  if (seg_len < 0 || offset < 0 || offset > seg_len) {
    throw DomainError(fmt::format("offset {} outside segment of length {}", offset, seg_len));
  }
  if (!(lambda > 0.0)) {
    throw DomainError(fmt::format("lambda must be positive, got {}", lambda));
  }
  if (seg_len == 0) {
    if (start_level != target_level) {
      throw DomainError("degenerate segment: zero length with distinct endpoint levels");
    }
    return start_level;
  }
  return blend(start_level, target_level, blend_weight(lambda, seg_len, offset));
}

ValidationResult validate_theta(const ThetaSet& th, Date t1, Date t4) {
  ValidationResult res;
  const double levels[] = {th.beta_t2, th.beta_t3, th.beta_t4,
                           th.gamma_t2, th.gamma_t3, th.gamma_t4, th.lambda};
  if (!std::all_of(std::begin(levels), std::end(levels), [](double x) { return std::isfinite(x); })) {
    res.add("non_finite", "all levels and lambda must be finite");
  }
  if (th.t2 - t1 < 1) res.add("t2_gap", "T2 must follow T1 by >= 1 day");
  if (th.t3 < th.t2) res.add("node_order", "T3 must not precede T2");
  if (t4 - th.t3 < 1) res.add("t4_gap", "T4 must follow T3 by >= 1 day");
  if (!(th.beta_t2 >= th.beta_t3 && th.beta_t3 >= th.beta_t4)) {
    res.add("beta_monotone", "beta not nonincreasing");
  }
  if (!(th.beta_t4 >= 0.0)) res.add("beta_sign", "beta levels must be >= 0");
  if (!(th.gamma_t2 <= th.gamma_t3 && th.gamma_t3 <= th.gamma_t4)) {
    res.add("gamma_monotone", "gamma not nondecreasing");
  }
  if (!(th.gamma_t2 > 0.0)) res.add("gamma_sign", "gamma levels must be > 0");
  if (!(th.lambda > 0.0)) res.add("lambda_sign", "lambda must be > 0");
  if (th.t2 == th.t3 && (th.beta_t3 != th.beta_t2 || th.gamma_t3 != th.gamma_t2)) {
    res.add("coincident_nodes", "T2 == T3 requires the T3 levels to equal the T2 levels");
  }
  return res;
}

SplineBasis::SplineBasis(int window_days, int node2_offset, int node3_offset, double lambda)
    : window_days_(window_days), k2_(node2_offset), k3_(node3_offset) {
  if (!(0 <= k2_ && k2_ <= k3_ && k3_ <= window_days_) || !(lambda > 0.0)) {
    throw DomainError(fmt::format("bad spline basis (D={}, k2={}, k3={}, lambda={})",
                                  window_days, node2_offset, node3_offset, lambda));
  }
  const int mid = k3_ - k2_;
  const int late = window_days_ - k3_;
  mid_weights_.resize(static_cast<std::size_t>(mid) + 1);
  for (int o = 0; o <= mid; ++o) mid_weights_[o] = blend_weight(lambda, mid, o);
  late_weights_.resize(static_cast<std::size_t>(late) + 1);
  for (int o = 0; o <= late; ++o) late_weights_[o] = blend_weight(lambda, late, o);
}

void SplineBasis::realize(double level_t2, double level_t3, double level_t4,
                          std::span<double> out) const {
  for (int d = 0; d <= k2_; ++d) out[d] = level_t2;
  for (int d = k2_ + 1; d <= k3_; ++d) out[d] = blend(level_t2, level_t3, mid_weights_[d - k2_]);
  for (int d = k3_ + 1; d <= window_days_; ++d) {
    out[d] = blend(level_t3, level_t4, late_weights_[d - k3_]);
  }
}

RateCurves build_rate_curves(const ThetaSet& theta, Date t1, Date t4) {
  validate_theta(theta, t1, t4).throw_if_invalid();
  const int days = t4 - t1;
  const SplineBasis basis(days, theta.t2 - t1, theta.t3 - t1, theta.lambda);
  RateCurves out{{t1, std::vector<double>(static_cast<std::size_t>(days) + 1)},
                 {t1, std::vector<double>(static_cast<std::size_t>(days) + 1)}};
  basis.realize(theta.beta_t2, theta.beta_t3, theta.beta_t4, out.beta.values);
  basis.realize(theta.gamma_t2, theta.gamma_t3, theta.gamma_t4, out.gamma.values);
  return out;
}

RateSeries reproduction_number(const RateSeries& beta, const RateSeries& gamma) {
  if (beta.size() != gamma.size() || beta.origin_date != gamma.origin_date) {
    throw LengthError("beta and gamma series are not aligned");
  }
  RateSeries out{beta.origin_date, std::vector<double>(beta.size())};
  for (std::size_t k = 0; k < beta.size(); ++k) {
    if (!(gamma.values[k] > 0.0)) {
      throw DomainError(fmt::format("gamma must be positive, got {} on day {}", gamma.values[k], k));
    }
    out.values[k] = beta.values[k] / gamma.values[k];
  }
  return out;
}

}  // namespace tvbg
