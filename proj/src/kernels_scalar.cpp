#include "tvbg/kernels.hpp"

namespace tvbg::kernels::detail {

void simulate_ir_scalar(const LaneBatch& b, std::span<double> infected, std::span<double> removed) {
  const std::size_t L = b.lanes;
  const double sigma = b.sigma;
  const double n = b.population_n;
  for (std::size_t l = 0; l < L; ++l) {
    double s = b.s0[l], e = b.e0[l], i = b.i0[l], r = b.r0[l];
    infected[l] = i;
    removed[l] = r;
    for (std::size_t k = 0; k < b.steps; ++k) {
      const double infection = b.beta[k * L + l] * s * i / n;
      const double onset = sigma * e;
      const double removal = b.gamma[k * L + l] * i;
      s = s - infection;
      e = e + infection - onset;
      i = i + onset - removal;
      r = r + removal;
      infected[(k + 1) * L + l] = i;
      removed[(k + 1) * L + l] = r;
    }
  }
}

void weighted_sse_scalar(std::span<const double> model, std::span<const double> data,
                         std::span<const double> weights, std::size_t lanes, std::span<double> out) {
  for (std::size_t l = 0; l < lanes; ++l) {
    double acc = 0.0;
    for (std::size_t d = 0; d < data.size(); ++d) {
      const double diff = model[d * lanes + l] - data[d];
      acc = acc + weights[d] * diff * diff;
    }
    out[l] = acc;
  }
}

}  // namespace tvbg::kernels::detail
