#include "tvbg/kernels.hpp"

#if defined(TVBG_HAVE_AVX2_KERNELS)
#include <immintrin.h>
#endif

namespace tvbg::kernels::detail {

#if defined(TVBG_HAVE_AVX2_KERNELS)

// Four lanes per register. The tail (lanes % 4) goes through the scalar recurrence,
// which performs the identical operation sequence.
void simulate_ir_avx2(const LaneBatch& b, std::span<double> infected, std::span<double> removed) {
  const std::size_t L = b.lanes;
  const std::size_t wide = L - L % 4;
  const __m256d sigma = _mm256_set1_pd(b.sigma);
  const __m256d n = _mm256_set1_pd(b.population_n);
  for (std::size_t l = 0; l < wide; l += 4) {
    __m256d s = _mm256_loadu_pd(&b.s0[l]);
    __m256d e = _mm256_loadu_pd(&b.e0[l]);
    __m256d i = _mm256_loadu_pd(&b.i0[l]);
    __m256d r = _mm256_loadu_pd(&b.r0[l]);
    _mm256_storeu_pd(&infected[l], i);
    _mm256_storeu_pd(&removed[l], r);
    for (std::size_t k = 0; k < b.steps; ++k) {
      const __m256d beta = _mm256_loadu_pd(&b.beta[k * L + l]);
      const __m256d gamma = _mm256_loadu_pd(&b.gamma[k * L + l]);
      const __m256d infection = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(beta, s), i), n);
      const __m256d onset = _mm256_mul_pd(sigma, e);
      const __m256d removal = _mm256_mul_pd(gamma, i);
      s = _mm256_sub_pd(s, infection);
      e = _mm256_sub_pd(_mm256_add_pd(e, infection), onset);
      i = _mm256_sub_pd(_mm256_add_pd(i, onset), removal);
      r = _mm256_add_pd(r, removal);
      _mm256_storeu_pd(&infected[(k + 1) * L + l], i);
      _mm256_storeu_pd(&removed[(k + 1) * L + l], r);
    }
  }
  if (wide == L) return;
  for (std::size_t l = wide; l < L; ++l) {
    double s = b.s0[l], e = b.e0[l], i = b.i0[l], r = b.r0[l];
    infected[l] = i;
    removed[l] = r;
    for (std::size_t k = 0; k < b.steps; ++k) {
      const double infection = b.beta[k * L + l] * s * i / b.population_n;
      const double onset = b.sigma * e;
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

void weighted_sse_avx2(std::span<const double> model, std::span<const double> data,
                       std::span<const double> weights, std::size_t lanes, std::span<double> out) {
  const std::size_t wide = lanes - lanes % 4;
  for (std::size_t l = 0; l < wide; l += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < data.size(); ++d) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(&model[d * lanes + l]), _mm256_set1_pd(data[d]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(weights[d]), diff), diff));
    }
    _mm256_storeu_pd(&out[l], acc);
  }
  for (std::size_t l = wide; l < lanes; ++l) {
    double acc = 0.0;
    for (std::size_t d = 0; d < data.size(); ++d) {
      const double diff = model[d * lanes + l] - data[d];
      acc = acc + weights[d] * diff * diff;
    }
    out[l] = acc;
  }
}

#else

void simulate_ir_avx2(const LaneBatch& b, std::span<double> infected, std::span<double> removed) {
  simulate_ir_scalar(b, infected, removed);
}

void weighted_sse_avx2(std::span<const double> model, std::span<const double> data,
                       std::span<const double> weights, std::size_t lanes, std::span<double> out) {
  weighted_sse_scalar(model, data, weights, lanes, out);
}

#endif

}  // namespace tvbg::kernels::detail
