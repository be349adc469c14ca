#include <cstdlib>
#include <string_view>

#include <fmt/format.h>

#include "tvbg/errors.hpp"
#include "tvbg/kernels.hpp"

namespace tvbg::kernels {
namespace {

Isa detect() {
  if (const char* forced = std::getenv("TVBG_SIMD"); forced && std::string_view(forced) == "scalar") {
    return Isa::scalar;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

void check_batch(const LaneBatch& b, std::span<double> infected, std::span<double> removed) {
  const std::size_t need_rates = b.steps * b.lanes;
  const std::size_t need_out = (b.steps + 1) * b.lanes;
  if (b.beta.size() < need_rates || b.gamma.size() < need_rates || b.s0.size() < b.lanes ||
      b.e0.size() < b.lanes || b.i0.size() < b.lanes || b.r0.size() < b.lanes ||
      infected.size() < need_out || removed.size() < need_out) {
    throw LengthError(fmt::format("lane batch buffers too small ({} lanes x {} steps)", b.lanes,
                                  b.steps));
  }
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(TVBG_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

void simulate_ir(const LaneBatch& batch, std::span<double> infected, std::span<double> removed,
                 Isa isa) {
  check_batch(batch, infected, removed);
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    detail::simulate_ir_avx2(batch, infected, removed);
  } else {
    detail::simulate_ir_scalar(batch, infected, removed);
  }
}

void weighted_sse(std::span<const double> model, std::span<const double> data,
                  std::span<const double> weights, std::size_t lanes, std::span<double> out,
                  Isa isa) {
  if (model.size() < data.size() * lanes || weights.size() < data.size() || out.size() < lanes) {
    throw LengthError("weighted_sse buffers too small");
  }
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    detail::weighted_sse_avx2(model, data, weights, lanes, out);
  } else {
    detail::weighted_sse_scalar(model, data, weights, lanes, out);
  }
}

}  // namespace tvbg::kernels
