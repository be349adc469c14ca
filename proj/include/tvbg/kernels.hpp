#pragma once

// Lane-parallel SEIR kernels. A "lane" is one independent candidate (its own rate
// series and initial state); all lanes share N, sigma, and the horizon. Arrays are
// day-major: element (day, lane) lives at day * lanes + lane.
//
// Every variant performs the same IEEE operations in the same order per lane, so
// results are bit-identical across variants. The active variant is picked once at
// startup from the CPU; TVBG_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>

namespace tvbg::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();

struct LaneBatch {
  std::size_t lanes = 0;
  std::size_t steps = 0;
  std::span<const double> beta;   // steps * lanes
  std::span<const double> gamma;  // steps * lanes
  std::span<const double> s0;     // lanes
  std::span<const double> e0;
  std::span<const double> i0;
  std::span<const double> r0;
  double sigma = 0.0;
  double population_n = 0.0;
};

/// Runs the Euler recurrence for every lane, writing I and R for days 0..steps
/// ((steps + 1) * lanes each).
void simulate_ir(const LaneBatch& batch, std::span<double> infected, std::span<double> removed,
                 Isa isa = active_isa());

/// out[lane] = sum_d weights[d] * (model(d, lane) - data[d])^2, accumulated in day order.
/// `model` is (data.size() * lanes); `weights` has data.size() entries.
void weighted_sse(std::span<const double> model, std::span<const double> data,
                  std::span<const double> weights, std::size_t lanes, std::span<double> out,
                  Isa isa = active_isa());

namespace detail {
void simulate_ir_scalar(const LaneBatch& batch, std::span<double> infected, std::span<double> removed);
void weighted_sse_scalar(std::span<const double> model, std::span<const double> data,
                         std::span<const double> weights, std::size_t lanes, std::span<double> out);
void simulate_ir_avx2(const LaneBatch& batch, std::span<double> infected, std::span<double> removed);
void weighted_sse_avx2(std::span<const double> model, std::span<const double> data,
                       std::span<const double> weights, std::size_t lanes, std::span<double> out);
}  // namespace detail

}  // namespace tvbg::kernels
