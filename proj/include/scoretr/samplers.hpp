#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scoretr/energy.hpp"
#include "scoretr/noise_schedule.hpp"
#include "scoretr/rng.hpp"

namespace scoretr {

struct LangevinConfig {
  NoiseSchedule schedule;
  double eps = 2e-5;  // base step scale
  int steps = 100;    // K inner steps per level
  std::uint64_t seed = 0;
  bool final_denoise = false;
};

struct GridConfig {
  double lo = 0.0;
  double hi = 1.0;
  int points = 256;
};

/// x - alpha * dE/dx + sqrt(2 alpha) * xi, xi ~ N(0,1).
double langevin_step(const EntryEnergy& energy, double x, double alpha, Rng& rng);

/// Annealed Langevin over the schedule in annealing order (sigma_max first);
/// step size alpha_l = eps * sigma_l^2 / sigma_min^2, K steps per level.
/// Throws on a non-finite chain value.
double anneal_chain(const EntryEnergy& energy, double x0, const LangevinConfig& cfg,
                    Rng& rng);

/// Argmin of the energy over the uniform grid; ties break toward the smaller
/// grid value.
double grid_min(const EntryEnergy& energy, const GridConfig& cfg);

/// Batch annealing with one independent chain per request; each chain's RNG
/// stream is derived from (cfg.seed, stream), so results are independent of
/// evaluation order and worker count. Failed chains are reported, their
/// values are NaN.
struct ChainRequest {
  std::uint64_t stream = 0;
  double x0 = 0.0;
  const EntryEnergy* energy = nullptr;
};

struct AnnealResult {
  std::vector<double> values;
  std::vector<std::size_t> failed;
};

AnnealResult anneal(std::span<const ChainRequest> chains, const LangevinConfig& cfg,
                    int workers = 1);

}  // namespace scoretr
