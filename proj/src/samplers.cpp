#include "scoretr/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "scoretr/parallel.hpp"

namespace scoretr {

double langevin_step(const EntryEnergy& energy, double x, double alpha, Rng& rng) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("langevin step: alpha must be >= 0");
  double dx = energy.energy_dx(x);
  double next = x - alpha * dx + std::sqrt(2.0 * alpha) * rng.normal();
  if (!std::isfinite(next))
    throw std::runtime_error("langevin step produced a non-finite value");
  return next;
}

double anneal_chain(const EntryEnergy& energy, double x0, const LangevinConfig& cfg,
                    Rng& rng) {
  if (cfg.steps < 0) throw std::invalid_argument("anneal: steps must be >= 0");
  if (cfg.schedule.levels() == 0) throw std::invalid_argument("anneal: empty schedule");
  double x = x0;
  double smin2 = cfg.schedule.sigma_min() * cfg.schedule.sigma_min();
  for (std::size_t l = 0; l < cfg.schedule.levels(); ++l) {
    double s = cfg.schedule.sigma(l);
    double alpha = cfg.eps * (s * s) / smin2;
    for (int k = 0; k < cfg.steps; ++k) x = langevin_step(energy, x, alpha, rng);
  }
  if (cfg.final_denoise && cfg.steps > 0) {
    double alpha = cfg.eps;
    x -= alpha * energy.energy_dx(x);
    if (!std::isfinite(x))
      throw std::runtime_error("final denoising step produced a non-finite value");
  }
  return x;
}

AnnealResult anneal(std::span<const ChainRequest> chains, const LangevinConfig& cfg,
                    int workers) {
  AnnealResult result;
  result.values.assign(chains.size(), std::numeric_limits<double>::quiet_NaN());
  std::mutex failed_mutex;
  parallel_for(chains.size(), workers, [&](std::size_t i) {
    const ChainRequest& req = chains[i];
    Rng rng(derive_seed(cfg.seed, "chain", req.stream));
    try {
      result.values[i] = anneal_chain(*req.energy, req.x0, cfg, rng);
    } catch (const std::runtime_error&) {
      std::lock_guard<std::mutex> lock(failed_mutex);
      result.failed.push_back(i);
    }
  });
  std::sort(result.failed.begin(), result.failed.end());
  return result;
}

double grid_min(const EntryEnergy& energy, const GridConfig& cfg) {
  if (!(cfg.lo < cfg.hi)) throw std::invalid_argument("grid: lo must be < hi");
  if (cfg.points < 2) throw std::invalid_argument("grid: need at least 2 points");
  double best_x = cfg.lo;
  double best_e = energy.energy(cfg.lo);
  double step = (cfg.hi - cfg.lo) / static_cast<double>(cfg.points - 1);
  for (int g = 1; g < cfg.points; ++g) {
    double x = cfg.lo + static_cast<double>(g) * step;
    double e = energy.energy(x);
    if (e < best_e) {
      best_e = e;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace scoretr
