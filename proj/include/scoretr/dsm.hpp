#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scoretr/energy.hpp"
#include "scoretr/nn.hpp"
#include "scoretr/noise_schedule.hpp"
#include "scoretr/rng.hpp"
#include "scoretr/tensor.hpp"

namespace scoretr {

enum class LevelMode : std::uint8_t { AllLevels, OnePerSample };

struct TrainConfig {
  int epochs = 100;
  int batch = 256;
  NoiseSchedule schedule;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  LevelMode level_mode = LevelMode::AllLevels;
  double lambda_smooth = 0.0;
  double sigma_s = 0.0;  // 0 -> 1/max(I_d) when the smooth term is active
  AdamConfig adam;
  double divergence_limit = 1e6;
};

/// One denoising residual term for the current entry of `model`:
/// (1/2) * ((xt - x)/sigma^2 - dE/dx(xt))^2 with xt = x + sigma*xi.
/// The model score is -dE/dx, so this is the per-sample integrand of the
/// per-level objective.
Var dsm_term(Tape& tape, EnergyBuilder& model, double x, double sigma, double xi);

/// Per-level objective: mean of dsm_term over the batch, perturbations drawn
/// from rng in batch order. Caller must have run begin_batch.
Var dsm_loss_level(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                   std::span<const std::size_t> batch, double sigma, Rng& rng);

/// Unified multi-level loss: (1/L) * sum_l sigma_l^2 * level loss in
/// AllLevels mode; in OnePerSample mode an unbiased single-level estimate per
/// sample with weight sigma_l^2.
Var dsm_loss_total(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                   std::span<const std::size_t> batch, const NoiseSchedule& schedule,
                   Rng& rng, LevelMode mode = LevelMode::AllLevels);

/// Smooth regularizer: mean energy at (x_t, factors of coordinates perturbed
/// by N(0, sigma_s^2 I)). Values default to the data values; `posterior`
/// (aligned with data entry ids) overrides them when non-empty.
Var smooth_loss(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                std::span<const std::size_t> batch, double sigma_s, Rng& rng,
                std::span<const double> posterior = {});

struct TrainResult {
  std::vector<double> epoch_loss;
};

/// Minimizes the unified DSM loss (plus the smooth term when configured) with
/// Adam over model parameters and the factor rows touched by each batch.
/// Deterministic given the seed. Throws on divergence after restoring the last
/// end-of-epoch parameters.
TrainResult train(EnergyModel& model, const SparseTensor& data, const TrainConfig& cfg,
                  std::span<const double> posterior = {});

}  // namespace scoretr
