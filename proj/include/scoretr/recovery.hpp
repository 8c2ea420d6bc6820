#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scoretr/dsm.hpp"
#include "scoretr/energy.hpp"
#include "scoretr/samplers.hpp"
#include "scoretr/tensor.hpp"

namespace scoretr {

/// sgn(v) * max(|v| - tau, 0); the exact elementwise minimizer of
/// (r - s)^2 + 2*tau*|s|.
inline double soft_threshold(double v, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  double m = std::abs(v) - tau;
  return m > 0.0 ? (v < 0.0 ? -m : m) : 0.0;
}

struct SamplerConfig {
  enum class Kind : std::uint8_t { Langevin, Grid };
  Kind kind = Kind::Langevin;
  LangevinConfig langevin;
  GridConfig grid;
  int workers = 1;
};

struct Query {
  MultiIndex idx;
  std::optional<double> t;
};

struct CompletionResult {
  std::vector<double> values;        // NaN where sampling failed
  std::vector<std::size_t> failed;   // query positions
};

using EvalFactory = std::function<std::unique_ptr<EntryEnergy>(const Query&)>;

/// Per-query posterior estimate (argmin of the entry energy) via annealed
/// Langevin or grid search. `init` gives the Langevin start per query.
/// Chain streams are derived from (index, timestamp), never from position.
CompletionResult complete(const EvalFactory& factory, const Dims& dims,
                          std::span<const Query> queries, const SamplerConfig& cfg,
                          std::span<const double> init);
CompletionResult complete(const EnergyModel& model, std::span<const Query> queries,
                          const SamplerConfig& cfg, std::span<const double> init);

/// Representable split of v into (main, sparse) with main + sparse == v
/// bit-exactly in one double addition.
std::pair<double, double> exact_split(double v, double sparse_part);

/// Center of the fullest bin of a 64-bin histogram of observed values; the
/// Langevin init used for unobserved queries.
double observed_mode(const SparseTensor& data);

std::uint64_t chain_stream(const Dims& dims, std::span<const std::uint32_t> idx,
                           std::optional<double> t);

struct BcdConfig {
  int iterations = 5;
  double lambda_s = 0.1;
  TrainConfig inner_train;  // retraining schedule per outer iteration
  SamplerConfig sampler;
};

struct BcdIterStats {
  int iter = 0;
  double train_loss = 0.0;   // last-epoch loss of the retraining phase
  double mean_abs_s = 0.0;
  std::size_t split_violations = 0;  // entries where x + s != x_hat bit-exactly
  double psnr = std::numeric_limits<double>::quiet_NaN();  // vs reference, if given
};

struct BcdResult {
  DenseTensor clean;   // X*
  DenseTensor sparse;  // S*
  std::vector<BcdIterStats> iters;
  bool aborted = false;
  std::string abort_reason;
};

/// Block coordinate descent for denoising: per iteration (a) posterior-sample
/// every observed entry, (b) soft-threshold the residual into S, (c) restore
/// x = x_hat - s exactly, (d) retrain on the updated values. The model should
/// already be trained on the observations once before the loop.
BcdResult denoise_bcd(const SparseTensor& observed, EnergyModel& model,
                      const BcdConfig& cfg, const DenseTensor* reference = nullptr);

}  // namespace scoretr
