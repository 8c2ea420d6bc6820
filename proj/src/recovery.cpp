#include "scoretr/recovery.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <mutex>

#include "scoretr/metrics.hpp"
#include "scoretr/parallel.hpp"

namespace scoretr {

double observed_mode(const SparseTensor& data) {
  if (data.size() == 0) throw std::invalid_argument("observed_mode: no observations");
  auto values = data.values();
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) return lo;
  constexpr int kBins = 64;
  std::vector<std::size_t> counts(kBins, 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * kBins);
    b = std::clamp(b, 0, kBins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < counts.size(); ++b)
    if (counts[b] > counts[best]) best = b;
  return lo + (static_cast<double>(best) + 0.5) * (hi - lo) / kBins;
}

std::uint64_t chain_stream(const Dims& dims, std::span<const std::uint32_t> idx,
                           std::optional<double> t) {
  std::uint64_t h = linear_index(dims, idx);
  if (t) h = hash_u64(h, std::bit_cast<std::uint64_t>(*t));
  return h;
}

CompletionResult complete(const EvalFactory& factory, const Dims& dims,
                          std::span<const Query> queries, const SamplerConfig& cfg,
                          std::span<const double> init) {
  if (cfg.kind == SamplerConfig::Kind::Langevin && init.size() != queries.size())
    throw std::invalid_argument("complete: init values misaligned with queries");
  CompletionResult result;
  result.values.assign(queries.size(), std::numeric_limits<double>::quiet_NaN());
  std::mutex failed_mutex;
  parallel_for(queries.size(), cfg.workers, [&](std::size_t q) {
    try {
      auto energy = factory(queries[q]);
      if (cfg.kind == SamplerConfig::Kind::Grid) {
        result.values[q] = grid_min(*energy, cfg.grid);
      } else {
        Rng rng(derive_seed(cfg.langevin.seed, "chain",
                            chain_stream(dims, queries[q].idx, queries[q].t)));
        result.values[q] = anneal_chain(*energy, init[q], cfg.langevin, rng);
      }
    } catch (const std::exception&) {
      std::lock_guard<std::mutex> lock(failed_mutex);
      result.failed.push_back(q);
    }
  });
  std::sort(result.failed.begin(), result.failed.end());
  return result;
}

CompletionResult complete(const EnergyModel& model, std::span<const Query> queries,
                          const SamplerConfig& cfg, std::span<const double> init) {
  EvalFactory factory = [&model](const Query& q) {
    return model.entry_evaluator(q.idx, q.t);
  };
  return complete(factory, model.config().dims, queries, cfg, init);
}

std::pair<double, double> exact_split(double v, double sparse_part) {
  double s = sparse_part;
  for (int attempt = 0; attempt < 4; ++attempt) {
    double x = v - s;
    if (x + s == v) return {x, s};
    s = v - x;
  }
  return {v, 0.0};
}

BcdResult denoise_bcd(const SparseTensor& observed, EnergyModel& model,
                      const BcdConfig& cfg, const DenseTensor* reference) {
  if (cfg.iterations < 1) throw std::invalid_argument("bcd: iterations must be >= 1");
  if (cfg.lambda_s < 0.0) throw std::invalid_argument("bcd: lambda_s must be >= 0");
  std::size_t n = observed.size();
  if (n == 0) throw std::invalid_argument("bcd: no observations");

  // current split: x + s = x_hat, starting from X = x_hat, S = 0
  SparseTensor current = observed;
  std::vector<double> s_values(n, 0.0);
  double tau = cfg.lambda_s / 2.0;

  std::vector<Query> queries(n);
  for (std::size_t e = 0; e < n; ++e)
    queries[e] = Query{observed.index_vec(e), observed.time_opt(e)};

  BcdResult result;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    BcdIterStats stats;
    stats.iter = iter;
    try {
      // (a) posterior samples at every observed index
      std::vector<double> init(current.values().begin(), current.values().end());
      CompletionResult post = complete(model, queries, cfg.sampler, init);
      if (!post.failed.empty())
        throw std::runtime_error("posterior sampling failed for " +
                                 std::to_string(post.failed.size()) + " entries");
      // (b) sparse component, (c) exact split x + s = x_hat
      double abs_s = 0.0;
      for (std::size_t e = 0; e < n; ++e) {
        double s = soft_threshold(observed.value(e) - post.values[e], tau);
        auto [x, s_exact] = exact_split(observed.value(e), s);
        s_values[e] = s_exact;
        current.set_value(e, x);
        abs_s += std::abs(s_exact);
        if (x + s_exact != observed.value(e)) ++stats.split_violations;
      }
      stats.mean_abs_s = abs_s / static_cast<double>(n);
      // (d) retrain on the updated values
      TrainConfig inner = cfg.inner_train;
      inner.seed = derive_seed(cfg.inner_train.seed, "bcd", static_cast<std::uint64_t>(iter));
      TrainResult tr = train(model, current, inner);
      stats.train_loss = tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back();
    } catch (const std::exception& e) {
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }
    if (reference) {
      DenseTensor x = fold(current);
      stats.psnr = psnr(x.values(), reference->values(), 1.0);
    }
    result.iters.push_back(stats);
  }

  result.clean = fold(current);
  SparseTensor s_tensor = observed;
  for (std::size_t e = 0; e < n; ++e) s_tensor.set_value(e, s_values[e]);
  result.sparse = fold(s_tensor);
  return result;
}

}  // namespace scoretr
