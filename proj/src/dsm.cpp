#include "scoretr/dsm.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scoretr {

Var dsm_term(Tape& tape, EnergyBuilder& model, double x, double sigma, double xi) {
  if (!(sigma > 0.0)) throw std::invalid_argument("dsm: sigma must be positive");
  double xt = x + sigma * xi;
  DVar xd = seeded_input(tape, xt);
  DVar e = model.energy(tape, xd);
  Var r;
  Var target = tape.constant((xt - x) / (sigma * sigma));
  if (e.has_tangent())
    r = target - e.t;
  else
    r = target;
  return 0.5 * (r * r);
}

Var dsm_loss_level(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                   std::span<const std::size_t> batch, double sigma, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("dsm: empty batch");
  std::vector<Var> terms;
  terms.reserve(batch.size());
  for (std::size_t e : batch) {
    model.begin_entry(tape, data.index(e), data.time_opt(e));
    terms.push_back(dsm_term(tape, model, data.value(e), sigma, rng.normal()));
  }
  return sum(terms) / static_cast<double>(batch.size());
}

Var dsm_loss_total(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                   std::span<const std::size_t> batch, const NoiseSchedule& schedule,
                   Rng& rng, LevelMode mode) {
  if (batch.empty()) throw std::invalid_argument("dsm: empty batch");
  std::size_t levels = schedule.levels();
  if (mode == LevelMode::AllLevels) {
    Var total;
    for (std::size_t l = 0; l < levels; ++l) {
      double s = schedule.sigma(l);
      Var level = (s * s) * dsm_loss_level(tape, model, data, batch, s, rng);
      total = total.valid() ? total + level : level;
    }
    return total / static_cast<double>(levels);
  }
  std::vector<Var> terms;
  terms.reserve(batch.size());
  for (std::size_t e : batch) {
    std::size_t l = static_cast<std::size_t>(rng.below(levels));
    double s = schedule.sigma(l);
    model.begin_entry(tape, data.index(e), data.time_opt(e));
    terms.push_back((s * s) * dsm_term(tape, model, data.value(e), s, rng.normal()));
  }
  return sum(terms) / static_cast<double>(batch.size());
}

Var smooth_loss(Tape& tape, EnergyBuilder& model, const SparseTensor& data,
                std::span<const std::size_t> batch, double sigma_s, Rng& rng,
                std::span<const double> posterior) {
  if (batch.empty()) throw std::invalid_argument("smooth loss: empty batch");
  if (!(sigma_s > 0.0)) throw std::invalid_argument("smooth loss: sigma_s must be positive");
  if (!posterior.empty() && posterior.size() != data.size())
    throw std::invalid_argument("smooth loss: posterior values misaligned with data");
  std::vector<Var> terms;
  terms.reserve(batch.size());
  std::vector<double> eps(data.order());
  for (std::size_t e : batch) {
    model.begin_entry(tape, data.index(e), data.time_opt(e));
    for (double& v : eps) v = sigma_s * rng.normal();
    double x = posterior.empty() ? data.value(e) : posterior[e];
    DVar en = model.perturbed_energy(tape, dual_constant(tape, x), eps);
    terms.push_back(en.v);
  }
  return sum(terms) / static_cast<double>(batch.size());
}

namespace {

struct ParamBackup {
  std::vector<Eigen::MatrixXd> tensors;
};

ParamBackup backup_params(std::span<const NamedTensor> params) {
  ParamBackup b;
  b.tensors.reserve(params.size());
  for (const auto& p : params) b.tensors.push_back(*p.tensor);
  return b;
}

void restore_params(std::span<const NamedTensor> params, const ParamBackup& b) {
  for (std::size_t k = 0; k < params.size(); ++k) *params[k].tensor = b.tensors[k];
}

}  // namespace

TrainResult train(EnergyModel& model, const SparseTensor& data, const TrainConfig& cfg,
                  std::span<const double> posterior) {
  if (data.size() == 0) throw std::invalid_argument("train: data is empty");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be at least 1");
  if (cfg.schedule.levels() == 0) throw std::invalid_argument("train: empty noise schedule");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (cfg.lambda_smooth < 0.0) throw std::invalid_argument("train: lambda_smooth must be >= 0");
  if (!posterior.empty() && posterior.size() != data.size())
    throw std::invalid_argument("train: posterior values misaligned with data");

  bool smooth = cfg.lambda_smooth > 0.0;
  if (smooth && model.config().variant != Variant::Implicit)
    throw std::invalid_argument("train: smooth term requires the implicit variant");
  double sigma_s = cfg.sigma_s;
  if (smooth && sigma_s <= 0.0) {
    std::size_t dmax = 1;
    for (std::size_t d : data.dims()) dmax = std::max(dmax, d);
    sigma_s = 1.0 / static_cast<double>(dmax);
  }

  TrainResult result;
  if (cfg.epochs == 0) return result;

  auto params = model.named_params();
  AdamConfig adam_cfg = cfg.adam;
  adam_cfg.lr = cfg.lr;
  AdamState adam;
  {
    std::vector<Eigen::MatrixXd*> ptrs;
    for (auto& p : params) ptrs.push_back(p.tensor);
    adam = AdamState(ptrs);
  }

  std::size_t n = data.size();
  std::size_t levels = cfg.schedule.levels();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Tape tape;
  std::vector<Var> terms;
  std::vector<double> eps(data.order());
  ParamBackup last_epoch = backup_params(params);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += static_cast<std::size_t>(cfg.batch)) {
      std::size_t b1 = std::min(n, b0 + static_cast<std::size_t>(cfg.batch));
      double inv_b = 1.0 / static_cast<double>(b1 - b0);

      tape.clear();
      model.begin_batch(tape);
      std::size_t mark = tape.mark();
      model.zero_grads();

      double batch_loss = 0.0;
      for (std::size_t bi = b0; bi < b1; ++bi) {
        std::size_t e = order[bi];
        tape.rewind(mark);
        model.begin_entry(tape, data.index(e), data.time_opt(e));
        Rng rng(derive_seed(cfg.seed, "noise", static_cast<std::uint64_t>(epoch), e));

        double x = posterior.empty() ? data.value(e) : posterior[e];
        Var entry_loss;
        if (cfg.level_mode == LevelMode::AllLevels) {
          terms.clear();
          for (std::size_t l = 0; l < levels; ++l) {
            double s = cfg.schedule.sigma(l);
            terms.push_back((s * s) * dsm_term(tape, model, x, s, rng.normal()));
          }
          entry_loss = sum(terms) / static_cast<double>(levels);
        } else {
          std::size_t l = static_cast<std::size_t>(rng.below(levels));
          double s = cfg.schedule.sigma(l);
          entry_loss = (s * s) * dsm_term(tape, model, x, s, rng.normal());
        }
        if (smooth) {
          for (double& v : eps) v = sigma_s * rng.normal();
          DVar en = model.perturbed_energy(tape, dual_constant(tape, x), eps);
          entry_loss = entry_loss + cfg.lambda_smooth * en.v;
        }
        tape.reverse(entry_loss);
        model.accumulate_gradients(tape, inv_b);
        batch_loss += inv_b * tape.value(entry_loss);
      }

      if (!std::isfinite(batch_loss) || std::abs(batch_loss) > cfg.divergence_limit) {
        restore_params(params, last_epoch);
        std::ostringstream msg;
        msg << "train: loss diverged at epoch " << epoch << " (loss " << batch_loss
            << "); parameters restored to the last completed epoch";
        throw std::runtime_error(msg.str());
      }

      std::vector<Eigen::MatrixXd*> ptrs;
      std::vector<const Eigen::MatrixXd*> gptrs;
      for (std::size_t k = 0; k < params.size(); ++k) {
        ptrs.push_back(params[k].tensor);
        gptrs.push_back(&model.grads()[k]);
      }
      adam_step(adam, ptrs, gptrs, adam_cfg);

      epoch_loss += batch_loss * static_cast<double>(b1 - b0);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    last_epoch = backup_params(params);
  }
  return result;
}

}  // namespace scoretr
