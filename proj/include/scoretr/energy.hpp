#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scoretr/checkpoint.hpp"
#include "scoretr/nn.hpp"
#include "scoretr/tape.hpp"
#include "scoretr/tensor.hpp"

namespace scoretr {

enum class Variant : std::uint8_t { Tabular, Temporal, Implicit };
enum class Fusion : std::uint8_t { Concat, Sum };

struct EnergyConfig {
  Variant variant = Variant::Tabular;
  Dims dims;
  int rank = 5;
  std::vector<int> hidden = {64, 64};  // hidden widths of the value/factor encoders
  int embed = 0;                       // encoder output width; 0 -> hidden.back()
  Fusion fusion = Fusion::Concat;

  // temporal variant
  int time_features = 16;
  double time_scale = 10.0;
  int time_embed = 0;  // 0 -> 2*time_features

  // implicit variant
  int coord_features = 0;  // 0 -> max(rank/2, 1)
  double coord_scale = 10.0;
  bool coord_trainable = false;

  std::uint64_t seed = 0;

  int embed_dim() const { return embed > 0 ? embed : hidden.back(); }
  int time_embed_dim() const { return time_embed > 0 ? time_embed : 2 * time_features; }
  int coord_feature_dim() const { return coord_features > 0 ? coord_features : std::max(rank / 2, 1); }
  int factor_dim() const { return static_cast<int>(dims.size()) * rank; }
};

/// Surface the score-matching losses build against. Test stubs subclass this;
/// the real model is EnergyModel below.
class EnergyBuilder {
 public:
  virtual ~EnergyBuilder() = default;

  /// Snapshot parameters onto the tape; call once per batch, before mark().
  virtual void begin_batch(Tape& tape) = 0;
  /// Build the per-entry factor context (factor nodes, their encoder forward,
  /// time embedding); call after rewinding to the batch mark. The x-dependent
  /// path is rebuilt per energy() call, so one context serves all noise
  /// levels of the entry.
  virtual void begin_entry(Tape& tape, std::span<const std::uint32_t> idx,
                           std::optional<double> t) = 0;
  /// Joint energy of (x, factors of the current entry); x may carry a tangent.
  virtual DVar energy(Tape& tape, DVar x) = 0;
  /// Energy of the current entry at coordinate-space-perturbed factors
  /// (smooth regularizer).
  virtual DVar perturbed_energy(Tape&, DVar, std::span<const double>) {
    throw std::invalid_argument("smooth regularizer requires the implicit variant");
  }
};

/// Numeric per-entry view of a trained model: the factor embedding is fixed,
/// energy and its input derivative are evaluated without a tape. Instances
/// hold scratch state and are not thread safe; use one per worker.
class EntryEnergy {
 public:
  virtual ~EntryEnergy() = default;
  virtual double energy(double x) const = 0;
  virtual double energy_dx(double x) const = 0;
  virtual std::pair<double, double> energy_and_dx(double x) const {
    return {energy(x), energy_dx(x)};
  }
};

/// E(x, z[, t]) = head(fuse(g3(x), g4(z)[, time(t)])) with the factor source
/// chosen by the variant: gathered learnable rows (tabular/temporal) or a
/// Fourier-feature coordinate encoder (implicit).
class EnergyModel : public EnergyBuilder {
 public:
  EnergyModel() = default;
  explicit EnergyModel(EnergyConfig cfg);

  const EnergyConfig& config() const { return cfg_; }
  FactorSet& factors();
  const FactorSet& factors() const;

  std::vector<NamedTensor> named_params();

  // EnergyBuilder
  void begin_batch(Tape& tape) override;
  void begin_entry(Tape& tape, std::span<const std::uint32_t> idx,
                   std::optional<double> t) override;
  DVar energy(Tape& tape, DVar x) override;
  DVar perturbed_energy(Tape& tape, DVar x, std::span<const double> coord_noise) override;

  /// Factor nodes for one entry: gathered leaf rows or the recorded implicit
  /// encoding. Requires begin_batch.
  std::vector<DVar> factor_nodes(Tape& tape, std::span<const std::uint32_t> idx);
  /// Energy from explicit factor nodes.
  DVar energy_z(Tape& tape, std::span<const DVar> z, DVar x, std::optional<double> t);

  // gradient plumbing for training
  void zero_grads();
  /// Accumulate scale * adjoints of every parameter leaf (call per entry,
  /// after Tape::reverse and before rewinding past the entry's factor leaves).
  void accumulate_gradients(const Tape& tape, double scale);
  std::vector<Eigen::MatrixXd>& grads() { return grads_; }

  std::unique_ptr<EntryEnergy> entry_evaluator(std::span<const std::uint32_t> idx,
                                               std::optional<double> t) const;

  /// Numeric factor embedding (gathered rows or implicit encoding).
  Eigen::VectorXd factor_vector(std::span<const std::uint32_t> idx) const;

  void save(const std::filesystem::path& prefix) const;
  void load(const std::filesystem::path& prefix);

 private:
  void check_index(std::span<const std::uint32_t> idx) const;
  Eigen::VectorXd normalized_coords(std::span<const std::uint32_t> idx) const;
  std::vector<DVar> implicit_factor_nodes(Tape& tape, std::span<const double> coords);
  Eigen::VectorXd time_embedding(double t) const;
  std::vector<DVar> time_nodes(Tape& tape, double t);
  DVar fuse_and_head(Tape& tape, std::span<const DVar> u3, std::span<const DVar> u4,
                     std::span<const DVar> tn);

  EnergyConfig cfg_;
  MlpParams g3_, g4_;
  Eigen::MatrixXd head_w_;  // 1 x fused_dim
  Eigen::MatrixXd head_b_;  // 1 x 1
  FactorSet factors_;
  FourierEncoder time_enc_;
  MlpParams time_proj_;  // affine 2m -> time_embed
  FourierEncoder coord_enc_;
  MlpParams coord_proj_;  // affine 2m -> D*R

  // batch snapshot
  struct Snap {
    Tape* tape = nullptr;
    MlpVars g3, g4, time_proj, coord_proj;
    std::vector<Var> head_w;
    Var head_b;
    std::vector<Var> coord_b;
  } snap_;
  std::vector<std::vector<Var>> snap_leaves_;  // aligned with named_params()

  struct FactorLeaf {
    Var var;
    std::uint32_t mode, row, col;
  };
  std::vector<FactorLeaf> entry_leaves_;

  // current-entry context
  MultiIndex cur_idx_;
  std::optional<double> cur_t_;
  std::vector<DVar> cur_u4_;
  std::vector<DVar> cur_tn_;
  bool entry_ready_ = false;

  std::vector<Eigen::MatrixXd> grads_;

  friend class ModelEntryEnergy;
};

}  // namespace scoretr
