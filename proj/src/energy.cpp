#include "scoretr/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "scoretr/rng.hpp"

namespace scoretr {

namespace {

std::vector<int> mlp_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

EnergyModel::EnergyModel(EnergyConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.dims.empty()) throw std::invalid_argument("energy model needs tensor dims");
  if (cfg_.rank <= 0) throw std::invalid_argument("rank must be positive");
  if (cfg_.hidden.empty()) throw std::invalid_argument("encoders need at least one hidden layer");
  for (int h : cfg_.hidden)
    if (h <= 0) throw std::invalid_argument("hidden widths must be positive");

  int e = cfg_.embed_dim();
  int dr = cfg_.factor_dim();
  g3_ = init_mlp(mlp_dims(1, cfg_.hidden, e), Activation::Softplus,
                 derive_seed(cfg_.seed, "g3"));
  g4_ = init_mlp(mlp_dims(dr, cfg_.hidden, e), Activation::Softplus,
                 derive_seed(cfg_.seed, "g4"));

  int fused = e;
  if (cfg_.fusion == Fusion::Concat) {
    fused = 2 * e;
    if (cfg_.variant == Variant::Temporal) fused += cfg_.time_embed_dim();
  } else {
    if (cfg_.variant == Variant::Temporal && cfg_.time_embed_dim() != e)
      throw std::invalid_argument("sum fusion requires time_embed == encoder width");
  }
  {
    Rng rng(derive_seed(cfg_.seed, "head"));
    double bound = std::sqrt(6.0 / static_cast<double>(fused + 1));
    head_w_.resize(1, fused);
    for (int c = 0; c < fused; ++c) head_w_(0, c) = rng.uniform(-bound, bound);
    head_b_ = Eigen::MatrixXd::Zero(1, 1);
  }

  if (cfg_.variant == Variant::Implicit) {
    int m = cfg_.coord_feature_dim();
    coord_enc_ = init_fourier(m, static_cast<int>(cfg_.dims.size()), cfg_.coord_scale,
                              derive_seed(cfg_.seed, "coord_enc"));
    coord_proj_ = init_mlp(std::vector<int>{2 * m, dr}, Activation::Softplus,
                           derive_seed(cfg_.seed, "coord_proj"));
  } else {
    factors_ = FactorSet(cfg_.dims, cfg_.rank);
    for (std::size_t d = 0; d < factors_.order(); ++d) {
      Rng rng(derive_seed(cfg_.seed, "factors", d));
      auto& z = factors_.mode(d);
      for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = 0.5 * rng.normal();
    }
  }
  if (cfg_.variant == Variant::Temporal) {
    time_enc_ = init_fourier(cfg_.time_features, 1, cfg_.time_scale,
                             derive_seed(cfg_.seed, "time_enc"));
    time_proj_ = init_mlp(std::vector<int>{2 * cfg_.time_features, cfg_.time_embed_dim()},
                          Activation::Softplus, derive_seed(cfg_.seed, "time_proj"));
  }
  zero_grads();
}

FactorSet& EnergyModel::factors() {
  if (cfg_.variant == Variant::Implicit)
    throw std::invalid_argument("implicit variant stores no factor table");
  return factors_;
}

const FactorSet& EnergyModel::factors() const {
  if (cfg_.variant == Variant::Implicit)
    throw std::invalid_argument("implicit variant stores no factor table");
  return factors_;
}

std::vector<NamedTensor> EnergyModel::named_params() {
  std::vector<NamedTensor> out;
  auto add_mlp = [&](const std::string& base, MlpParams& p) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      out.push_back({base + ".l" + std::to_string(l) + ".W", &p.layers[l].W});
      out.push_back({base + ".l" + std::to_string(l) + ".b", &p.layers[l].b});
    }
  };
  add_mlp("g3", g3_);
  add_mlp("g4", g4_);
  out.push_back({"head.W", &head_w_});
  out.push_back({"head.b", &head_b_});
  if (cfg_.variant == Variant::Temporal) add_mlp("time_proj", time_proj_);
  if (cfg_.variant == Variant::Implicit) {
    add_mlp("coord_proj", coord_proj_);
    if (cfg_.coord_trainable) out.push_back({"coord_enc.B", &coord_enc_.B});
  }
  if (cfg_.variant != Variant::Implicit)
    for (std::size_t d = 0; d < factors_.order(); ++d)
      out.push_back({"factors." + std::to_string(d), &factors_.mode(d)});
  return out;
}

void EnergyModel::zero_grads() {
  auto params = named_params();
  grads_.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    grads_[k].resize(params[k].tensor->rows(), params[k].tensor->cols());
    grads_[k].setZero();
  }
}

void EnergyModel::begin_batch(Tape& tape) {
  snap_ = Snap{};
  snap_.tape = &tape;
  snap_leaves_.clear();

  auto adopt_mlp = [&](MlpParams& p, MlpVars& vars) {
    vars = snapshot(tape, p);
    for (auto& layer : vars.layers) {
      snap_leaves_.push_back(layer.w);
      snap_leaves_.push_back(layer.b);
    }
  };
  adopt_mlp(g3_, snap_.g3);
  adopt_mlp(g4_, snap_.g4);

  snap_.head_w.clear();
  for (Eigen::Index c = 0; c < head_w_.cols(); ++c)
    snap_.head_w.push_back(tape.leaf(head_w_(0, c)));
  snap_leaves_.push_back(snap_.head_w);
  snap_.head_b = tape.leaf(head_b_(0, 0));
  snap_leaves_.push_back({snap_.head_b});

  if (cfg_.variant == Variant::Temporal) adopt_mlp(time_proj_, snap_.time_proj);
  if (cfg_.variant == Variant::Implicit) {
    adopt_mlp(coord_proj_, snap_.coord_proj);
    if (cfg_.coord_trainable) {
      snap_.coord_b.clear();
      for (Eigen::Index r = 0; r < coord_enc_.B.rows(); ++r)
        for (Eigen::Index c = 0; c < coord_enc_.B.cols(); ++c)
          snap_.coord_b.push_back(tape.leaf(coord_enc_.B(r, c)));
      snap_leaves_.push_back(snap_.coord_b);
    }
  }
  if (cfg_.variant != Variant::Implicit)
    for (std::size_t d = 0; d < factors_.order(); ++d)
      snap_leaves_.emplace_back();  // per-entry leaves, scattered separately

  entry_leaves_.clear();
  entry_ready_ = false;
}

void EnergyModel::begin_entry(Tape& tape, std::span<const std::uint32_t> idx,
                              std::optional<double> t) {
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  if (cfg_.variant == Variant::Temporal && !t)
    throw std::invalid_argument("temporal variant requires a timestamp");
  if (cfg_.variant != Variant::Temporal && t)
    throw std::invalid_argument("timestamp given to a non-temporal variant");
  entry_leaves_.clear();
  cur_idx_.assign(idx.begin(), idx.end());
  cur_t_ = t;
  auto z = factor_nodes(tape, idx);
  cur_u4_ = mlp_forward(snap_.g4, z);
  cur_tn_.clear();
  if (cfg_.variant == Variant::Temporal) cur_tn_ = time_nodes(tape, *t);
  entry_ready_ = true;
}

std::vector<DVar> EnergyModel::time_nodes(Tape& tape, double t) {
  double tc = t;
  Eigen::VectorXd f = fourier_encode(time_enc_, {&tc, 1});
  std::vector<DVar> tfeats(static_cast<std::size_t>(f.size()));
  for (Eigen::Index k = 0; k < f.size(); ++k)
    tfeats[static_cast<std::size_t>(k)] = dual_constant(tape, f[k]);
  return mlp_forward(snap_.time_proj, tfeats);
}

void EnergyModel::check_index(std::span<const std::uint32_t> idx) const {
  if (!index_in_range(cfg_.dims, idx))
    throw std::out_of_range("index " + index_to_string(idx) + " out of range");
}

Eigen::VectorXd EnergyModel::normalized_coords(std::span<const std::uint32_t> idx) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t d = 0; d < idx.size(); ++d)
    c[static_cast<Eigen::Index>(d)] =
        cfg_.dims[d] > 1 ? static_cast<double>(idx[d]) / static_cast<double>(cfg_.dims[d] - 1)
                         : 0.0;
  return c;
}

std::vector<DVar> EnergyModel::implicit_factor_nodes(Tape& tape,
                                                     std::span<const double> coords) {
  std::vector<DVar> feats;
  if (cfg_.coord_trainable) {
    std::vector<DVar> cd(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) cd[k] = dual_constant(tape, coords[k]);
    feats = fourier_encode(tape, coord_enc_, cd, snap_.coord_b);
  } else {
    Eigen::VectorXd f = fourier_encode(coord_enc_, coords);
    feats.resize(static_cast<std::size_t>(f.size()));
    for (Eigen::Index k = 0; k < f.size(); ++k)
      feats[static_cast<std::size_t>(k)] = dual_constant(tape, f[k]);
  }
  return mlp_forward(snap_.coord_proj, feats);
}

std::vector<DVar> EnergyModel::factor_nodes(Tape& tape,
                                            std::span<const std::uint32_t> idx) {
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  check_index(idx);
  if (cfg_.variant == Variant::Implicit) {
    Eigen::VectorXd c = normalized_coords(idx);
    return implicit_factor_nodes(tape, {c.data(), static_cast<std::size_t>(c.size())});
  }
  std::vector<DVar> z;
  z.reserve(static_cast<std::size_t>(cfg_.factor_dim()));
  for (std::size_t d = 0; d < idx.size(); ++d)
    for (int r = 0; r < cfg_.rank; ++r) {
      Var leaf = tape.leaf(factors_.mode(d)(idx[d], r));
      entry_leaves_.push_back({leaf, static_cast<std::uint32_t>(d), idx[d],
                               static_cast<std::uint32_t>(r)});
      z.push_back(dual(leaf));
    }
  return z;
}

Eigen::VectorXd EnergyModel::time_embedding(double t) const {
  double tc = t;
  Eigen::VectorXd feats = fourier_encode(time_enc_, {&tc, 1});
  return mlp_forward(time_proj_, feats);
}

DVar EnergyModel::fuse_and_head(Tape& tape, std::span<const DVar> u3,
                                std::span<const DVar> u4, std::span<const DVar> tn) {
  std::vector<DVar> fused;
  if (cfg_.fusion == Fusion::Concat) {
    fused.assign(u3.begin(), u3.end());
    fused.insert(fused.end(), u4.begin(), u4.end());
    fused.insert(fused.end(), tn.begin(), tn.end());
  } else {
    if (u3.size() != u4.size()) throw std::invalid_argument("sum fusion width mismatch");
    fused.resize(u3.size());
    for (std::size_t k = 0; k < u3.size(); ++k) fused[k] = u3[k] + u4[k];
    if (!tn.empty()) {
      if (tn.size() != fused.size()) throw std::invalid_argument("sum fusion width mismatch");
      for (std::size_t k = 0; k < fused.size(); ++k) fused[k] = fused[k] + tn[k];
    }
  }
  if (fused.size() != snap_.head_w.size())
    throw std::invalid_argument("head width does not match fused encoding");
  std::vector<DVar> w(fused.size());
  for (std::size_t k = 0; k < fused.size(); ++k) w[k] = dual(snap_.head_w[k]);
  return dot(std::span<const DVar>(w), std::span<const DVar>(fused)) + dual(snap_.head_b);
}

DVar EnergyModel::energy_z(Tape& tape, std::span<const DVar> z, DVar x,
                           std::optional<double> t) {
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  if (cfg_.variant == Variant::Temporal && !t)
    throw std::invalid_argument("temporal variant requires a timestamp");
  if (cfg_.variant != Variant::Temporal && t)
    throw std::invalid_argument("timestamp given to a non-temporal variant");
  if (static_cast<int>(z.size()) != cfg_.factor_dim())
    throw std::invalid_argument("factor vector length mismatch");
  DVar xs[1] = {x};
  auto u3 = mlp_forward(snap_.g3, xs);
  auto u4 = mlp_forward(snap_.g4, z);
  std::vector<DVar> tn;
  if (cfg_.variant == Variant::Temporal) tn = time_nodes(tape, *t);
  return fuse_and_head(tape, u3, u4, tn);
}

DVar EnergyModel::energy(Tape& tape, DVar x) {
  if (!entry_ready_) throw std::invalid_argument("begin_entry was not run");
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  DVar xs[1] = {x};
  auto u3 = mlp_forward(snap_.g3, xs);
  return fuse_and_head(tape, u3, cur_u4_, cur_tn_);
}

DVar EnergyModel::perturbed_energy(Tape& tape, DVar x, std::span<const double> coord_noise) {
  if (cfg_.variant != Variant::Implicit)
    throw std::invalid_argument("smooth regularizer requires the implicit variant");
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  if (!entry_ready_) throw std::invalid_argument("begin_entry was not run");
  if (coord_noise.size() != cur_idx_.size())
    throw std::invalid_argument("coordinate noise length mismatch");
  Eigen::VectorXd c = normalized_coords(cur_idx_);
  for (Eigen::Index d = 0; d < c.size(); ++d) c[d] += coord_noise[static_cast<std::size_t>(d)];
  auto z = implicit_factor_nodes(tape, {c.data(), static_cast<std::size_t>(c.size())});
  DVar xs[1] = {x};
  auto u3 = mlp_forward(snap_.g3, xs);
  auto u4 = mlp_forward(snap_.g4, z);
  return fuse_and_head(tape, u3, u4, {});
}

void EnergyModel::accumulate_gradients(const Tape& tape, double scale) {
  if (snap_.tape != &tape) throw std::invalid_argument("begin_batch was not run on this tape");
  for (std::size_t k = 0; k < snap_leaves_.size(); ++k) {
    const auto& leaves = snap_leaves_[k];
    if (leaves.empty()) continue;
    Eigen::MatrixXd& g = grads_[k];
    std::size_t j = 0;
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) += scale * tape.adjoint(leaves[j++]);
  }
  if (cfg_.variant != Variant::Implicit && !entry_leaves_.empty()) {
    std::size_t base = grads_.size() - factors_.order();
    for (const auto& fl : entry_leaves_)
      grads_[base + fl.mode](fl.row, fl.col) += scale * tape.adjoint(fl.var);
  }
}

Eigen::VectorXd EnergyModel::factor_vector(std::span<const std::uint32_t> idx) const {
  check_index(idx);
  if (cfg_.variant != Variant::Implicit) return gather_factors(factors_, idx);
  Eigen::VectorXd c = normalized_coords(idx);
  Eigen::VectorXd feats =
      fourier_encode(coord_enc_, {c.data(), static_cast<std::size_t>(c.size())});
  return mlp_forward(coord_proj_, feats);
}

/// Numeric evaluator with the factor/time contribution folded into a scalar:
/// for both fusion rules E(x) = head3 . g3(x) + tail, with tail constant per
/// entry.
class ModelEntryEnergy final : public EntryEnergy {
 public:
  ModelEntryEnergy(const EnergyModel& m, std::span<const std::uint32_t> idx,
                   std::optional<double> t)
      : g3_(&m.g3_) {
    const EnergyConfig& cfg = m.config();
    if (cfg.variant == Variant::Temporal && !t)
      throw std::invalid_argument("temporal variant requires a timestamp");
    if (cfg.variant != Variant::Temporal && t)
      throw std::invalid_argument("timestamp given to a non-temporal variant");
    Eigen::VectorXd z = m.factor_vector(idx);
    Eigen::VectorXd u4 = mlp_forward(m.g4_, z);
    int e = cfg.embed_dim();
    double tail = m.head_b_(0, 0);
    if (cfg.fusion == Fusion::Concat) {
      head3_ = m.head_w_.row(0).head(e).transpose();
      tail += m.head_w_.row(0).segment(e, e).dot(u4);
      if (cfg.variant == Variant::Temporal)
        tail += m.head_w_.row(0).tail(cfg.time_embed_dim()).dot(m.time_embedding(*t));
    } else {
      head3_ = m.head_w_.row(0).transpose();
      tail += head3_.dot(u4);
      if (cfg.variant == Variant::Temporal) tail += head3_.dot(m.time_embedding(*t));
    }
    tail_ = tail;
  }

  double energy(double x) const override { return energy_and_dx(x).first; }
  double energy_dx(double x) const override { return energy_and_dx(x).second; }

  std::pair<double, double> energy_and_dx(double x) const override {
    double one = 1.0;
    mlp_forward_dual(*g3_, {&x, 1}, {&one, 1}, u3v_, u3t_);
    return {head3_.dot(u3v_) + tail_, head3_.dot(u3t_)};
  }

 private:
  const MlpParams* g3_;
  Eigen::VectorXd head3_;
  double tail_ = 0.0;
  mutable Eigen::VectorXd u3v_, u3t_;
};

std::unique_ptr<EntryEnergy> EnergyModel::entry_evaluator(
    std::span<const std::uint32_t> idx, std::optional<double> t) const {
  check_index(idx);
  return std::make_unique<ModelEntryEnergy>(*this, idx, t);
}

void EnergyModel::save(const std::filesystem::path& prefix) const {
  auto params = const_cast<EnergyModel*>(this)->named_params();
  save_checkpoint(prefix, params);
}

void EnergyModel::load(const std::filesystem::path& prefix) {
  auto params = named_params();
  load_checkpoint(prefix, params);
}

}  // namespace scoretr
