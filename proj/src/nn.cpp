#include "scoretr/nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "scoretr/rng.hpp"

namespace scoretr {

MlpParams init_mlp(std::span<const int> dims, Activation act, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("mlp needs at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("mlp dims must be positive");
  MlpParams p;
  p.hidden_act = act;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    int in = dims[l], out = dims[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    MlpLayer layer;
    layer.W.resize(out, in);
    // row-major fill so the draw order matches the snapshot layout
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.W(r, c) = rng.uniform(-bound, bound);
    layer.b = Eigen::MatrixXd::Zero(out, 1);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpVars snapshot(Tape& tape, const MlpParams& p) {
  MlpVars vars;
  vars.hidden_act = p.hidden_act;
  vars.layers.reserve(p.layers.size());
  for (const auto& layer : p.layers) {
    MlpVars::Layer lv;
    lv.out = static_cast<int>(layer.W.rows());
    lv.in = static_cast<int>(layer.W.cols());
    lv.w.reserve(static_cast<std::size_t>(lv.out) * lv.in);
    for (int r = 0; r < lv.out; ++r)
      for (int c = 0; c < lv.in; ++c) lv.w.push_back(tape.leaf(layer.W(r, c)));
    lv.b.reserve(lv.out);
    for (int r = 0; r < lv.out; ++r) lv.b.push_back(tape.leaf(layer.b(r, 0)));
    vars.layers.push_back(std::move(lv));
  }
  return vars;
}

std::vector<DVar> mlp_forward(const MlpVars& vars, std::span<const DVar> input) {
  if (vars.layers.empty()) throw std::invalid_argument("mlp has no layers");
  if (static_cast<int>(input.size()) != vars.layers.front().in)
    throw std::invalid_argument("mlp input length mismatch");
  std::vector<DVar> cur(input.begin(), input.end());
  std::vector<DVar> next;
  std::vector<DVar> wrow;
  for (std::size_t l = 0; l < vars.layers.size(); ++l) {
    const auto& layer = vars.layers[l];
    bool is_output = (l + 1 == vars.layers.size());
    next.clear();
    next.reserve(layer.out);
    for (int r = 0; r < layer.out; ++r) {
      wrow.clear();
      for (int c = 0; c < layer.in; ++c)
        wrow.push_back(dual(layer.w[static_cast<std::size_t>(r) * layer.in + c]));
      DVar z = dot(std::span<const DVar>(wrow), std::span<const DVar>(cur)) +
               dual(layer.b[static_cast<std::size_t>(r)]);
      if (!is_output)
        z = vars.hidden_act == Activation::Softplus ? softplus(z) : tanh(z);
      next.push_back(z);
    }
    cur.swap(next);
  }
  return cur;
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& input) {
  if (p.layers.empty()) throw std::invalid_argument("mlp has no layers");
  if (input.size() != p.layers.front().W.cols())
    throw std::invalid_argument("mlp input length mismatch");
  Eigen::VectorXd cur = input;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    Eigen::VectorXd z = layer.W * cur + layer.b.col(0);
    if (l + 1 < p.layers.size()) {
      if (p.hidden_act == Activation::Softplus)
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = Tape::softplus_value(z[k]);
      else
        z = z.array().tanh();
    }
    cur = std::move(z);
  }
  return cur;
}

void mlp_forward_dual(const MlpParams& p, std::span<const double> in_val,
                      std::span<const double> in_tan, Eigen::VectorXd& out_val,
                      Eigen::VectorXd& out_tan) {
  if (p.layers.empty()) throw std::invalid_argument("mlp has no layers");
  if (static_cast<Eigen::Index>(in_val.size()) != p.layers.front().W.cols() ||
      in_val.size() != in_tan.size())
    throw std::invalid_argument("mlp input length mismatch");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(in_val.data(),
                                                        static_cast<Eigen::Index>(in_val.size()));
  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(in_tan.data(),
                                                        static_cast<Eigen::Index>(in_tan.size()));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    Eigen::VectorXd zv = layer.W * v + layer.b.col(0);
    Eigen::VectorXd zt = layer.W * t;
    if (l + 1 < p.layers.size()) {
      for (Eigen::Index k = 0; k < zv.size(); ++k) {
        double a = zv[k];
        if (p.hidden_act == Activation::Softplus) {
          zt[k] *= Tape::sigmoid_value(a);
          zv[k] = Tape::softplus_value(a);
        } else {
          double th = std::tanh(a);
          zt[k] *= 1.0 - th * th;
          zv[k] = th;
        }
      }
    }
    v = std::move(zv);
    t = std::move(zt);
  }
  out_val = std::move(v);
  out_tan = std::move(t);
}

FourierEncoder init_fourier(int features, int coord_dim, double scale, std::uint64_t seed) {
  if (features < 1 || coord_dim < 1)
    throw std::invalid_argument("fourier encoder needs positive feature and coord dims");
  if (!(scale > 0.0)) throw std::invalid_argument("fourier scale must be positive");
  FourierEncoder enc;
  enc.scale = scale;
  enc.B.resize(features, coord_dim);
  Rng rng(seed);
  for (int r = 0; r < features; ++r)
    for (int c = 0; c < coord_dim; ++c) enc.B(r, c) = rng.normal();
  return enc;
}

Eigen::VectorXd fourier_encode(const FourierEncoder& enc, std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != enc.coord_dim())
    throw std::invalid_argument("fourier encoder coord length mismatch");
  Eigen::Map<const Eigen::VectorXd> c(coords.data(), static_cast<Eigen::Index>(coords.size()));
  Eigen::VectorXd arg = (2.0 * std::numbers::pi * enc.scale) * (enc.B * c);
  Eigen::VectorXd out(2 * enc.features());
  out.head(enc.features()) = arg.array().sin();
  out.tail(enc.features()) = arg.array().cos();
  return out;
}

std::vector<DVar> fourier_encode(Tape& tape, const FourierEncoder& enc,
                                 std::span<const DVar> coords, std::span<const Var> b_vars) {
  if (static_cast<int>(coords.size()) != enc.coord_dim())
    throw std::invalid_argument("fourier encoder coord length mismatch");
  int m = enc.features(), k = enc.coord_dim();
  if (!b_vars.empty() && static_cast<int>(b_vars.size()) != m * k)
    throw std::invalid_argument("fourier encoder B var count mismatch");
  double w = 2.0 * std::numbers::pi * enc.scale;
  std::vector<DVar> row(static_cast<std::size_t>(k));
  std::vector<DVar> out;
  out.resize(static_cast<std::size_t>(2 * m));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < k; ++c) {
      Var b = b_vars.empty() ? tape.constant(enc.B(r, c)) : b_vars[static_cast<std::size_t>(r) * k + c];
      row[static_cast<std::size_t>(c)] = dual(b);
    }
    DVar arg = dot(std::span<const DVar>(row), coords) * w;
    out[static_cast<std::size_t>(r)] = sin(arg);
    out[static_cast<std::size_t>(m + r)] = cos(arg);
  }
  return out;
}

AdamState::AdamState(std::span<Eigen::MatrixXd* const> params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Eigen::MatrixXd* p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

void adam_step(AdamState& state, std::span<Eigen::MatrixXd* const> params,
               std::span<const Eigen::MatrixXd* const> grads, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m_.size())
    throw std::invalid_argument("adam: parameter/gradient/state count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k]->rows() != params[k]->rows() || grads[k]->cols() != params[k]->cols())
      throw std::invalid_argument("adam: gradient shape mismatch");
    if (!grads[k]->allFinite())
      throw std::runtime_error("adam: non-finite gradient; step refused");
  }
  state.t_ += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t_));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Eigen::MatrixXd& g = *grads[k];
    Eigen::MatrixXd& m = state.m_[k];
    Eigen::MatrixXd& v = state.v_[k];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    params[k]->array() -=
        cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
  }
}

}  // namespace scoretr
