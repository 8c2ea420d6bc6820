#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scoretr/tape.hpp"

namespace scoretr {

enum class Activation : std::uint8_t { Softplus, Tanh };

struct MlpLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::MatrixXd b;  // out x 1
};

/// Affine + activation per hidden layer, affine output layer.
struct MlpParams {
  std::vector<MlpLayer> layers;
  Activation hidden_act = Activation::Softplus;

  int in_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
  int out_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows()); }
};

/// Glorot-uniform weights, zero biases; dims = (in, hidden..., out).
MlpParams init_mlp(std::span<const int> dims, Activation act, std::uint64_t seed);

/// Parameter leaves of one MLP snapshotted onto a tape. Weight vars are
/// row-major per layer.
struct MlpVars {
  struct Layer {
    std::vector<Var> w;  // out*in, row-major
    std::vector<Var> b;
    int out = 0, in = 0;
  };
  std::vector<Layer> layers;
  Activation hidden_act = Activation::Softplus;
};

MlpVars snapshot(Tape& tape, const MlpParams& p);

/// Recorded forward pass over dual inputs; tangents propagate through.
std::vector<DVar> mlp_forward(const MlpVars& vars, std::span<const DVar> input);

/// Plain numeric forward pass.
Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& input);

/// Numeric forward carrying one tangent component per unit; returns
/// (output values, output tangents) given input values and tangents.
void mlp_forward_dual(const MlpParams& p, std::span<const double> in_val,
                      std::span<const double> in_tan, Eigen::VectorXd& out_val,
                      Eigen::VectorXd& out_tan);

/// Random Fourier feature encoder: coords c |-> (sin(2*pi*scale*B'c... ), cos(...)),
/// output length 2m for an m x k frequency matrix B.
struct FourierEncoder {
  Eigen::MatrixXd B;  // m x k
  double scale = 1.0;
  bool trainable = false;

  int features() const { return static_cast<int>(B.rows()); }
  int coord_dim() const { return static_cast<int>(B.cols()); }
  int out_dim() const { return 2 * features(); }
};

/// Frequencies ~ N(0, 1) scaled at evaluation time by `scale`.
FourierEncoder init_fourier(int features, int coord_dim, double scale, std::uint64_t seed);

Eigen::VectorXd fourier_encode(const FourierEncoder& enc, std::span<const double> coords);

/// Recorded variant (for trainable-B setups and for tests exercising the
/// node-level contract). B entries are taken from `b_vars` when non-empty,
/// else recorded as constants.
std::vector<DVar> fourier_encode(Tape& tape, const FourierEncoder& enc,
                                 std::span<const DVar> coords,
                                 std::span<const Var> b_vars = {});

// --- Adam -------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators mirroring a fixed list of parameter
/// tensors; step counter starts at 0.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::span<Eigen::MatrixXd* const> params);

  std::int64_t step_count() const { return t_; }
  const Eigen::MatrixXd& first_moment(std::size_t k) const { return m_[k]; }
  const Eigen::MatrixXd& second_moment(std::size_t k) const { return v_[k]; }

  friend void adam_step(AdamState& state, std::span<Eigen::MatrixXd* const> params,
                        std::span<const Eigen::MatrixXd* const> grads, const AdamConfig& cfg);

 private:
  std::vector<Eigen::MatrixXd> m_, v_;
  std::int64_t t_ = 0;
};

/// One bias-corrected Adam update. Non-finite gradients refuse the step.
void adam_step(AdamState& state, std::span<Eigen::MatrixXd* const> params,
               std::span<const Eigen::MatrixXd* const> grads, const AdamConfig& cfg);

}  // namespace scoretr
