#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>

#include "scoretr/tensor.hpp"

namespace scoretr {

struct FactorLaw {
  enum class Kind : std::uint8_t { Uniform01, Gaussian };
  Kind kind = Kind::Uniform01;
  Eigen::VectorXd mean;  // length R, Gaussian only
  double var = 1.0;      // isotropic, Gaussian only

  static FactorLaw uniform01() { return {}; }
  static FactorLaw gaussian(Eigen::VectorXd mean, double var) {
    return {Kind::Gaussian, std::move(mean), var};
  }
};

/// I.i.d. factor rows per the requested law; one law for all modes or one per
/// mode.
FactorSet gen_factors(const Dims& dims, int rank, const FactorLaw& law, std::uint64_t seed);
FactorSet gen_factors(const Dims& dims, int rank, std::span<const FactorLaw> laws,
                      std::uint64_t seed);

enum class SimLaw : std::uint8_t { Beta, MoG, Exponential };

struct SimSpec {
  Dims dims{8, 8};
  int rank = 5;
  SimLaw law = SimLaw::MoG;
  int samples = 200;  // N per entry
  std::uint64_t seed = 0;
};

/// N draws per entry of a two-mode tensor, conditioned on m = Z1 * Z2^T:
/// Beta(m_ij, 5), 0.6 N(cos m_ij, 0.1^2) + 0.4 N(sin m_ij, 0.25^2), or
/// Exp(m_ij). Multiset tensor (repeated entries).
SparseTensor gen_entry_samples(const FactorSet& z, const SimSpec& spec);

/// True density of the simulation law for one entry, evaluated pointwise.
double sim_true_pdf(SimLaw law, double m, double x);

/// Deterministic dynamic tensor over a uniform timestamp grid on [0,1]:
/// x_i(t) = sum_{r1,r2} z1_{i1 r1} z2_{i2 r2} w_{r1 r2}(t) with the four
/// temporal bases sin(2 pi t), cos(2 pi t), sin^2(2 pi t),
/// cos(5 pi t) sin^2(5 pi t). Requires a two-mode rank-2 factor set.
SparseTensor gen_continuous(const FactorSet& z, int timestamps, std::uint64_t seed);

double continuous_value(const FactorSet& z, std::uint32_t i, std::uint32_t j, double t);

struct MissingSpec {
  enum class Mode : std::uint8_t { Random, Burst };
  Mode mode = Mode::Random;
  double rate = 0.1;        // Random: sampling rate (fraction kept for training)
  int bursts = 4;           // Burst: starts per entry
  double burst_frac = 0.05; // Burst: fraction of stamps masked per start
  std::uint64_t seed = 0;
};

/// Splits observations into disjoint (train, test) sets. Random mode keeps
/// floor(rate*n) entries for training; burst mode masks, per entry, `bursts`
/// runs of ceil(burst_frac*T) consecutive timestamps (overlaps merged).
std::pair<SparseTensor, SparseTensor> apply_missing(const SparseTensor& data,
                                                    const MissingSpec& spec);

/// Mixed-noise corrupter for [0,1] images laid out (H, W[, B]).
struct NoiseCaseSpec {
  double gaussian_std = 0.0;
  double sparse_rate = 0.0;          // salt-and-pepper replacement
  double stripe_band_fraction = 0.0;
  double stripe_row_fraction = 0.0;
  bool dead_lines = false;

  /// The six benchmark scenarios.
  static NoiseCaseSpec for_case(int case_id);
};

DenseTensor corrupt(const DenseTensor& image, const NoiseCaseSpec& spec, std::uint64_t seed);

/// Clean low-rank test tensor: CP contraction of Uniform(0,1) factors,
/// rescaled to [0.1, 0.9].
DenseTensor gen_lowrank(const Dims& dims, int rank, std::uint64_t seed);

}  // namespace scoretr
