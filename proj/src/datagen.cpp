#include "scoretr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "scoretr/rng.hpp"

namespace scoretr {

namespace {

void fill_mode(Eigen::MatrixXd& z, const FactorLaw& law, Rng& rng) {
  if (law.kind == FactorLaw::Kind::Uniform01) {
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.uniform();
    return;
  }
  if (law.mean.size() != z.cols())
    throw std::invalid_argument("factor law mean length must equal the rank");
  if (!(law.var > 0.0)) throw std::invalid_argument("factor law variance must be positive");
  double sd = std::sqrt(law.var);
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = law.mean[c] + sd * rng.normal();
}

}  // namespace

FactorSet gen_factors(const Dims& dims, int rank, const FactorLaw& law, std::uint64_t seed) {
  std::vector<FactorLaw> laws(dims.size(), law);
  return gen_factors(dims, rank, laws, seed);
}

FactorSet gen_factors(const Dims& dims, int rank, std::span<const FactorLaw> laws,
                      std::uint64_t seed) {
  if (laws.size() != dims.size())
    throw std::invalid_argument("one factor law per mode required");
  FactorSet z(dims, rank);
  for (std::size_t d = 0; d < dims.size(); ++d) {
    Rng rng(derive_seed(seed, "factors", d));
    fill_mode(z.mode(d), laws[d], rng);
  }
  return z;
}

SparseTensor gen_entry_samples(const FactorSet& z, const SimSpec& spec) {
  if (z.order() != 2 || spec.dims.size() != 2)
    throw std::invalid_argument("entry sampling expects a two-mode tensor");
  if (spec.samples < 1) throw std::invalid_argument("need at least one sample per entry");
  Eigen::MatrixXd m = z.mode(0) * z.mode(1).transpose();
  SparseTensor out(spec.dims, false, SparseTensor::Dedup::Allow);
  out.reserve(numel(spec.dims) * static_cast<std::size_t>(spec.samples));
  MultiIndex idx(2);
  for (std::uint32_t i = 0; i < spec.dims[0]; ++i)
    for (std::uint32_t j = 0; j < spec.dims[1]; ++j) {
      double mij = m(i, j);
      if ((spec.law == SimLaw::Beta || spec.law == SimLaw::Exponential) && !(mij > 0.0))
        throw std::runtime_error("non-positive shape/rate at entry (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      Rng rng(derive_seed(spec.seed, "entry", i, j));
      idx[0] = i;
      idx[1] = j;
      for (int n = 0; n < spec.samples; ++n) {
        double x = 0.0;
        switch (spec.law) {
          case SimLaw::Beta: x = rng.beta(mij, 5.0); break;
          case SimLaw::MoG:
            x = rng.uniform() < 0.6 ? rng.normal(std::cos(mij), 0.1)
                                    : rng.normal(std::sin(mij), 0.25);
            break;
          case SimLaw::Exponential: x = rng.exponential(mij); break;
        }
        out.add(idx, x);
      }
    }
  return out;
}

double sim_true_pdf(SimLaw law, double m, double x) {
  switch (law) {
    case SimLaw::Beta: {
      if (x <= 0.0 || x >= 1.0) return 0.0;
      double log_b = std::lgamma(m) + std::lgamma(5.0) - std::lgamma(m + 5.0);
      return std::exp((m - 1.0) * std::log(x) + 4.0 * std::log1p(-x) - log_b);
    }
    case SimLaw::MoG: {
      auto gauss = [](double v, double mu, double sd) {
        double d = (v - mu) / sd;
        return std::exp(-0.5 * d * d) / (sd * std::sqrt(2.0 * std::numbers::pi));
      };
      return 0.6 * gauss(x, std::cos(m), 0.1) + 0.4 * gauss(x, std::sin(m), 0.25);
    }
    case SimLaw::Exponential: return x < 0.0 ? 0.0 : m * std::exp(-m * x);
  }
  return 0.0;
}

double continuous_value(const FactorSet& z, std::uint32_t i, std::uint32_t j, double t) {
  double two_pi_t = 2.0 * std::numbers::pi * t;
  double five_pi_t = 5.0 * std::numbers::pi * t;
  double s2 = std::sin(two_pi_t);
  double s5 = std::sin(five_pi_t);
  double w[2][2] = {{std::sin(two_pi_t), std::cos(two_pi_t)},
                    {s2 * s2, std::cos(five_pi_t) * s5 * s5}};
  double acc = 0.0;
  for (int r1 = 0; r1 < 2; ++r1)
    for (int r2 = 0; r2 < 2; ++r2)
      acc += z.mode(0)(i, r1) * z.mode(1)(j, r2) * w[r1][r2];
  return acc;
}

SparseTensor gen_continuous(const FactorSet& z, int timestamps, std::uint64_t /*seed*/) {
  if (z.order() != 2 || z.rank() != 2)
    throw std::invalid_argument("continuous simulation expects a two-mode rank-2 factor set");
  if (timestamps < 2) throw std::invalid_argument("need at least two timestamps");
  Dims dims = z.dims();
  SparseTensor out(dims, true);
  out.reserve(numel(dims) * static_cast<std::size_t>(timestamps));
  MultiIndex idx(2);
  for (std::uint32_t i = 0; i < dims[0]; ++i)
    for (std::uint32_t j = 0; j < dims[1]; ++j) {
      idx[0] = i;
      idx[1] = j;
      for (int k = 0; k < timestamps; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(timestamps - 1);
        out.add(idx, continuous_value(z, i, j, t), t);
      }
    }
  return out;
}

namespace {

SparseTensor subset(const SparseTensor& data, const std::vector<std::size_t>& ids) {
  SparseTensor out(data.dims(), data.has_time(),
                   data.multiset() ? SparseTensor::Dedup::Allow : SparseTensor::Dedup::Reject);
  out.reserve(ids.size());
  for (std::size_t e : ids) {
    if (data.has_time())
      out.add(data.index(e), data.value(e), data.time(e));
    else
      out.add(data.index(e), data.value(e));
  }
  return out;
}

}  // namespace

std::pair<SparseTensor, SparseTensor> apply_missing(const SparseTensor& data,
                                                    const MissingSpec& spec) {
  std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("apply_missing: no observations");
  std::vector<std::size_t> train_ids, test_ids;

  if (spec.mode == MissingSpec::Mode::Random) {
    if (!(spec.rate > 0.0 && spec.rate < 1.0))
      throw std::invalid_argument("apply_missing: rate must lie in (0,1)");
    std::vector<std::size_t> ids(n);
    for (std::size_t e = 0; e < n; ++e) ids[e] = e;
    Rng rng(derive_seed(spec.seed, "missing"));
    rng.shuffle(ids);
    std::size_t keep = static_cast<std::size_t>(spec.rate * static_cast<double>(n));
    train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
    test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end());
  } else {
    if (!data.has_time())
      throw std::invalid_argument("burst missing requires timestamped data");
    if (spec.bursts < 1) throw std::invalid_argument("burst missing: bursts must be >= 1");
    if (!(spec.burst_frac > 0.0 && spec.burst_frac < 1.0))
      throw std::invalid_argument("burst missing: burst_frac must lie in (0,1)");
    // group entry ids per index, in time order
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t e = 0; e < n; ++e)
      groups[linear_index(data.dims(), data.index(e))].push_back(e);
    for (auto& [lin, ids] : groups) {
      std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return data.time(a) < data.time(b);
      });
      std::size_t T = ids.size();
      std::size_t len = static_cast<std::size_t>(
          std::ceil(spec.burst_frac * static_cast<double>(T)));
      std::vector<bool> masked(T, false);
      Rng rng(derive_seed(spec.seed, "burst", lin));
      for (int b = 0; b < spec.bursts; ++b) {
        std::size_t start = static_cast<std::size_t>(rng.below(T));
        for (std::size_t k = start; k < std::min(T, start + len); ++k) masked[k] = true;
      }
      for (std::size_t k = 0; k < T; ++k)
        (masked[k] ? test_ids : train_ids).push_back(ids[k]);
    }
  }

  if (train_ids.empty()) throw std::invalid_argument("apply_missing: empty train split");
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  return {subset(data, train_ids), subset(data, test_ids)};
}

NoiseCaseSpec NoiseCaseSpec::for_case(int case_id) {
  NoiseCaseSpec s;
  switch (case_id) {
    case 1: s.gaussian_std = 0.2; break;
    case 2:
      s.gaussian_std = 0.1;
      s.sparse_rate = 0.1;
      break;
    case 3:
      s.gaussian_std = 0.1;
      s.sparse_rate = 0.1;
      s.dead_lines = true;
      break;
    case 4:
      s.gaussian_std = 0.1;
      s.sparse_rate = 0.1;
      s.stripe_row_fraction = 0.1;
      s.stripe_band_fraction = 0.4;
      break;
    case 5:
      s.gaussian_std = 0.1;
      s.sparse_rate = 0.1;
      s.stripe_row_fraction = 0.1;
      s.stripe_band_fraction = 0.4;
      s.dead_lines = true;
      break;
    case 6: s.sparse_rate = 0.1; break;
    default: throw std::invalid_argument("noise case must be 1..6");
  }
  return s;
}

namespace {

std::vector<std::uint32_t> choose(std::uint32_t n, std::uint32_t k, Rng& rng) {
  std::vector<std::uint32_t> ids(n);
  for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return ids;
}

}  // namespace

DenseTensor corrupt(const DenseTensor& image, const NoiseCaseSpec& spec, std::uint64_t seed) {
  if (image.order() != 2 && image.order() != 3)
    throw std::invalid_argument("corrupt: expects an (H, W[, B]) tensor");
  if (image.values().minCoeff() < 0.0 || image.values().maxCoeff() > 1.0)
    throw std::invalid_argument("corrupt: image must lie in [0,1]");
  if (!(spec.sparse_rate >= 0.0 && spec.sparse_rate <= 1.0) ||
      !(spec.stripe_band_fraction >= 0.0 && spec.stripe_band_fraction <= 1.0) ||
      !(spec.stripe_row_fraction >= 0.0 && spec.stripe_row_fraction <= 1.0))
    throw std::invalid_argument("corrupt: rates must lie in [0,1]");

  std::size_t h = image.dims()[0], w = image.dims()[1];
  std::size_t bands = image.order() == 3 ? image.dims()[2] : 1;
  DenseTensor out = image;
  std::size_t n = out.size();

  if (spec.gaussian_std > 0.0) {
    Rng rng(derive_seed(seed, "gaussian"));
    for (std::size_t k = 0; k < n; ++k) out[k] += spec.gaussian_std * rng.normal();
  }
  if (spec.sparse_rate > 0.0) {
    Rng rng(derive_seed(seed, "impulse"));
    std::size_t count = static_cast<std::size_t>(spec.sparse_rate * static_cast<double>(n));
    std::vector<std::uint32_t> pos = choose(static_cast<std::uint32_t>(n),
                                            static_cast<std::uint32_t>(count), rng);
    for (std::uint32_t p : pos) out[p] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  if (spec.stripe_band_fraction > 0.0 && spec.stripe_row_fraction > 0.0) {
    Rng rng(derive_seed(seed, "stripe"));
    std::uint32_t nb = static_cast<std::uint32_t>(
        spec.stripe_band_fraction * static_cast<double>(bands));
    std::uint32_t nr = static_cast<std::uint32_t>(
        spec.stripe_row_fraction * static_cast<double>(h));
    auto band_sel = choose(static_cast<std::uint32_t>(bands), nb, rng);
    for (std::uint32_t b : band_sel) {
      auto rows = choose(static_cast<std::uint32_t>(h), nr, rng);
      for (std::uint32_t r : rows) {
        double amp = rng.uniform(-0.25, 0.25);
        for (std::size_t c = 0; c < w; ++c) out[(r * w + c) * bands + b] += amp;
      }
    }
  }
  if (spec.dead_lines) {
    Rng rng(derive_seed(seed, "deadline"));
    for (int k = 0; k < 3; ++k) {
      std::size_t width = 1 + static_cast<std::size_t>(rng.below(3));
      width = std::min(width, w);
      std::size_t c0 = static_cast<std::size_t>(rng.below(w - width + 1));
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = c0; c < c0 + width; ++c)
          for (std::size_t b = 0; b < bands; ++b) out[(r * w + c) * bands + b] = 0.0;
    }
  }
  return out;
}

DenseTensor gen_lowrank(const Dims& dims, int rank, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("gen_lowrank: rank must be >= 1");
  FactorSet z = gen_factors(dims, rank, FactorLaw::uniform01(), seed);
  DenseTensor out(dims);
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    MultiIndex idx = unravel_index(dims, lin);
    double acc = 0.0;
    for (int r = 0; r < rank; ++r) {
      double prod = 1.0;
      for (std::size_t d = 0; d < dims.size(); ++d) prod *= z.mode(d)(idx[d], r);
      acc += prod;
    }
    out[lin] = acc;
  }
  double lo = out.values().minCoeff(), hi = out.values().maxCoeff();
  if (hi > lo)
    out.values() = 0.1 + 0.8 * (out.values().array() - lo) / (hi - lo);
  else
    out.values().setConstant(0.5);
  return out;
}

}  // namespace scoretr
