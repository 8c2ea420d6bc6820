#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "scoretr/samplers.hpp"

using namespace scoretr;

namespace {

struct ZeroScore final : EntryEnergy {
  double energy(double) const override { return 1.0; }
  double energy_dx(double) const override { return 0.0; }
};

struct Quadratic final : EntryEnergy {
  double c = 0.0;
  explicit Quadratic(double center) : c(center) {}
  double energy(double x) const override { return 0.5 * (x - c) * (x - c); }
  double energy_dx(double x) const override { return x - c; }
};

struct Broken final : EntryEnergy {
  double energy(double) const override { return std::nan(""); }
  double energy_dx(double) const override { return std::nan(""); }
};

}  // namespace

TEST_CASE("langevin step") {
  ZeroScore zero;
  Rng rng(5);
  SUBCASE("alpha 0 leaves x untouched") {
    CHECK(langevin_step(zero, 1.25, 0.0, rng) == 1.25);
  }
  SUBCASE("zero score moves by sqrt(2 alpha) xi") {
    double xi = Rng(5).normal();
    Rng stream(5);
    CHECK(langevin_step(zero, 2.0, 0.5, stream) == doctest::Approx(2.0 + xi));
  }
  SUBCASE("full update formula") {
    Quadratic quad(0.3);
    double x = 1.1, alpha = 0.07;
    double xi = Rng(9).normal();
    Rng stream(9);
    double got = langevin_step(quad, x, alpha, stream);
    CHECK(got == doctest::Approx(x - alpha * (x - 0.3) + std::sqrt(2 * alpha) * xi));
  }
  SUBCASE("negative alpha rejected") {
    CHECK_THROWS_AS(langevin_step(zero, 0.0, -0.1, rng), std::invalid_argument);
  }
  SUBCASE("non-finite result raises a sampler error") {
    Broken broken;
    CHECK_THROWS_AS(langevin_step(broken, 0.0, 0.1, rng), std::runtime_error);
  }
}

TEST_CASE("noiseless gradient iteration converges geometrically to the center") {
  Quadratic quad(0.8);
  double x = 5.0, alpha = 0.3;
  double prev_gap = std::abs(x - 0.8);
  for (int k = 0; k < 40; ++k) {
    x = x - alpha * quad.energy_dx(x);
    double gap = std::abs(x - 0.8);
    CHECK(gap <= prev_gap * (1 - alpha) + 1e-15);
    prev_gap = gap;
  }
  CHECK(std::abs(x - 0.8) < 1e-5);
}

TEST_CASE("anneal with zero steps returns the init") {
  ZeroScore zero;
  LangevinConfig cfg;
  cfg.schedule = make_noise_schedule(1.0, 0.01, 10);
  cfg.steps = 0;
  Rng rng(1);
  CHECK(anneal_chain(zero, 3.75, cfg, rng) == 3.75);
}

TEST_CASE("zero-score annealing is a pure random walk") {
  // variance over chains must match sum_l 2 K alpha_l within 10%
  ZeroScore zero;
  LangevinConfig cfg;
  cfg.schedule = make_noise_schedule(0.2, 0.01, 10);
  cfg.eps = 2e-5;
  cfg.steps = 5;
  cfg.seed = 123;

  double smin2 = 0.01 * 0.01;
  double expected = 0.0;
  for (std::size_t l = 0; l < cfg.schedule.levels(); ++l) {
    double s = cfg.schedule.sigma(l);
    expected += 2.0 * cfg.steps * cfg.eps * s * s / smin2;
  }

  std::size_t n = 10000;
  std::vector<ChainRequest> chains(n);
  for (std::size_t k = 0; k < n; ++k) chains[k] = {k, 0.0, &zero};
  AnnealResult res = anneal(chains, cfg, 2);
  REQUIRE(res.failed.empty());
  double mean = std::accumulate(res.values.begin(), res.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : res.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(var - expected) / expected < 0.10);
}

TEST_CASE("annealed sampling reaches the stationary law of x^2/2") {
  Quadratic quad(0.0);
  LangevinConfig cfg;
  cfg.schedule = make_noise_schedule(1.0, 0.01, 10);
  cfg.eps = 2e-5;
  cfg.steps = 100;
  cfg.seed = 7;

  std::size_t n = 2000;
  std::vector<ChainRequest> chains(n);
  for (std::size_t k = 0; k < n; ++k) chains[k] = {k, 0.0, &quad};
  AnnealResult res = anneal(chains, cfg, 2);
  REQUIRE(res.failed.empty());
  double mean = std::accumulate(res.values.begin(), res.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : res.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(mean) < 0.1);
  CHECK(var > 0.8);
  CHECK(var < 1.2);
}

TEST_CASE("chains depend only on their stream id") {
  Quadratic quad(0.5);
  LangevinConfig cfg;
  cfg.schedule = make_noise_schedule(0.5, 0.05, 5);
  cfg.steps = 10;
  cfg.seed = 11;

  std::vector<ChainRequest> fwd, rev;
  for (std::size_t k = 0; k < 64; ++k) fwd.push_back({k, 0.0, &quad});
  for (std::size_t k = 64; k-- > 0;) rev.push_back({k, 0.0, &quad});
  AnnealResult a = anneal(fwd, cfg, 1);
  AnnealResult b = anneal(rev, cfg, 2);
  for (std::size_t k = 0; k < 64; ++k) CHECK(a.values[k] == b.values[63 - k]);
}

TEST_CASE("failed chains are recorded, others survive") {
  Quadratic quad(0.0);
  Broken broken;
  LangevinConfig cfg;
  cfg.schedule = NoiseSchedule({0.1});
  cfg.steps = 3;
  std::vector<ChainRequest> chains = {{0, 0.0, &quad}, {1, 0.0, &broken}, {2, 0.0, &quad}};
  AnnealResult res = anneal(chains, cfg, 1);
  REQUIRE(res.failed.size() == 1);
  CHECK(res.failed[0] == 1);
  CHECK(std::isnan(res.values[1]));
  CHECK(std::isfinite(res.values[0]));
  CHECK(std::isfinite(res.values[2]));
}

TEST_CASE("grid search") {
  SUBCASE("finds the parabola minimum on the 5-point grid") {
    Quadratic quad(0.5);
    CHECK(grid_min(quad, {0.0, 1.0, 5}) == 0.5);
  }
  SUBCASE("constant energy ties break toward lo") {
    ZeroScore flat;
    CHECK(grid_min(flat, {-1.0, 1.0, 33}) == -1.0);
  }
  SUBCASE("matches exhaustive re-evaluation") {
    struct Wiggly final : EntryEnergy {
      double energy(double x) const override { return std::sin(7 * x) + x * x; }
      double energy_dx(double x) const override { return 7 * std::cos(7 * x) + 2 * x; }
    } wiggly;
    GridConfig cfg{-2.0, 2.0, 97};
    double got = grid_min(wiggly, cfg);
    double step = (cfg.hi - cfg.lo) / (cfg.points - 1);
    double best_x = cfg.lo, best_e = wiggly.energy(cfg.lo);
    for (int g = 1; g < cfg.points; ++g) {
      double x = cfg.lo + g * step;
      if (wiggly.energy(x) < best_e) {
        best_e = wiggly.energy(x);
        best_x = x;
      }
    }
    CHECK(got == best_x);
    CHECK(got >= cfg.lo);
    CHECK(got <= cfg.hi);
  }
  SUBCASE("bad grids rejected") {
    ZeroScore flat;
    CHECK_THROWS_AS(grid_min(flat, {1.0, 0.0, 5}), std::invalid_argument);
    CHECK_THROWS_AS(grid_min(flat, {0.0, 1.0, 1}), std::invalid_argument);
  }
}

TEST_CASE("alpha follows the sigma^2 / sigma_min^2 rule") {
  // one level, K=1: with the same stream, x1 = x0 - alpha*dx + sqrt(2 alpha) xi;
  // recover alpha from two known runs
  Quadratic quad(0.0);
  double x0 = 2.0;
  for (double smax : {0.2, 1.0}) {
    LangevinConfig cfg;
    cfg.schedule = NoiseSchedule({smax, 0.01});
    cfg.eps = 1e-4;
    cfg.steps = 1;
    double alpha1 = cfg.eps * smax * smax / (0.01 * 0.01);
    double alpha2 = cfg.eps;
    Rng probe(derive_seed(0, "none"));
    (void)probe;
    Rng stream(42);
    double xi1 = Rng(42).normal();
    double x1 = langevin_step(quad, x0, alpha1, stream);
    CHECK(x1 == doctest::Approx(x0 - alpha1 * x0 + std::sqrt(2 * alpha1) * xi1));
    double xi2 = stream.normal();
    Rng stream2(42);
    (void)stream2.normal();
    double x2 = langevin_step(quad, x1, alpha2, stream2);
    CHECK(x2 == doctest::Approx(x1 - alpha2 * x1 + std::sqrt(2 * alpha2) * xi2));
    CHECK(alpha1 / alpha2 == doctest::Approx(smax * smax / (0.01 * 0.01)));
  }
}
