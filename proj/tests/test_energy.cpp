#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scoretr/energy.hpp"
#include "scoretr/rng.hpp"

using namespace scoretr;

namespace {

EnergyConfig small_config(Variant variant, Dims dims, int rank, std::uint64_t seed) {
  EnergyConfig cfg;
  cfg.variant = variant;
  cfg.dims = std::move(dims);
  cfg.rank = rank;
  cfg.hidden = {6, 6};
  cfg.seed = seed;
  return cfg;
}

double tape_energy(EnergyModel& m, const MultiIndex& idx, double x,
                   std::optional<double> t = std::nullopt) {
  Tape tape;
  m.begin_batch(tape);
  m.begin_entry(tape, idx, t);
  DVar e = m.energy(tape, dual(tape.leaf(x)));
  return tape.value(e.v);
}

double tape_energy_dx(EnergyModel& m, const MultiIndex& idx, double x,
                      std::optional<double> t = std::nullopt) {
  Tape tape;
  m.begin_batch(tape);
  m.begin_entry(tape, idx, t);
  DVar e = m.energy(tape, seeded_input(tape, x));
  return tape.value(e.t);
}

}  // namespace

TEST_CASE("tabular factor nodes are the gathered rows") {
  EnergyModel m(small_config(Variant::Tabular, {2, 3}, 2, 1));
  m.factors().mode(0) << 1, 2, 9, 9;
  m.factors().mode(1) << 8, 8, 3, 4, 8, 8;
  Tape tape;
  m.begin_batch(tape);
  auto z = m.factor_nodes(tape, MultiIndex{0, 1});
  REQUIRE(z.size() == 4);
  CHECK(tape.value(z[0].v) == 1);
  CHECK(tape.value(z[1].v) == 2);
  CHECK(tape.value(z[2].v) == 3);
  CHECK(tape.value(z[3].v) == 4);

  auto z2 = m.factor_nodes(tape, MultiIndex{0, 1});
  for (std::size_t k = 0; k < 4; ++k) CHECK(tape.value(z2[k].v) == tape.value(z[k].v));

  CHECK_THROWS_AS(m.factor_nodes(tape, MultiIndex{0, 5}), std::out_of_range);
}

TEST_CASE("implicit factor source") {
  EnergyConfig cfg = small_config(Variant::Implicit, {4, 4}, 4, 2);
  EnergyModel m(cfg);
  CHECK_THROWS_AS(m.factors(), std::invalid_argument);

  // numeric embedding and recorded nodes agree
  Tape tape;
  m.begin_batch(tape);
  auto z = m.factor_nodes(tape, MultiIndex{1, 3});
  Eigen::VectorXd zn = m.factor_vector(MultiIndex{1, 3});
  REQUIRE(static_cast<int>(z.size()) == zn.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    CHECK(tape.value(z[k].v) == doctest::Approx(zn[static_cast<Eigen::Index>(k)]).epsilon(1e-14));

  // determinism
  Eigen::VectorXd zn2 = m.factor_vector(MultiIndex{1, 3});
  CHECK(zn == zn2);
}

TEST_CASE("all-zero head makes the energy the bias") {
  EnergyModel m(small_config(Variant::Tabular, {3, 3}, 2, 3));
  for (auto& p : m.named_params())
    if (p.name == "head.W") p.tensor->setZero();
  for (auto& p : m.named_params())
    if (p.name == "head.b") p.tensor->setConstant(0.625);
  for (double x : {-2.0, 0.0, 1.5})
    CHECK(tape_energy(m, {1, 2}, x) == doctest::Approx(0.625));
}

TEST_CASE("concat fusion head width is the sum of encoder widths") {
  EnergyConfig cfg = small_config(Variant::Tabular, {3, 3}, 2, 4);
  cfg.embed = 5;
  EnergyModel m(cfg);
  for (auto& p : m.named_params())
    if (p.name == "head.W") CHECK(p.tensor->cols() == 10);
}

TEST_CASE("hand-set pass-through stack realizes E(x,z) = x + sum z") {
  // softplus(a) - softplus(-a) = a lets an affine map pass the hidden layer
  EnergyConfig cfg = small_config(Variant::Tabular, {2, 2, 2}, 1, 5);
  cfg.hidden = {6};
  cfg.embed = 1;
  EnergyModel m(cfg);
  for (std::size_t d = 0; d < 3; ++d) m.factors().mode(d).setOnes();
  for (auto& p : m.named_params()) {
    if (p.name == "g3.l0.W") {
      p.tensor->setZero();
      (*p.tensor)(0, 0) = 1.0;
      (*p.tensor)(1, 0) = -1.0;
    } else if (p.name == "g4.l0.W") {
      p.tensor->setZero();
      for (int k = 0; k < 3; ++k) {
        (*p.tensor)(2 * k, k) = 1.0;
        (*p.tensor)(2 * k + 1, k) = -1.0;
      }
    } else if (p.name == "g3.l1.W") {
      p.tensor->setZero();
      (*p.tensor)(0, 0) = 1.0;
      (*p.tensor)(0, 1) = -1.0;
    } else if (p.name == "g4.l1.W") {
      for (int k = 0; k < 6; ++k) (*p.tensor)(0, k) = (k % 2 == 0) ? 1.0 : -1.0;
    } else if (p.name == "head.W") {
      p.tensor->setOnes();
    } else if (p.name.find(".b") != std::string::npos || p.name == "head.b") {
      p.tensor->setZero();
    }
  }
  CHECK(tape_energy(m, {0, 0, 0}, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(tape_energy_dx(m, {0, 0, 0}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-set linear energy has constant input derivative") {
  EnergyConfig cfg = small_config(Variant::Tabular, {2, 2}, 1, 6);
  cfg.hidden = {2};
  cfg.embed = 1;
  EnergyModel m(cfg);
  double w = -1.75;
  for (auto& p : m.named_params()) {
    if (p.name == "g3.l0.W") {
      (*p.tensor)(0, 0) = 1.0;
      (*p.tensor)(1, 0) = -1.0;
    } else if (p.name == "g3.l1.W") {
      (*p.tensor)(0, 0) = w;
      (*p.tensor)(0, 1) = -w;
    } else if (p.name == "g4.l0.W" || p.name == "g4.l1.W") {
      p.tensor->setZero();
    } else if (p.name == "head.W") {
      p.tensor->setZero();
      (*p.tensor)(0, 0) = 1.0;
    } else if (p.name.find(".b") != std::string::npos) {
      p.tensor->setZero();
    }
  }
  for (double x : {-1.0, 0.2, 3.0})
    CHECK(tape_energy_dx(m, {0, 0}, x) == doctest::Approx(w).epsilon(1e-10));
}

TEST_CASE("score equals the finite difference of the energy in x") {
  Rng rng(100);
  EnergyModel tab(small_config(Variant::Tabular, {4, 5}, 3, 7));
  EnergyModel imp(small_config(Variant::Implicit, {4, 5}, 4, 8));
  EnergyConfig tcfg = small_config(Variant::Temporal, {4, 5}, 3, 9);
  EnergyModel tem(tcfg);

  for (int trial = 0; trial < 100; ++trial) {
    MultiIndex idx = {static_cast<std::uint32_t>(rng.below(4)),
                      static_cast<std::uint32_t>(rng.below(5))};
    double x = rng.normal();
    double h = 1e-5;
    EnergyModel* models[] = {&tab, &imp, &tem};
    for (int which = 0; which < 3; ++which) {
      std::optional<double> t;
      if (which == 2) t = rng.uniform();
      EnergyModel& m = *models[which];
      double fd = (tape_energy(m, idx, x + h, t) - tape_energy(m, idx, x - h, t)) / (2 * h);
      double an = tape_energy_dx(m, idx, x, t);
      CHECK(std::abs(an - fd) / std::max(1.0, std::abs(an)) < 1e-5);
    }
  }
}

TEST_CASE("parameter gradient of the score matches finite differences") {
  EnergyModel m(small_config(Variant::Tabular, {3, 3}, 2, 10));
  MultiIndex idx = {1, 2};
  double x = 0.4;

  auto params = m.named_params();
  auto score_value = [&]() { return tape_energy_dx(m, idx, x); };

  Tape tape;
  m.begin_batch(tape);
  m.begin_entry(tape, idx, std::nullopt);
  DVar e = m.energy(tape, seeded_input(tape, x));
  REQUIRE(e.has_tangent());
  m.zero_grads();
  tape.reverse(e.t);
  m.accumulate_gradients(tape, 1.0);

  Rng rng(55);
  double h = 1e-5;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd& w = *params[k].tensor;
    for (int probe = 0; probe < 3; ++probe) {
      Eigen::Index r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(w.rows())));
      Eigen::Index c = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(w.cols())));
      double saved = w(r, c);
      w(r, c) = saved + h;
      double up = score_value();
      w(r, c) = saved - h;
      double down = score_value();
      w(r, c) = saved;
      double fd = (up - down) / (2 * h);
      double an = m.grads()[k](r, c);
      CHECK(std::abs(an - fd) / std::max(1.0, std::abs(an)) < 1e-4);
    }
  }
}

TEST_CASE("entry evaluator matches the tape path") {
  Rng rng(77);
  EnergyModel tab(small_config(Variant::Tabular, {4, 4}, 3, 11));
  EnergyModel imp(small_config(Variant::Implicit, {4, 4}, 4, 12));
  EnergyModel tem(small_config(Variant::Temporal, {4, 4}, 3, 13));
  EnergyModel* models[] = {&tab, &imp, &tem};
  for (int which = 0; which < 3; ++which) {
    EnergyModel& m = *models[which];
    for (int trial = 0; trial < 10; ++trial) {
      MultiIndex idx = {static_cast<std::uint32_t>(rng.below(4)),
                        static_cast<std::uint32_t>(rng.below(4))};
      std::optional<double> t;
      if (which == 2) t = rng.uniform();
      auto eval = m.entry_evaluator(idx, t);
      double x = rng.normal();
      auto [ev, edx] = eval->energy_and_dx(x);
      CHECK(ev == doctest::Approx(tape_energy(m, idx, x, t)).epsilon(1e-12));
      CHECK(edx == doctest::Approx(tape_energy_dx(m, idx, x, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("variant argument contracts") {
  EnergyModel tab(small_config(Variant::Tabular, {3, 3}, 2, 14));
  EnergyModel tem(small_config(Variant::Temporal, {3, 3}, 2, 15));
  CHECK_THROWS_AS(tape_energy(tab, {0, 0}, 0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(tape_energy(tem, {0, 0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(tab.entry_evaluator(MultiIndex{9, 0}, std::nullopt), std::out_of_range);

  // smooth-term surface exists only on the implicit variant
  Tape tape;
  tab.begin_batch(tape);
  tab.begin_entry(tape, MultiIndex{0, 0}, std::nullopt);
  double noise[2] = {0.0, 0.0};
  CHECK_THROWS_AS(tab.perturbed_energy(tape, dual_constant(tape, 0.1), noise),
                  std::invalid_argument);
}

TEST_CASE("tabular and implicit variants are substitutable through the entry interface") {
  EnergyModel tab(small_config(Variant::Tabular, {4, 4}, 4, 16));
  EnergyModel imp(small_config(Variant::Implicit, {4, 4}, 4, 17));
  for (EnergyModel* m : {&tab, &imp}) {
    auto eval = m->entry_evaluator(MultiIndex{2, 1}, std::nullopt);
    CHECK(std::isfinite(eval->energy(0.3)));
    CHECK(std::isfinite(eval->energy_dx(0.3)));
  }
}

TEST_CASE("factor gradients flow through gathered coordinates only") {
  EnergyModel m(small_config(Variant::Tabular, {3, 3}, 2, 18));
  MultiIndex idx = {1, 2};
  Tape tape;
  m.begin_batch(tape);
  m.begin_entry(tape, idx, std::nullopt);
  DVar e = m.energy(tape, dual(tape.leaf(0.2)));
  m.zero_grads();
  tape.reverse(e.v);
  m.accumulate_gradients(tape, 1.0);

  auto params = m.named_params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].name == "factors.0") {
      CHECK(m.grads()[k].row(1).cwiseAbs().sum() > 0.0);
      CHECK(m.grads()[k].row(0).cwiseAbs().sum() == 0.0);
      CHECK(m.grads()[k].row(2).cwiseAbs().sum() == 0.0);
    }
    if (params[k].name == "factors.1") {
      CHECK(m.grads()[k].row(2).cwiseAbs().sum() > 0.0);
      CHECK(m.grads()[k].row(0).cwiseAbs().sum() == 0.0);
    }
  }
}
