#include <gtest/gtest.h>

#include <random>

#include "oracle/instances.hpp"
#include "oracle/subgradient.hpp"
#include "ovn/linear_solver.hpp"

using namespace ovn;

TEST(Oracle, TwoPointBinarySvm) {
  const Dataset ds = oracle::two_points();
  Vector y(2);
  y << 1, -1;
  // Large C pushes both points onto the margin: w = 1, b = 0.
  const auto r = oracle::binary_svm_fit(ds.features, y, 50.0, 100000);
  EXPECT_NEAR(r.w(0), 1.0, 1e-2);
  EXPECT_NEAR(r.b, 0.0, 1e-2);
}

TEST(Oracle, SubgradientTwoPoint) {
  Hyperparameters hp;
  hp.beta = 100.0;
  const auto r = oracle::subgradient_fit(oracle::two_points(), ConstraintMode::hard_w_hard_b(), hp, 100000);
  EXPECT_NEAR(r.W(0, 0), 1.0, 1e-2);
  EXPECT_NEAR(r.W(1, 0), -1.0, 1e-2);
  EXPECT_NEAR(r.b(0), 0.0, 1e-2);
}

TEST(Oracle, NeverBeatsMajorization) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 4; ++t) {
    const auto& mode = kAllModes[t];
    const Dataset ds = oracle::random_instance(rng, 12, 2, 3, t % 2 == 0);
    Hyperparameters hp;
    hp.beta = 1.0;
    hp.tol = 1e-12;
    hp.max_iters = 2000;
    const auto mm = fit_linear(ds, mode, hp);
    const auto sg = oracle::subgradient_fit(ds, mode, hp, 40000);
    const double mine = oracle::objective(ds, mm.W, mm.b, mode, hp);
    EXPECT_GE(sg.objective, mine - 1e-3 * std::abs(mine)) << mode.name();
    EXPECT_NEAR(mine, objective(ds, mm.W, mm.b, mode, hp), 1e-10 * mine);
  }
}

TEST(Oracle, ZeroHingeWeightGivesZero) {
  std::mt19937_64 rng(12);
  const Dataset ds = oracle::random_instance(rng, 8, 2, 2);
  Hyperparameters hp;
  hp.beta = 0.0;
  hp.alpha = 0.5;
  const auto r = oracle::subgradient_fit(ds, kAllModes[0], hp, 2000);
  EXPECT_LT(r.W.norm(), 1e-12);
  EXPECT_LT(r.b.norm(), 1e-12);
}

TEST(Oracle, CompareIdenticalIsZero) {
  std::mt19937_64 rng(13);
  const Dataset ds = oracle::random_instance(rng, 8, 2, 2);
  const auto m = fit_linear(ds, ConstraintMode::soft_w_hard_b(), Hyperparameters{});
  const auto c = oracle::compare(m.W, m.b, m.W, m.b, ds, m.mode, m.hp);
  EXPECT_EQ(c.objective_gap, 0.0);
  EXPECT_EQ(c.max_score_deviation, 0.0);
}
