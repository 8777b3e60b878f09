#include <gtest/gtest.h>

#include <set>

#include "oracle/instances.hpp"
#include "ovn/model_selection.hpp"
#include "ovn/synth.hpp"

using namespace ovn;

TEST(KFold, BalancedDisjointCover) {
  const auto f = kfold_split(6, 3, 1);
  ASSERT_EQ(f.size(), 3u);
  std::set<Index> all;
  for (const auto& fold : f) {
    EXPECT_EQ(fold.size(), 2u);
    all.insert(fold.begin(), fold.end());
  }
  EXPECT_EQ(all.size(), 6u);

  const auto g = kfold_split(7, 3, 1);
  EXPECT_EQ(g[0].size(), 3u);
  EXPECT_EQ(g[1].size(), 2u);
  EXPECT_EQ(g[2].size(), 2u);
  EXPECT_EQ(kfold_split(7, 3, 1), g);
  EXPECT_NE(kfold_split(50, 3, 1), kfold_split(50, 3, 2));
}

TEST(KFold, Errors) {
  EXPECT_THROW(kfold_split(2, 3, 0), Error);
  EXPECT_THROW(kfold_split(10, 1, 0), Error);
}

TEST(Grid, ExpansionOrderAndPinnedParameters) {
  GridSpec g;
  g.alphas = {0.0, 1.0};
  g.betas = {1.0, 10.0};
  g.gammas = {0.5, 2.0};
  g.modes = {ConstraintMode::hard_w_hard_b(), kAllModes[0]};
  const auto t = expand_grid(g, SolverKind::linear);
  // hw-hb: alpha and gamma collapse; sw-sb: full product.
  ASSERT_EQ(t.size(), 2u + 8u);
  EXPECT_EQ(t[0].mode, ConstraintMode::hard_w_hard_b());
  EXPECT_DOUBLE_EQ(t[1].hp.beta, 10.0);
  EXPECT_DOUBLE_EQ(t[2].hp.alpha, 0.0);
  EXPECT_DOUBLE_EQ(t[2].hp.gamma, 0.5);
  EXPECT_DOUBLE_EQ(t[3].hp.gamma, 2.0);
  EXPECT_DOUBLE_EQ(t[4].hp.beta, 10.0);

  g.kernel = KernelKind::gaussian;
  g.sigmas = {0.5, 1.0, 2.0};
  EXPECT_EQ(expand_grid(g, SolverKind::kernel).size(), 30u);
  g.betas = {};
  EXPECT_THROW(expand_grid(g, SolverKind::kernel), Error);
}

TEST(GridSearch, SingleTupleUsesAllFolds) {
  std::mt19937_64 rng(1);
  const Dataset ds = oracle::random_instance(rng, 30, 2, 3);
  GridSpec g;
  g.alphas = {0.5};
  g.betas = {1.0};
  g.gammas = {1.0};
  const auto r = grid_search_cv(ds, g, {Task::multiclass, SolverKind::linear, false, 1});
  ASSERT_EQ(r.tuples.size(), 1u);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.tuples[0].folds.size(), 3u);
  double mean = 0.0;
  for (const auto& f : r.tuples[0].folds) mean += f.accuracy / 3.0;
  EXPECT_NEAR(r.best_mean_accuracy, mean, 1e-15);
  EXPECT_DOUBLE_EQ(r.best_tuple.hp.alpha, 0.5);
}

TEST(GridSearch, IndefiniteTupleIsSkipped) {
  std::mt19937_64 rng(2);
  const Dataset ds = oracle::random_instance(rng, 24, 2, 3);
  GridSpec g;
  g.alphas = {-3.0, 0.5};
  g.betas = {1.0};
  const auto r = grid_search_cv(ds, g, {Task::multiclass, SolverKind::linear, false, 1});
  ASSERT_EQ(r.tuples.size(), 2u);
  EXPECT_TRUE(r.tuples[0].infeasible);
  EXPECT_NE(r.tuples[0].reason.find("HessianNotPD"), std::string::npos) << r.tuples[0].reason;
  EXPECT_FALSE(r.tuples[1].infeasible);
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_EQ(r.feasible_count(), 1u);

  g.alphas = {-3.0};
  try {
    grid_search_cv(ds, g, {Task::multiclass, SolverKind::linear, false, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllTuplesInfeasible);
  }
}

TEST(GridSearch, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(3);
  const Dataset ds = oracle::random_instance(rng, 30, 2, 3, true);
  GridSpec g;
  g.alphas = {0.0, 0.5};
  g.betas = {1.0, 10.0};
  g.sigmas = {0.5, 1.0};
  g.base.max_iters = 100;
  const auto a = grid_search_cv(ds, g, {Task::multilabel, SolverKind::kernel, false, 1});
  const auto b = grid_search_cv(ds, g, {Task::multilabel, SolverKind::kernel, false, 3});
  ASSERT_EQ(a.tuples.size(), b.tuples.size());
  for (std::size_t t = 0; t < a.tuples.size(); ++t) EXPECT_EQ(a.tuples[t].mean_accuracy, b.tuples[t].mean_accuracy);
  EXPECT_EQ(a.best_index, b.best_index);
}

TEST(OneVsRest, UnseenCombinationNeverPredicted) {
  const auto d = synth_generate({SynthKind::unseen_label_toy, 10, 0.05, 0});
  Hyperparameters hp;
  hp.beta = 1.0;
  const OvrModel m = ovr_baseline_fit(d.train, hp);
  // c1 labels every training pattern, so its machine degenerates to a constant.
  EXPECT_EQ(m.untrainable(), (std::vector<int>{0}));
  const auto pred = ovr_predict(m.scores(d.test->features), Task::multilabel);
  for (const auto& p : pred) EXPECT_NE(p, (LabelSet{1}));
  EXPECT_NE(pred[0], d.test->label_set(0));
}

TEST(OneVsRest, TwoClassMirror) {
  const Dataset ds = synth_generate({SynthKind::random_two_class, 15, 0.0, 4}).train;
  Hyperparameters hp;
  hp.beta = 2.0;
  const OvrModel m = ovr_baseline_fit(ds, hp);
  const Matrix s = m.scores(ds.features);
  EXPECT_LT((s.col(0) + s.col(1)).cwiseAbs().maxCoeff(), 1e-6);
}
