#include <gtest/gtest.h>

#include "ovn/linear_solver.hpp"
#include "ovn/predict.hpp"
#include "ovn/synth.hpp"

using namespace ovn;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

}  // namespace

TEST(Predict, MultilabelThresholdInclusive) {
  EXPECT_EQ(predict_multilabel(v({1.2, 0.3, 1.0})), (LabelSet{0, 2}));
  EXPECT_EQ(predict_multilabel(v({0.2, 0.9})), (LabelSet{1}));
  EXPECT_EQ(predict_multilabel(v({-0.5, 0.2}), 0.0), (LabelSet{1}));
}

TEST(Predict, MulticlassArgmaxLowestIndexOnTies) {
  EXPECT_EQ(predict_multiclass(v({0.1, 0.9, 0.3})), 1);
  EXPECT_EQ(predict_multiclass(v({0.5, 0.5})), 0);
  EXPECT_EQ(predict_multiclass(v({-7.0})), 0);
  EXPECT_THROW(predict_multiclass(Vector(0)), Error);
}

TEST(Predict, LabelSetsPerTask) {
  Matrix s(2, 3);
  s << 1.5, 2.0, -1, 0.1, 0.2, 0.3;
  EXPECT_EQ(predict_label_sets(s, Task::multilabel), (std::vector<LabelSet>{{0, 1}, {2}}));
  EXPECT_EQ(predict_label_sets(s, Task::multiclass), (std::vector<LabelSet>{{1}, {2}}));
  EXPECT_EQ(parse_task("multilabel"), Task::multilabel);
  EXPECT_THROW(parse_task("ranking"), Error);
}

TEST(Predict, Bitstrings) {
  EXPECT_EQ(to_bitstring({0, 2}, 4), "1010");
  EXPECT_EQ(from_bitstring("0110"), (LabelSet{1, 2}));
  EXPECT_THROW(from_bitstring("01x"), Error);
}

TEST(Predict, UnseenCombinationAssigned) {
  const auto d = synth_generate({SynthKind::unseen_label_toy, 10, 0.05, 7});
  Hyperparameters hp;
  hp.alpha = 0.5;
  hp.beta = 1.0;
  const auto m = fit_linear(d.train, ConstraintMode::soft_w_hard_b(), hp);
  const auto pred = predict_label_sets(m.scores(d.test->features), Task::multilabel);
  EXPECT_EQ(pred[0], (LabelSet{1}));
}

TEST(Metrics, Examples) {
  auto r = evaluate({{0}}, {{0, 1}}, 6);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_NEAR(r.hamming_loss, 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.exact_match, 0.0);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);

  r = evaluate({{0}, {1, 2}}, {{0}, {2, 1}}, 3);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.hamming_loss, 0.0);
  EXPECT_DOUBLE_EQ(r.exact_match, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);

  r = evaluate({{0}}, {{1}}, 2);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(r.hamming_loss, 1.0);
  EXPECT_DOUBLE_EQ(r.exact_match, 0.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.0);

  r = evaluate({{}}, {{}}, 2);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(Metrics, Errors) {
  try {
    evaluate({{0}}, {{0}, {1}}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
  EXPECT_THROW(evaluate({{5}}, {{0}}, 2), Error);
}
