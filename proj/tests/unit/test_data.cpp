#include <gtest/gtest.h>

#include <sstream>

#include "ovn/data.hpp"
#include "ovn/synth.hpp"

using namespace ovn;

namespace {

Dataset parse(const std::string& text, CsvOptions opt = {}) {
  std::istringstream in(text);
  return parse_csv(in, opt);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST(Csv, PrefixedLabelColumns) {
  const Dataset ds = parse("f1,f2,label:a,label:b\n1.0,2.0,1,0\n3,4,0,1\n5,6,1,1\n");
  EXPECT_EQ(ds.n(), 3);
  EXPECT_EQ(ds.m(), 2);
  EXPECT_EQ(ds.k(), 2);
  EXPECT_EQ(ds.labels(0, 0), 1);
  EXPECT_EQ(ds.labels(0, 1), 0);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"f1", "f2"}));
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 6.0);
}

TEST(Csv, CategoricalColumnIsOneHotInLexicographicOrder) {
  CsvOptions opt;
  opt.multiclass_column = "class";
  const Dataset ds = parse("x,class\n1,b\n2,a\n3,b\n", opt);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b"}));
  LabelMatrix want(3, 2);
  want << 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(ds.labels, want);

  const Dataset abc = parse("x,class\n1,a\n2,b\n3,a\n", opt);
  LabelMatrix want2(3, 2);
  want2 << 1, 0, 0, 1, 1, 0;
  EXPECT_EQ(abc.labels, want2);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  try {
    parse("f1,f2,label:a,label:b\n1.0,x,1,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedCsv);
    EXPECT_NE(std::string(e.what()).find("row 1, column f2"), std::string::npos) << e.what();
  }
}

TEST(Csv, Errors) {
  EXPECT_EQ(kind_of([] { parse("f1,label:a\n1,1,3\n"); }), ErrorKind::MalformedCsv);
  EXPECT_EQ(kind_of([] { parse("f1,f2\n1,2\n"); }), ErrorKind::NoLabels);
  EXPECT_EQ(kind_of([] { parse("f1,label:a,label:b\n1,1,0\n2,0,0\n"); }), ErrorKind::EmptyLabelRow);
  EXPECT_EQ(kind_of([] { parse("f1,label:a\n1,2\n"); }), ErrorKind::MalformedCsv);
  EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::MalformedCsv);
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv"); }), ErrorKind::IoError);
}

TEST(Csv, EmptyLabelRowReportsRowIndex) {
  try {
    parse("f1,label:a\n1,1\n2,1\n3,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, WriteThenLoadIsIdentity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1e3);
  Dataset ds;
  ds.features.resize(20, 3);
  for (Index i = 0; i < ds.features.size(); ++i) ds.features.data()[i] = g(rng) / 7.0;
  ds.features(0, 0) = 1e-300;
  ds.features(1, 1) = -0.0;
  ds.labels = LabelMatrix::Zero(20, 2);
  for (Index i = 0; i < 20; ++i) ds.labels(i, i % 2) = 1;
  ds.labels(4, 1) = 1;
  ds.class_names = {"u", "v"};
  ds.feature_names = {"a", "b", "c"};

  std::ostringstream out;
  write_csv(ds, out);
  std::istringstream in(out.str());
  const Dataset back = parse_csv(in);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.class_names, ds.class_names);
  EXPECT_EQ(back.feature_names, ds.feature_names);
}

TEST(Dataset, ValidateTraining) {
  Dataset ds = parse("f,label:a,label:b\n1,1,0\n2,1,0\n");
  EXPECT_EQ(kind_of([&] { ds.validate(true); }), ErrorKind::EmptyClass);
  EXPECT_NO_THROW(ds.validate(false));
}

TEST(Dataset, ClassMembersAndSubset) {
  const Dataset ds = parse("f,label:a,label:b\n1,1,0\n2,1,1\n3,0,1\n");
  const auto members = ds.class_members();
  EXPECT_EQ(members[0], (std::vector<Index>{0, 1}));
  EXPECT_EQ(members[1], (std::vector<Index>{1, 2}));
  const Dataset sub = ds.subset({2, 0});
  EXPECT_DOUBLE_EQ(sub.features(0, 0), 3.0);
  EXPECT_EQ(sub.label_set(0), (LabelSet{1}));
  EXPECT_EQ(ds.label_set(1), (LabelSet{0, 1}));
}

TEST(Augment, AppendsOne) {
  Vector x(2);
  x << 2, 3;
  EXPECT_EQ(augment(x).values, (Vector(3) << 2, 3, 1).finished());
  EXPECT_EQ(augment(Vector(0)).values, (Vector(1) << 1).finished());
  EXPECT_EQ(augment(Vector::Zero(3)).values, (Vector(4) << 0, 0, 0, 1).finished());
}

TEST(Normalize, MinMaxToUnitInterval) {
  Dataset ds = parse("f1,f2,f3,label:a\n1,10,5,1\n3,20,5,1\n2,30,5,1\n");
  const FeatureScaling s = normalize_minmax(ds);
  EXPECT_DOUBLE_EQ(ds.features.col(0).minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(ds.features.col(0).maxCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 1.0);
  EXPECT_TRUE((ds.features.col(2).array() == 0.0).all());
  Matrix raw(1, 3);
  raw << 2, 20, 5;
  EXPECT_DOUBLE_EQ(s.apply(raw)(0, 0), 0.5);
}

TEST(Synth, DeterministicForSeed) {
  for (SynthKind k : {SynthKind::hourglass, SynthKind::moon, SynthKind::random_two_class, SynthKind::unseen_label_toy,
                      SynthKind::symmetric_parallel}) {
    const auto a = synth_generate({k, 7, 0.1, 42});
    const auto b = synth_generate({k, 7, 0.1, 42});
    EXPECT_EQ(a.train.features, b.train.features) << to_string(k);
    EXPECT_EQ(a.train.labels, b.train.labels);
    EXPECT_NO_THROW(a.train.validate(true));
    const auto c = synth_generate({k, 7, 0.1, 43});
    EXPECT_NE(a.train.features, c.train.features) << to_string(k);
  }
}

TEST(Synth, UnseenLabelToy) {
  const auto d = synth_generate({SynthKind::unseen_label_toy, 10, 0.05, 7});
  ASSERT_TRUE(d.test.has_value());
  Matrix pts(6, 2);
  pts << -4, 3, -5, 2, -3, 3, -2, 4, 0, 3, 1, 5;
  EXPECT_EQ(d.test->features, pts);
  const std::vector<LabelSet> want{{1}, {1}, {1}, {0, 1}, {0}, {0, 1}};
  EXPECT_EQ(d.test->label_sets(), want);
  // Training carries only {c1} and {c1, c2}.
  for (Index i = 0; i < d.train.n(); ++i) {
    EXPECT_EQ(d.train.labels(i, 0), 1);
  }
  EXPECT_GT(d.train.labels.col(1).sum(), 0);
}

TEST(Synth, SymmetricParallelMirrors) {
  const Dataset d = synth_generate({SynthKind::symmetric_parallel, 6, 0.0, 11}).train;
  const Index half = d.n() / 2;
  for (Index i = 0; i < half; ++i) {
    EXPECT_EQ(d.labels.row(i), (Eigen::RowVector2i(1, 0)));
    EXPECT_EQ(d.labels.row(half + i), (Eigen::RowVector2i(0, 1)));
    EXPECT_EQ(d.features(half + i, 0), -d.features(i, 0));
    EXPECT_EQ(d.features(half + i, 1), d.features(i, 1));
  }
}

TEST(Synth, RejectsBadSpec) {
  EXPECT_EQ(kind_of([] { parse_synth_kind("spiral"); }), ErrorKind::UnknownKind);
  EXPECT_EQ(kind_of([] { synth_generate({SynthKind::moon, 0, 0.1, 1}); }), ErrorKind::InvalidArgument);
}
