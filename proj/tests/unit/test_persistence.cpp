#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracle/instances.hpp"
#include "ovn/persistence.hpp"

using namespace ovn;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ovn_persist_" + name)).string();
}

ErrorKind load_error(const std::string& text) {
  const std::string p = temp_path("bad.json");
  std::ofstream(p) << text;
  try {
    load_model(p);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "loaded: " << text;
  return ErrorKind::InvariantViolation;
}

SavedModel linear_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds = oracle::random_instance(rng, 15, 3, 3, true);
  SavedModel s;
  s.scaling = normalize_minmax(ds);
  Hyperparameters hp;
  s.model = fit_linear(ds, ConstraintMode::soft_w_hard_b(), hp);
  s.class_names = ds.class_names;
  s.feature_names = ds.feature_names;
  return s;
}

}  // namespace

TEST(Persistence, LinearRoundTrip) {
  const SavedModel s = linear_model(1);
  const std::string p = temp_path("linear.json");
  save_model(s, p);
  const SavedModel back = load_model(p);
  const auto& a = std::get<TrainedLinearModel>(s.model);
  const auto& b = std::get<TrainedLinearModel>(back.model);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.hp, b.hp);
  EXPECT_EQ(back.mode(), s.mode());
  EXPECT_EQ(back.scaling->offset, s.scaling->offset);
  EXPECT_EQ(back.scaling->scale, s.scaling->scale);
  EXPECT_EQ(back.class_names, s.class_names);
  EXPECT_EQ(back.diagnostics().iterations_used, s.diagnostics().iterations_used);
  EXPECT_EQ(back.diagnostics().final_objective, s.diagnostics().final_objective);
  std::remove(p.c_str());
}

TEST(Persistence, KernelRoundTripPredictsBitIdentically) {
  std::mt19937_64 rng(2);
  const Dataset ds = oracle::random_instance(rng, 12, 2, 3);
  SavedModel s;
  s.task = Task::multiclass;
  Hyperparameters hp;
  s.model = fit_kernel(ds, KernelSpec::gaussian(0.7), kAllModes[2], hp);
  s.class_names = ds.class_names;
  s.feature_names = ds.feature_names;
  const std::string p = temp_path("kernel.json");
  save_model(s, p);
  const SavedModel back = load_model(p);
  EXPECT_TRUE(back.is_kernel());
  EXPECT_EQ(back.task, Task::multiclass);
  const Matrix test = oracle::random_instance(rng, 10, 2, 3).features;
  const Matrix sa = s.scores(test), sb = back.scores(test);
  EXPECT_EQ(0, std::memcmp(sa.data(), sb.data(), sizeof(double) * static_cast<std::size_t>(sa.size())));
  EXPECT_EQ(s.predict(test), back.predict(test));
  std::remove(p.c_str());
}

TEST(Persistence, Errors) {
  const auto doc = model_to_json(linear_model(3));
  auto v99 = doc;
  v99["format_version"] = 99;
  EXPECT_EQ(load_error(v99.dump()), ErrorKind::UnsupportedVersion);

  const std::string text = doc.dump();
  EXPECT_EQ(load_error(text.substr(0, text.size() / 2)), ErrorKind::ParseError);
  EXPECT_EQ(load_error("[]"), ErrorKind::ParseError);

  auto missing = doc;
  missing.erase("W");
  EXPECT_EQ(load_error(missing.dump()), ErrorKind::ParseError);

  auto shape = doc;
  shape["W"][0].push_back(1.0);
  EXPECT_EQ(load_error(shape.dump()), ErrorKind::ParseError);

  auto broken = doc;
  broken["b"][0] = broken["b"][0].get<double>() + 1.0;
  EXPECT_EQ(load_error(broken.dump()), ErrorKind::InvariantViolation);

  try {
    load_model(temp_path("does_not_exist.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}

TEST(Persistence, NonFiniteDiagnosticsSurvive) {
  SavedModel s = linear_model(4);
  std::get<TrainedLinearModel>(s.model).diagnostics.kkt_residual = std::nan("");
  const SavedModel back = model_from_json(nlohmann::json::parse(model_to_json(s).dump()));
  EXPECT_TRUE(std::isnan(back.diagnostics().kkt_residual));
}

TEST(Persistence, GridDocument) {
  const auto g = grid_from_json(nlohmann::json::parse(
      R"({"thetas":[0.5],"betas":[1,10],"sigmas":[2],"kernel":"gaussian","modes":["hw-hb","sw-sb"],"n_folds":4})"));
  EXPECT_EQ(g.alphas, (std::vector<double>{0.5}));
  EXPECT_EQ(g.betas, (std::vector<double>{1, 10}));
  EXPECT_EQ(g.modes.size(), 2u);
  EXPECT_EQ(g.n_folds, 4);
  EXPECT_THROW(grid_from_json(nlohmann::json::parse(R"({"betas":"x"})")), Error);
  EXPECT_THROW(grid_from_json(nlohmann::json::parse(R"({"modes":["xx-yy"]})")), Error);
}
