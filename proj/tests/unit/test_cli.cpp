#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef OVN_CLI
#error "OVN_CLI must name the ovn executable"
#endif

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ovn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `ovn args`, with stdout and stderr captured to files.
  int run(const std::string& args) {
    const std::string cmd = std::string(OVN_CLI) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name));
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UnseenCombinationEndToEnd) {
  ASSERT_EQ(run("synth --kind unseen_label_toy --seed 7 --out " + path("toy.csv")), 0) << slurp("stderr");
  ASSERT_TRUE(fs::exists(path("toy.test.csv")));
  ASSERT_EQ(run("train --data " + path("toy.csv") + " --mode sw-hb --model-out " + path("m.json")), 0)
      << slurp("stderr");
  ASSERT_EQ(run("predict --model " + path("m.json") + " --data " + path("toy.test.csv") + " --out " + path("p.csv")),
            0)
      << slurp("stderr");
  std::istringstream pred(slurp("p.csv"));
  std::string header, first;
  std::getline(pred, header);
  std::getline(pred, first);
  EXPECT_EQ(header, "index,score:c1,score:c2,labels");
  EXPECT_EQ(first.substr(0, 2), "0,");
  EXPECT_EQ(first.substr(first.rfind(',') + 1), "01") << first;
}

TEST_F(Cli, EvaluateIdenticalFiles) {
  ASSERT_EQ(run("synth --kind moon --seed 1 --out " + path("moon.csv")), 0);
  ASSERT_EQ(run("evaluate --pred " + path("moon.csv") + " --truth " + path("moon.csv") + " --json-out " +
                path("e.json")),
            0)
      << slurp("stderr");
  const std::string out = slurp("stdout");
  EXPECT_NE(out.find("accuracy     1.000000"), std::string::npos) << out;
  EXPECT_NE(out.find("hamming_loss 0.000000"), std::string::npos) << out;
  EXPECT_NE(slurp("e.json").find("\"accuracy\": 1.0"), std::string::npos);
}

TEST_F(Cli, IndefiniteAlphaExitsWithSolverCode) {
  ASSERT_EQ(run("synth --kind hourglass --seed 1 --out " + path("h.csv")), 0);
  EXPECT_EQ(run("train --data " + path("h.csv") + " --mode sw-hb --alpha 5 --model-out " + path("m.json")), 4);
  EXPECT_NE(slurp("stderr").find("HessianNotPD"), std::string::npos) << slurp("stderr");
}

TEST_F(Cli, KernelTrainPredictBoundaryAndCv) {
  ASSERT_EQ(run("synth --kind hourglass --seed 1 --out " + path("h.csv")), 0);
  ASSERT_EQ(run("train --data " + path("h.csv") + " --task multiclass --solver kernel --kernel gaussian --sigma 0.5 "
                "--model-out " + path("k.json")),
            0)
      << slurp("stderr");
  ASSERT_EQ(run("predict --model " + path("k.json") + " --data " + path("h.csv") + " --out " + path("p.csv") +
                " --dump-boundary " + path("b.csv") + " --grid-steps 5"),
            0)
      << slurp("stderr");
  EXPECT_EQ(run("evaluate --pred " + path("p.csv") + " --truth " + path("h.csv")), 0);
  EXPECT_NE(slurp("stdout").find("accuracy     1.000000"), std::string::npos) << slurp("stdout");

  std::ofstream(path("grid.json")) << R"({"thetas":[0.5],"betas":[1,10],"sigmas":[0.5,1]})";
  ASSERT_EQ(run("cv --data " + path("h.csv") + " --solver kernel --grid " + path("grid.json") + " --threads 1 " +
                "--json-out " + path("cv.json")),
            0)
      << slurp("stderr");
  EXPECT_NE(slurp("stdout").find("best:"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("cv.json")));
}

TEST_F(Cli, UsageAndDataErrors) {
  EXPECT_EQ(run("synth --kind spiral --out " + path("x.csv")), 2);
  EXPECT_EQ(run("train --data " + path("missing.csv") + " --model-out " + path("m.json")), 3);
  EXPECT_NE(slurp("stderr").find("IoError"), std::string::npos);
  EXPECT_EQ(run("frobnicate"), 2);
  std::ofstream(path("bad.csv")) << "f1,f2,label:a\n1,x,1\n";
  EXPECT_EQ(run("train --data " + path("bad.csv") + " --model-out " + path("m.json")), 3);
  EXPECT_NE(slurp("stderr").find("MalformedCsv"), std::string::npos);
}
