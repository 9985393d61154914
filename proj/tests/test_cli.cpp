#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oxytrees/oxytrees.hpp"

namespace oxytrees {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(OXYTREES_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oxytrees_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run_cli("gen --kind planted --n1 36 --n2 30 --seed 3 --out-dir " + dir_.string()).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string data_flags() const {
    return "--x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv") + " --y " + path("y.tsv");
  }

  fs::path dir_;
};

TEST_F(Cli, GenWritesConsistentDataset) {
  const auto d = load_dataset(path("x1.tsv"), path("x2.tsv"), path("y.tsv"));
  EXPECT_EQ(d.y.rows(), 36u);
  EXPECT_EQ(d.y.cols(), 30u);
  EXPECT_EQ(d.x1.cols(), 8u);
}

TEST_F(Cli, FitWritesModelWithRequestedTrees) {
  ASSERT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + " --trees 10 --seed 7").code, 0);
  const auto forest = load_forest(path("m.json"));
  EXPECT_EQ(forest.n_trees(), 10u);
  EXPECT_EQ(forest.seed, 7u);
}

TEST_F(Cli, MissingRequiredFlagIsUsageError) {
  EXPECT_EQ(run_cli("fit --x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv") + " --out " + path("m.json") +
                    " --seed 7")
                .code,
            1);
  EXPECT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json")).code, 1);
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + " --seed 1 --leaf other").code, 1);
}

TEST_F(Cli, RefitIsByteIdentical) {
  const std::string flags = data_flags() + " --trees 6 --seed 11";
  ASSERT_EQ(run_cli("fit " + flags + " --out " + path("a.json")).code, 0);
  ASSERT_EQ(run_cli("fit " + flags + " --out " + path("b.json") + " --threads 4").code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, ThreadsFromEnvironment) {
  const std::string flags = data_flags() + " --trees 4 --seed 2";
  ASSERT_EQ(run_cli("fit " + flags + " --out " + path("a.json")).code, 0);
  ASSERT_EQ(run_cli("fit " + flags + " --out " + path("b.json")).code, 0);
  EXPECT_EQ(::setenv("OXYFOREST_THREADS", "3", 1), 0);
  const int ok = run_cli("fit " + flags + " --out " + path("c.json")).code;
  ::setenv("OXYFOREST_THREADS", "zero", 1);
  const int bad = run_cli("fit " + flags + " --out " + path("d.json")).code;
  ::unsetenv("OXYFOREST_THREADS");
  EXPECT_EQ(ok, 0);
  EXPECT_EQ(bad, 1);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("c.json")));
}

TEST_F(Cli, PredictMatchesInMemoryForest) {
  ASSERT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + " --trees 5 --seed 4").code, 0);
  const auto r = run_cli("predict --model " + path("m.json") + " --x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv"));
  ASSERT_EQ(r.code, 0);
  const auto d = load_dataset(path("x1.tsv"), path("x2.tsv"), path("y.tsv"));
  ForestParams p;
  p.n_trees = 5;
  const Matrix expect = predict_forest(fit_forest(d, p, 4), d.x1, d.x2);
  std::istringstream in(r.out);
  const Matrix got = read_matrix(in);
  ASSERT_EQ(got.rows(), expect.rows());
  ASSERT_EQ(got.cols(), expect.cols());
  for (Index e = 0; e < got.size(); ++e) EXPECT_EQ(got.values()[e], expect.values()[e]);
}

TEST_F(Cli, PredictSingleLeafMeanModelIsConstant) {
  const std::string flags = " --trees 1 --leaf mean --min-rows 100 --min-cols 100 --seed 1";
  ASSERT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + flags).code, 0);
  ASSERT_EQ(run_cli("predict --model " + path("m.json") + " --x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv") +
                    " --out " + path("p.tsv"))
                .code,
            0);
  const Matrix p = read_matrix_file(path("p.tsv"));
  const Matrix y = read_matrix_file(path("y.tsv"));
  double mean = 0.0;
  for (double v : y.values()) mean += v;
  mean /= static_cast<double>(y.size());
  for (double v : p.values()) EXPECT_NEAR(v, mean, 1e-12);
}

TEST_F(Cli, PredictEmptyTestSet) {
  ASSERT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + " --trees 2 --seed 1").code, 0);
  { std::ofstream(path("empty.tsv")); }
  const auto r = run_cli("predict --model " + path("m.json") + " --x1 " + path("empty.tsv") + " --x2 " + path("x2.tsv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, PredictErrors) {
  ASSERT_EQ(run_cli("fit " + data_flags() + " --out " + path("m.json") + " --trees 2 --seed 1").code, 0);
  EXPECT_EQ(run_cli("predict --model " + path("missing.json") + " --x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv")).code,
            2);
  EXPECT_EQ(run_cli("predict --model " + path("m.json") + " --x1 " + path("y.tsv") + " --x2 " + path("x2.tsv")).code, 1);
  EXPECT_EQ(run_cli("predict --model " + path("m.json") + " --x1 " + path("x1.tsv") + " --x2 " + path("x2.tsv") +
                    " --out /nonexistent/dir/p.tsv")
                .code,
            2);
}

TEST_F(Cli, MissingInputFileIsIoError) {
  EXPECT_EQ(run_cli("fit --x1 " + path("nope.tsv") + " --x2 " + path("x2.tsv") + " --y " + path("y.tsv") + " --out " +
                    path("m.json") + " --seed 1")
                .code,
            2);
}

TEST_F(Cli, ConfigFileMergesUnderFlags) {
  {
    std::ofstream(path("c.json")) << R"({"trees": 3, "leaf": "mean", "seed": 5})";
  }
  ASSERT_EQ(run_cli("fit --config " + path("c.json") + " " + data_flags() + " --out " + path("m.json") + " --trees 2").code, 0);
  const auto forest = load_forest(path("m.json"));
  EXPECT_EQ(forest.n_trees(), 2u);
  EXPECT_EQ(forest.seed, 5u);
  EXPECT_EQ(forest.params.tree.leaf, LeafKind::Mean);
  { std::ofstream(path("bad.json")) << "[1, 2]"; }
  EXPECT_EQ(run_cli("fit --config " + path("bad.json") + " " + data_flags() + " --out " + path("m.json")).code, 1);
}

TEST_F(Cli, CvReportCounts) {
  const auto r = run_cli("cv " + data_flags() + " --k1 2 --k2 2 --pmp 0,0.5 --trees 4 --seed 1 --json " + path("cv.json"));
  ASSERT_EQ(r.code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 1u + 2 * 4 * 4 * 2);
  EXPECT_EQ(rows[0], "setting\tfold\tpmp\tmetric\tvalue");
  Index defined = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) defined += rows[k].find("\tNA") == std::string::npos;
  EXPECT_GE(defined, 2u * 4 * 3 * 2);
  std::ifstream in(path("cv.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("entries").size(), 2u * 4 * 4 * 2);
  EXPECT_EQ(j.at("metadata").at("seed"), "1");
}

TEST_F(Cli, SweepLeafRows) {
  const auto r = run_cli("sweep-leaf " + data_flags() + " --dims 2,6 --settings TT --trees 3 --seed 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 1u + 2 * 2 * 2);
}

TEST_F(Cli, SweepTreesEstimateWithinBound) {
  const auto r = run_cli("sweep-trees " + data_flags() + " --trees 50 --repeats 10 --seed 1 --json " + path("t.json"));
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path("t.json"));
  const auto j = nlohmann::json::parse(in);
  ASSERT_FALSE(j.at("mean_expected_trees").is_null());
  EXPECT_GE(j.at("mean_expected_trees").get<double>(), 1.0);
  EXPECT_LE(j.at("mean_expected_trees").get<double>(), 50.0);
}

TEST_F(Cli, BenchRowsPerMethod) {
  const auto r = run_cli("bench --sizes 8,16,24 --repeats 1 --seed 1 --json " + path("b.json"));
  ASSERT_EQ(r.code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 1u + 3 * 3);
  for (const char* m : {"proxy", "naive", "deep"}) {
    Index n = 0;
    for (const auto& l : rows) n += l.rfind(std::string(m) + "\t", 0) == 0;
    EXPECT_EQ(n, 3u) << m;
  }
  std::ifstream in(path("b.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j.at("series")[0].contains("slope"));
  EXPECT_EQ(run_cli("bench --kind inference --sizes 16,32 --n-test 16 --repeats 1 --seed 1").code, 0);
  EXPECT_EQ(run_cli("bench --sizes 16,8 --seed 1").code, 1);
}

}  // namespace
}  // namespace oxytrees
