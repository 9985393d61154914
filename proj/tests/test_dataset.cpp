#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "oxytrees/dataset.hpp"
#include "oxytrees/matrix_io.hpp"

namespace oxytrees {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("oxytrees_ds_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = (path_ / name).string();
    std::ofstream(p) << content;
    return p;
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

TEST(MatrixText, ParsesCommentsAndBlankLines) {
  std::istringstream in("# header comment\n1\t2.5\n\n-3\t4e-1\n");
  const Matrix m = read_matrix(in);
  EXPECT_EQ(m, (Matrix{{1, 2.5}, {-3, 0.4}}));
}

TEST(MatrixText, RaggedRowReportsLine) {
  std::istringstream in("1\t2\n3\n");
  try {
    read_matrix(in, "x.tsv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("x.tsv:2"), std::string::npos);
  }
}

TEST(MatrixText, RejectsGarbageAndNonFinite) {
  std::istringstream bad("1\tabc\n");
  EXPECT_THROW(read_matrix(bad), ParseError);
  std::istringstream inf("1\tinf\n");
  EXPECT_THROW(read_matrix(inf), ParseError);
  std::istringstream nan("nan\n");
  EXPECT_THROW(read_matrix(nan), ParseError);
}

TEST(MatrixText, EmptyInputIsEmptyMatrix) {
  std::istringstream in("# nothing\n\n");
  const Matrix m = read_matrix(in);
  EXPECT_EQ(m.rows(), 0u);
}

TEST(MatrixText, WriteReadRoundTripIsExact) {
  Rng rng(8);
  const Matrix m = oracle::random_matrix(7, 5, rng, -1e3, 1e3);
  std::stringstream s;
  write_matrix(s, m);
  EXPECT_EQ(read_matrix(s), m);
}

TEST(LoadDataset, ShapesFromFiles) {
  TempDir dir;
  const auto x1 = dir.file("x1.tsv", "1\t2\n3\t4\n5\t6\n");
  const auto x2 = dir.file("x2.tsv", "1\t0\n0\t1\n1\t1\n0\t0\n");
  const auto y = dir.file("y.tsv", "1\t0\t0\t1\n0\t0\t1\t0\n1\t1\t1\t1\n");
  const auto d = load_dataset(x1, x2, y);
  EXPECT_EQ(d.n_rows(), 3u);
  EXPECT_EQ(d.n_cols(), 4u);
  EXPECT_EQ(d.x1.cols(), 2u);
}

TEST(LoadDataset, NonBinaryLabelRejected) {
  TempDir dir;
  const auto x1 = dir.file("x1.tsv", "1\n2\n");
  const auto x2 = dir.file("x2.tsv", "1\n2\n");
  const auto y = dir.file("y.tsv", "0\t0.5\n1\t0\n");
  try {
    load_dataset(x1, x2, y);
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("non-binary label"), std::string::npos);
  }
}

TEST(LoadDataset, RowMismatchRejected) {
  TempDir dir;
  const auto x1 = dir.file("x1.tsv", "1\n2\n3\n");
  const auto x2 = dir.file("x2.tsv", "1\n2\n");
  const auto y = dir.file("y.tsv", "0\t1\n1\t0\n");
  EXPECT_THROW(load_dataset(x1, x2, y), DimensionError);
}

TEST(LoadDataset, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/a", "/nonexistent/b", "/nonexistent/c"), IoError);
}

TEST(LoadDataset, PrecomputedMustBeSquare) {
  BipartiteDataset d{Matrix(2, 3), Matrix(2, 2), Matrix(2, 2), true};
  EXPECT_THROW(d.validate(), DimensionError);
}

BipartiteDataset dataset_from_y(Matrix y) {
  BipartiteDataset d;
  d.x1 = Matrix(y.rows(), 1);
  d.x2 = Matrix(y.cols(), 1);
  d.y = std::move(y);
  return d;
}

TEST(StratifiedKfold, FourByFourTwoByTwo) {
  Rng rng(1);
  const auto d = dataset_from_y(oracle::random_binary(4, 4, rng));
  Rng split_rng(2);
  const auto splits = stratified_kfold(d, 2, 2, split_rng);
  ASSERT_EQ(splits.size(), 4u);
  std::set<std::pair<Index, Index>> cells;
  for (const auto& s : splits) {
    EXPECT_EQ(s.row_test.size(), 2u);
    EXPECT_EQ(s.col_test.size(), 2u);
    EXPECT_EQ(s.row_train.size(), 2u);
    cells.insert({s.row_fold, s.col_fold});
  }
  EXPECT_EQ(cells.size(), 4u);
}

TEST(StratifiedKfold, TrainTestPartitionEachDimension) {
  Rng rng(3);
  const auto d = dataset_from_y(oracle::random_binary(11, 7, rng));
  Rng split_rng(4);
  for (const auto& s : stratified_kfold(d, 3, 2, split_rng)) {
    std::vector<int> seen_r(11, 0), seen_c(7, 0);
    for (Index i : s.row_train) seen_r[i]++;
    for (Index i : s.row_test) seen_r[i]++;
    for (Index j : s.col_train) seen_c[j]++;
    for (Index j : s.col_test) seen_c[j]++;
    for (int v : seen_r) EXPECT_EQ(v, 1);
    for (int v : seen_c) EXPECT_EQ(v, 1);
  }
}

TEST(StratifiedKfold, FoldSizesDifferByAtMostOne) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n1 = 2 + rng.below(30), n2 = 2 + rng.below(30);
    const Index k1 = 2 + rng.below(std::min<Index>(n1 - 1, 5));
    const Index k2 = 2 + rng.below(std::min<Index>(n2 - 1, 5));
    const auto d = dataset_from_y(oracle::random_binary(n1, n2, rng, 0.3));
    const auto splits = stratified_kfold(d, k1, k2, rng);
    Index lo = n1, hi = 0;
    for (const auto& s : splits) {
      lo = std::min(lo, s.row_test.size());
      hi = std::max(hi, s.row_test.size());
    }
    EXPECT_LE(hi - lo, 1u);
  }
}

TEST(StratifiedKfold, SkewedDegreesBalancedAcrossFolds) {
  // Row degrees 8,7,...,1 on an 8x8 toy.
  Matrix y(8, 8);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8 - i; ++j) y(i, j) = 1.0;
  const auto d = dataset_from_y(y);
  Rng rng(6);
  const auto splits = stratified_kfold(d, 2, 2, rng);
  const double global_mean = 36.0 / 8.0;
  for (const auto& s : splits) {
    double total = 0.0;
    for (Index i : s.row_test)
      for (Index j = 0; j < 8; ++j) total += y(i, j);
    EXPECT_LE(std::abs(total / static_cast<double>(s.row_test.size()) - global_mean), 1.0);
  }
}

TEST(StratifiedKfold, RejectsTooManyFolds) {
  const auto d = dataset_from_y(Matrix(3, 3));
  Rng rng(0);
  EXPECT_THROW(stratified_kfold(d, 4, 2, rng), ContractError);
  EXPECT_THROW(stratified_kfold(d, 1, 2, rng), ContractError);
}

TEST(StratifiedKfold, DeterministicForSeed) {
  Rng rng(9);
  const auto d = dataset_from_y(oracle::random_binary(10, 10, rng));
  Rng a(77), b(77);
  const auto sa = stratified_kfold(d, 3, 3, a);
  const auto sb = stratified_kfold(d, 3, 3, b);
  for (Index k = 0; k < sa.size(); ++k) {
    EXPECT_EQ(sa[k].row_test, sb[k].row_test);
    EXPECT_EQ(sa[k].col_test, sb[k].col_test);
  }
}

CvSplit first_split(const BipartiteDataset& d, std::uint64_t seed = 1) {
  Rng rng(seed);
  return stratified_kfold(d, 2, 2, rng).front();
}

Index ld_positives(const BipartiteDataset& d, const CvSplit& s) {
  Index p = 0;
  for (Index i : s.row_train)
    for (Index j : s.col_train) p += d.y(i, j) == 1.0;
  return p;
}

TEST(MaskPositives, FlipsHalfOfFourPositives) {
  // LD block is rows {0,1} x cols {0,1} after an explicit split.
  BipartiteDataset d = dataset_from_y(Matrix{{1, 1, 0, 0}, {1, 1, 0, 1}, {0, 0, 1, 0}, {1, 0, 0, 1}});
  CvSplit s;
  s.row_train = {0, 1};
  s.row_test = {2, 3};
  s.col_train = {0, 1};
  s.col_test = {2, 3};
  Rng rng(3);
  const auto m = mask_positives(d, s, 0.5, rng);
  EXPECT_EQ(m.split.masked.size(), 2u);
  EXPECT_DOUBLE_EQ(sum(m.y_learn), 2.0);
  Index td_pos = 0;
  for (const auto& e : m.eval_td) td_pos += e.label == 1.0;
  EXPECT_EQ(td_pos, 2u);
}

TEST(MaskPositives, ZeroPmpIsIdentity) {
  Rng rng(12);
  const auto d = dataset_from_y(oracle::random_binary(8, 6, rng));
  const auto s = first_split(d);
  const auto m = mask_positives(d, s, 0.0, rng);
  EXPECT_EQ(m.y_learn, d.y.select(s.row_train, s.col_train));
  for (const auto& e : m.eval_td) EXPECT_EQ(e.label, 0.0);
  EXPECT_TRUE(m.split.masked.empty());
}

TEST(MaskPositives, DeterministicAndNeverCreatesPositives) {
  Rng gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = dataset_from_y(oracle::random_binary(6 + gen.below(10), 6 + gen.below(10), gen, 0.4));
    const auto s = first_split(d, trial);
    for (double pmp : {0.0, 0.25, 0.5, 0.75}) {
      Rng a(100 + trial), b(100 + trial);
      const auto ma = mask_positives(d, s, pmp, a);
      const auto mb = mask_positives(d, s, pmp, b);
      EXPECT_EQ(ma.split.masked, mb.split.masked);
      const Matrix ld = d.y.select(s.row_train, s.col_train);
      const Index p = ld_positives(d, s);
      EXPECT_EQ(ma.split.masked.size(), static_cast<Index>(std::llround(pmp * static_cast<double>(p))));
      for (Index i = 0; i < ld.rows(); ++i)
        for (Index j = 0; j < ld.cols(); ++j) EXPECT_LE(ma.y_learn(i, j), ld(i, j));
      EXPECT_DOUBLE_EQ(sum(ld) - sum(ma.y_learn), static_cast<double>(ma.split.masked.size()));
      for (const auto& dy : ma.split.masked) EXPECT_EQ(d.y(dy.row, dy.col), 1.0);
    }
  }
}

TEST(MaskPositives, RejectsPmpOutOfRange) {
  const auto d = dataset_from_y(Matrix{{1, 0}, {0, 1}});
  CvSplit s;
  s.row_train = {0};
  s.row_test = {1};
  s.col_train = {0};
  s.col_test = {1};
  Rng rng(0);
  EXPECT_THROW(mask_positives(d, s, 1.0, rng), ContractError);
  EXPECT_THROW(mask_positives(d, s, -0.1, rng), ContractError);
}

TEST(CarveSplit, ShapesOfFourByFour) {
  Rng rng(21);
  const auto d = dataset_from_y(oracle::random_binary(4, 4, rng));
  const auto c = carve_split(d, first_split(d));
  EXPECT_EQ(c.tt.y.rows(), 2u);
  EXPECT_EQ(c.tt.y.cols(), 2u);
  EXPECT_EQ(c.ld.y.rows(), 2u);
}

TEST(CarveSplit, BlocksTileY) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = dataset_from_y(oracle::random_binary(5 + rng.below(8), 5 + rng.below(8), rng));
    Rng srng(trial);
    for (const auto& s : stratified_kfold(d, 2, 3, srng)) {
      const auto c = carve_split(d, s);
      Matrix count(d.n_rows(), d.n_cols());
      auto place = [&](const Matrix& block, const IndexList& rows, const IndexList& cols) {
        for (Index a = 0; a < rows.size(); ++a)
          for (Index b = 0; b < cols.size(); ++b) {
            EXPECT_EQ(block(a, b), d.y(rows[a], cols[b]));
            count(rows[a], cols[b]) += 1.0;
          }
      };
      place(c.ld.y, s.row_train, s.col_train);
      place(c.lt.y, s.row_train, s.col_test);
      place(c.tl.y, s.row_test, s.col_train);
      place(c.tt.y, s.row_test, s.col_test);
      for (double v : count.values()) EXPECT_EQ(v, 1.0);
    }
  }
}

TEST(CarveSplit, SharedLearningFeatures) {
  Rng rng(23);
  BipartiteDataset d{oracle::random_matrix(6, 3, rng), oracle::random_matrix(5, 2, rng),
                     oracle::random_binary(6, 5, rng), false};
  const auto c = carve_split(d, first_split(d));
  EXPECT_EQ(c.tl.x2, c.ld.x2);
  EXPECT_EQ(c.lt.x1, c.ld.x1);
  EXPECT_EQ(c.tt.x1.cols(), 3u);
}

TEST(CarveSplit, PrecomputedFeaturesRestrictedToTrainingColumns) {
  Rng rng(24);
  const Index n = 6;
  BipartiteDataset d{oracle::random_spd(n, rng), oracle::random_spd(n, rng), oracle::random_binary(n, n, rng), true};
  const auto s = first_split(d);
  const auto c = carve_split(d, s);
  EXPECT_EQ(c.ld.x1.cols(), s.row_train.size());
  EXPECT_EQ(c.tt.x1.cols(), s.row_train.size());
  EXPECT_EQ(c.tt.x2.cols(), s.col_train.size());
  EXPECT_EQ(c.tt.x1(0, 0), d.x1(s.row_test[0], s.row_train[0]));
  EXPECT_NO_THROW(c.ld.validate());
}

TEST(CarveSplit, TdLabelsMatchMaskedAndZeros) {
  Rng rng(25);
  const auto d = dataset_from_y(oracle::random_binary(10, 10, rng));
  Rng mrng(26);
  const auto m = mask_positives(d, first_split(d), 0.5, mrng);
  const auto c = carve_split(d, m.split);
  ASSERT_EQ(c.td.size(), m.eval_td.size());
  const Matrix ld = d.y.select(m.split.row_train, m.split.col_train);
  Index zeros = 0;
  for (double v : ld.values()) zeros += v == 0.0;
  EXPECT_EQ(c.td.size(), zeros + m.split.masked.size());
  for (const auto& e : c.td) {
    EXPECT_EQ(c.ld.y(e.row, e.col), 0.0);
    EXPECT_EQ(ld(e.row, e.col), e.label);
  }
}

TEST(CarveSplit, EmptyPartitionRejected) {
  const auto d = dataset_from_y(Matrix(3, 3));
  CvSplit s;
  s.row_train = {0, 1, 2};
  s.col_train = {0, 1};
  s.col_test = {2};
  EXPECT_THROW(carve_split(d, s), ContractError);
}

}  // namespace
}  // namespace oxytrees
