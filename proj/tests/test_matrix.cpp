#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "oxytrees/eigen.hpp"
#include "oxytrees/matrix.hpp"
#include "oxytrees/random.hpp"

namespace oxytrees {
namespace {

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix a{{1.5, -2.0, 3.0}, {0.25, 4.0, -1.0}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
  EXPECT_EQ(matmul(a, Matrix::identity(3)), a);
}

TEST(Matmul, HandComputedProduct) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{1}, {1}};
  EXPECT_EQ(matmul(a, b), (Matrix{{3}, {7}}));
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(11);
  const Matrix a = oracle::random_matrix(4, 5, rng);
  const Matrix b = oracle::random_matrix(5, 3, rng);
  const Matrix expect = oracle::triple_loop_matmul(a, b);
  const Matrix got = matmul(a, b);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(got(i, j), expect(i, j), 1e-14);
  const Matrix bt = b.transposed();
  const Matrix got_t = matmul_transposed(a, bt);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(got_t(i, j), expect(i, j), 1e-14);
}

TEST(Matmul, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), DimensionError);
}

void expect_valid_decomposition(const Matrix& a, const SymmetricEigen& e) {
  const Index n = a.rows();
  const double scale = std::max(max_abs(a), 1e-300);
  const Matrix rec = reconstruct(e);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) EXPECT_NEAR(rec(i, j), a(i, j), 1e-8 * scale);
  const Matrix gram = matmul(e.eigenvectors.transposed(), e.eigenvectors);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) EXPECT_NEAR(gram(i, j), i == j ? 1.0 : 0.0, 1e-8);
  for (Index k = 1; k < n; ++k) EXPECT_GE(e.eigenvalues[k - 1], e.eigenvalues[k]);
}

TEST(SymEigen, Identity) {
  const Matrix a = Matrix::identity(3);
  const auto e = sym_eigen(a);
  for (double l : e.eigenvalues) EXPECT_DOUBLE_EQ(l, 1.0);
  expect_valid_decomposition(a, e);
}

TEST(SymEigen, DiagonalSortedDescending) {
  const Matrix a{{1, 0}, {0, 3}};
  const auto e = sym_eigen(a);
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], 3.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.eigenvectors(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.eigenvectors(0, 1)), 1.0);
}

TEST(SymEigen, RandomSymmetricReconstructs) {
  Rng rng(2024);
  for (Index n : {1, 2, 6, 13, 30}) {
    const Matrix a = oracle::random_symmetric(n, rng);
    const auto e = sym_eigen(a);
    expect_valid_decomposition(a, e);
    double sum = 0.0;
    for (double l : e.eigenvalues) sum += l;
    EXPECT_NEAR(sum, trace(a), 1e-8 * std::max(1.0, std::abs(trace(a))));
  }
}

TEST(SymEigen, PropertyManyRandomMatrices) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + rng.below(12);
    Matrix a = oracle::random_symmetric(n, rng);
    // occasionally repeated eigenvalues
    if (trial % 5 == 0) a = oracle::triple_loop_matmul(a, a);
    expect_valid_decomposition(a, sym_eigen(a));
  }
}

TEST(SymEigen, SymmetrizesSlightlyAsymmetricInput) {
  Matrix a{{2.0, 1.0}, {1.0 + 1e-12, 2.0}};
  const auto e = sym_eigen(a);
  EXPECT_NEAR(e.eigenvalues[0], 3.0, 1e-9);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-9);
}

TEST(SymEigen, ErrorsNameTheProblem) {
  EXPECT_THROW(sym_eigen(Matrix(2, 3)), DimensionError);
  Rng rng(5);
  const Matrix a = oracle::random_symmetric(8, rng);
  try {
    sym_eigen(a, JacobiOptions{1e-12, 0});
    FAIL() << "expected non-convergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("8x8"), std::string::npos);
  }
}

TEST(SymEigen, ZeroMatrix) {
  const auto e = sym_eigen(Matrix(4, 4));
  for (double l : e.eigenvalues) EXPECT_EQ(l, 0.0);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
  Rng u1(7), u2(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(u1.uniform(), u2.uniform());
    EXPECT_EQ(u1.below(17), u2.below(17));
  }
}

TEST(Rng, UniformAndBelowRanges) {
  Rng rng(3);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    hist[rng.below(5)]++;
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(Rng, ChildSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(child_seed(1, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(child_seed(5, 3), child_seed(5, 3));
}

}  // namespace
}  // namespace oxytrees
