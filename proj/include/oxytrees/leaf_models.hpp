#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oxytrees/eigen.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/matrix.hpp"
#include "oxytrees/matrix_io.hpp"

namespace oxytrees {

struct KernelConfig {
  enum class Mode { Precomputed, Linear, Rbf };
  Mode mode = Mode::Precomputed;
  double gamma = 1.0;  // Rbf only

  static KernelConfig precomputed() { return {Mode::Precomputed, 1.0}; }
  static KernelConfig linear() { return {Mode::Linear, 1.0}; }
  static KernelConfig rbf(double gamma) {
    if (!(std::isfinite(gamma) && gamma > 0.0)) {
      throw ContractError("rbf gamma must be finite and positive");
    }
    return {Mode::Rbf, gamma};
  }

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

inline const char* to_string(KernelConfig::Mode m) {
  switch (m) {
    case KernelConfig::Mode::Precomputed: return "precomputed";
    case KernelConfig::Mode::Linear: return "linear";
    case KernelConfig::Mode::Rbf: return "rbf";
  }
  return "?";
}

// Similarities between the rows of `a` and the training instances `ids`.
// Linear and Rbf compare against rows of `train`; Precomputed reads column
// ids[k] of `a` directly and ignores `train`.
inline Matrix kernel_matrix(const KernelConfig& config, const Matrix& a, const Matrix& train,
                            std::span<const Index> ids) {
  Matrix out(a.rows(), ids.size());
  if (config.mode == KernelConfig::Mode::Precomputed) {
    for (Index k = 0; k < ids.size(); ++k) {
      if (ids[k] >= a.cols()) {
        throw DimensionError("precomputed kernel: instance " + std::to_string(ids[k]) +
                             " out of range for " + std::to_string(a.cols()) + " feature columns");
      }
    }
    for (Index i = 0; i < a.rows(); ++i)
      for (Index k = 0; k < ids.size(); ++k) out(i, k) = a(i, ids[k]);
    return out;
  }
  if (a.rows() > 0 && a.cols() != train.cols()) {
    throw DimensionError("kernel: feature width " + std::to_string(a.cols()) + " vs training width " +
                         std::to_string(train.cols()));
  }
  for (Index k = 0; k < ids.size(); ++k) {
    if (ids[k] >= train.rows()) throw DimensionError("kernel: training instance out of range");
  }
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (Index k = 0; k < ids.size(); ++k) {
      const auto br = train.row(ids[k]);
      double acc = 0.0;
      if (config.mode == KernelConfig::Mode::Linear) {
        for (Index f = 0; f < ar.size(); ++f) acc += ar[f] * br[f];
        out(i, k) = acc;
      } else {
        for (Index f = 0; f < ar.size(); ++f) {
          const double d = ar[f] - br[f];
          acc += d * d;
        }
        out(i, k) = std::exp(-config.gamma * acc);
      }
    }
  }
  return out;
}

// Kernel between the rows of `a` and the rows of `b`.
inline Matrix kernel_matrix(const KernelConfig& config, const Matrix& a, const Matrix& b) {
  IndexList ids(config.mode == KernelConfig::Mode::Precomputed ? a.cols() : b.rows());
  std::iota(ids.begin(), ids.end(), Index{0});
  return kernel_matrix(config, a, b, ids);
}

// Coefficients C (n1 x n2) of Kronecker-kernel ridge regression, solving
// phi1 C phi2 + alpha C = Y through the eigendecompositions of both kernels:
//   C = U1 [L o (U1^T Y U2)] U2^T,  L_ij = 1 / (alpha + lambda1_i lambda2_j).
// Negative eigenvalues are clamped to zero.
inline Matrix rls_kron_fit(const Matrix& phi1, const Matrix& phi2, const Matrix& y, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractError("rls_kron: alpha must be positive");
  if (phi1.rows() != y.rows() || phi2.rows() != y.cols()) {
    throw DimensionError("rls_kron_fit: kernels " + shape_string(phi1) + ", " + shape_string(phi2) +
                         " for labels " + shape_string(y));
  }
  auto e1 = sym_eigen(phi1);
  auto e2 = sym_eigen(phi2);
  for (double& l : e1.eigenvalues) l = std::max(l, 0.0);
  for (double& l : e2.eigenvalues) l = std::max(l, 0.0);

  // U1^T Y U2
  Matrix projected = matmul(matmul(e1.eigenvectors.transposed(), y), e2.eigenvectors);
  for (Index i = 0; i < projected.rows(); ++i) {
    for (Index j = 0; j < projected.cols(); ++j) {
      const double denom = alpha + e1.eigenvalues[i] * e2.eigenvalues[j];
      if (std::abs(denom) < 1e-12) {
        throw NumericError("rls_kron_fit: singular denominator with alpha=" + format_number(alpha));
      }
      projected(i, j) /= denom;
    }
  }
  return matmul_transposed(matmul(e1.eigenvectors, projected), e2.eigenvectors);
}

// phi1_test C phi2_test^T, scores indexed (row-domain test, column-domain test).
inline Matrix rls_kron_predict(const Matrix& coefficients, const Matrix& phi1_test,
                               const Matrix& phi2_test) {
  if (phi1_test.cols() != coefficients.rows() || phi2_test.cols() != coefficients.cols()) {
    throw DimensionError("rls_kron_predict: test kernels " + shape_string(phi1_test) + ", " +
                         shape_string(phi2_test) + " for coefficients " + shape_string(coefficients));
  }
  return matmul_transposed(matmul(phi1_test, coefficients), phi2_test);
}

inline constexpr Index kKronOracleMaxSize = 400;

// Reference solution: dense Gaussian elimination on (phi1 (x) phi2 + alpha I) c = vec(Y).
inline Matrix rls_kron_oracle(const Matrix& phi1, const Matrix& phi2, const Matrix& y, double alpha,
                              const Matrix& phi1_test, const Matrix& phi2_test) {
  const Index n1 = y.rows(), n2 = y.cols(), n = n1 * n2;
  if (n > kKronOracleMaxSize) {
    throw ContractError("rls_kron_oracle: system of size " + std::to_string(n) + " exceeds " +
                        std::to_string(kKronOracleMaxSize));
  }
  if (phi1.rows() != n1 || phi1.cols() != n1 || phi2.rows() != n2 || phi2.cols() != n2 ||
      phi1_test.cols() != n1 || phi2_test.cols() != n2) {
    throw DimensionError("rls_kron_oracle: inconsistent shapes");
  }
  Matrix a(n, n + 1);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) {
      const Index r = i * n2 + j;
      for (Index ip = 0; ip < n1; ++ip)
        for (Index jp = 0; jp < n2; ++jp) a(r, ip * n2 + jp) = phi1(i, ip) * phi2(j, jp);
      a(r, r) += alpha;
      a(r, n) = y(i, j);
    }
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-300) throw NumericError("rls_kron_oracle: singular system");
    if (pivot != col)
      for (Index k = 0; k <= n; ++k) std::swap(a(col, k), a(pivot, k));
    for (Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (Index k = col; k <= n; ++k) a(r, k) -= f * a(col, k);
    }
  }
  std::vector<double> c(n);
  for (Index r = n; r-- > 0;) {
    double acc = a(r, n);
    for (Index k = r + 1; k < n; ++k) acc -= a(r, k) * c[k];
    c[r] = acc / a(r, r);
  }
  Matrix out(phi1_test.rows(), phi2_test.rows());
  for (Index t1 = 0; t1 < out.rows(); ++t1)
    for (Index t2 = 0; t2 < out.cols(); ++t2) {
      double acc = 0.0;
      for (Index i = 0; i < n1; ++i)
        for (Index j = 0; j < n2; ++j) acc += c[i * n2 + j] * phi1_test(t1, i) * phi2_test(t2, j);
      out(t1, t2) = acc;
    }
  return out;
}

struct MeanLeaf {
  double value = 0.0;
};

struct RlsKronLeaf {
  Matrix w;        // leaf rows x leaf cols
  IndexList rows;  // training row instances of the leaf
  IndexList cols;  // training column instances of the leaf
  KernelConfig kernel1;
  KernelConfig kernel2;
  double alpha = 1.0;
};

using LeafModel = std::variant<MeanLeaf, RlsKronLeaf>;

inline MeanLeaf mean_fit(const Matrix& y_leaf) {
  if (y_leaf.empty()) throw ContractError("mean_fit: empty leaf");
  return {sum(y_leaf) / static_cast<double>(y_leaf.size())};
}

inline Matrix mean_predict(const MeanLeaf& leaf, Index rows, Index cols) {
  return Matrix(rows, cols, leaf.value);
}

// Fits the Kronecker ridge leaf on training block (rows, cols). `x1_train`
// and `x2_train` are the full training feature matrices.
inline RlsKronLeaf rls_kron_leaf_fit(const Matrix& x1_train, const Matrix& x2_train, const Matrix& y,
                                     std::span<const Index> rows, std::span<const Index> cols,
                                     const KernelConfig& k1, const KernelConfig& k2, double alpha) {
  const Matrix x1_leaf = x1_train.select_rows(rows);
  const Matrix x2_leaf = x2_train.select_rows(cols);
  const Matrix phi1 = kernel_matrix(k1, x1_leaf, x1_train, rows);
  const Matrix phi2 = kernel_matrix(k2, x2_leaf, x2_train, cols);
  RlsKronLeaf leaf;
  leaf.w = rls_kron_fit(phi1, phi2, y.select(rows, cols), alpha);
  leaf.rows.assign(rows.begin(), rows.end());
  leaf.cols.assign(cols.begin(), cols.end());
  leaf.kernel1 = k1;
  leaf.kernel2 = k2;
  leaf.alpha = alpha;
  return leaf;
}

// Scores of the test block x1_test x x2_test under the leaf.
inline Matrix rls_kron_leaf_predict(const RlsKronLeaf& leaf, const Matrix& x1_train,
                                    const Matrix& x2_train, const Matrix& x1_test,
                                    const Matrix& x2_test) {
  const Matrix phi1 = kernel_matrix(leaf.kernel1, x1_test, x1_train, leaf.rows);
  const Matrix phi2 = kernel_matrix(leaf.kernel2, x2_test, x2_train, leaf.cols);
  return rls_kron_predict(leaf.w, phi1, phi2);
}

}  // namespace oxytrees
