#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "oxytrees/errors.hpp"
#include "oxytrees/matrix.hpp"

namespace oxytrees {

struct SymmetricEigen {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

struct JacobiOptions {
  double relative_tolerance = 1e-12;  // off-diagonal Frobenius norm vs initial norm
  int max_sweeps = 100;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. The input is
// symmetrized as (A + A^T) / 2 first.
inline SymmetricEigen sym_eigen(const Matrix& input, JacobiOptions options = {}) {
  if (input.rows() != input.cols()) {
    throw DimensionError("sym_eigen: matrix must be square, got " + shape_string(input));
  }
  const Index n = input.rows();
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);

  double norm2 = 0.0;
  for (double x : a.values()) norm2 += x * x;
  const double tolerance = options.relative_tolerance * std::sqrt(norm2);

  auto off_norm = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  bool converged = false;
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    if (off_norm() <= tolerance) {
      converged = true;
      break;
    }
    if (sweep == options.max_sweeps) break;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericError("sym_eigen: Jacobi iteration did not converge for " + std::to_string(n) +
                       "x" + std::to_string(n) + " matrix");
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) > a(y, y); });

  SymmetricEigen result{std::vector<double>(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    result.eigenvalues[k] = a(order[k], order[k]);
    for (Index i = 0; i < n; ++i) result.eigenvectors(i, k) = v(i, order[k]);
  }
  return result;
}

// U diag(lambda) U^T
inline Matrix reconstruct(const SymmetricEigen& e) {
  const Index n = e.eigenvalues.size();
  Matrix scaled = e.eigenvectors;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) scaled(i, k) *= e.eigenvalues[k];
  return matmul_transposed(scaled, e.eigenvectors);
}

}  // namespace oxytrees
