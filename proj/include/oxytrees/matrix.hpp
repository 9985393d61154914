#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "oxytrees/errors.hpp"

namespace oxytrees {

using Index = std::size_t;
using IndexList = std::vector<Index>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;

  Matrix(Index rows, Index cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(Index rows, Index cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged initializer list");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(Index n) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j) noexcept { return data_[i * cols_ + j]; }
  double operator()(Index i, Index j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(Index i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(Index i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (Index i = 0; i < rows_; ++i)
      for (Index j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // Submatrix gathered from the given row and column indices.
  Matrix select(std::span<const Index> row_ids, std::span<const Index> col_ids) const {
    Matrix out(row_ids.size(), col_ids.size());
    for (Index i = 0; i < row_ids.size(); ++i) {
      const double* src = data_.data() + row_ids[i] * cols_;
      double* dst = out.data_.data() + i * col_ids.size();
      for (Index j = 0; j < col_ids.size(); ++j) dst[j] = src[col_ids[j]];
    }
    return out;
  }

  Matrix select_rows(std::span<const Index> row_ids) const {
    Matrix out(row_ids.size(), cols_);
    for (Index i = 0; i < row_ids.size(); ++i)
      std::copy_n(data_.data() + row_ids[i] * cols_, cols_, out.data_.data() + i * cols_);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a) + " times " + shape_string(b));
  }
  Matrix c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (Index k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (Index j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

// a * b^T without materializing the transpose.
inline Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transposed: " + shape_string(a) + " times (" +
                         shape_string(b) + ")^T");
  }
  Matrix c(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (Index j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      c(i, j) = s;
    }
  }
  return c;
}

inline double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double v : m.values()) r = std::max(r, std::abs(v));
  return r;
}

inline double trace(const Matrix& m) {
  double t = 0.0;
  for (Index i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

inline double sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v;
  return s;
}

}  // namespace oxytrees
