#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "oxytrees/errors.hpp"
#include "oxytrees/matrix.hpp"

namespace oxytrees {

// Sufficient statistics of the variance impurity: [count, sum y, sum y^2].
struct ImpurityStats {
  std::array<double, 3> s{0.0, 0.0, 0.0};

  double count() const noexcept { return s[0]; }

  void add(double y) noexcept {
    s[0] += 1.0;
    s[1] += y;
    s[2] += y * y;
  }

  ImpurityStats& operator+=(const ImpurityStats& o) noexcept {
    for (int k = 0; k < 3; ++k) s[k] += o.s[k];
    return *this;
  }
  ImpurityStats& operator-=(const ImpurityStats& o) noexcept {
    for (int k = 0; k < 3; ++k) s[k] -= o.s[k];
    return *this;
  }
  friend ImpurityStats operator+(ImpurityStats a, const ImpurityStats& b) noexcept { return a += b; }
  friend ImpurityStats operator-(ImpurityStats a, const ImpurityStats& b) noexcept { return a -= b; }
};

// Sentinel score of a candidate that leaves one side empty.
inline constexpr double kEmptySide = -std::numeric_limits<double>::infinity();

// Scores below this are treated as rounding noise around zero.
inline constexpr double kDeltaFloor = -1e-12;

namespace detail {

inline double variance_unchecked(const ImpurityStats& st) noexcept {
  const double mean = st.s[1] / st.s[0];
  return std::max(0.0, st.s[2] / st.s[0] - mean * mean);
}

inline double weighted_delta(const ImpurityStats& node, const ImpurityStats& a,
                             const ImpurityStats& b, double n_norm) noexcept {
  const double d = (node.s[0] * variance_unchecked(node) - a.s[0] * variance_unchecked(a) -
                    b.s[0] * variance_unchecked(b)) /
                   n_norm;
  return std::max(d, kDeltaFloor);
}

}  // namespace detail

// Variance of the labels summarized by `stats`, clamped at zero.
inline double impurity(const ImpurityStats& stats) {
  if (!(stats.s[0] >= 1.0)) throw ContractError("impurity of an empty node");
  return detail::variance_unchecked(stats);
}

inline ImpurityStats stats_of(const Matrix& y) {
  ImpurityStats st;
  for (double v : y.values()) st.add(v);
  return st;
}

// Row-wise (p1) and column-wise (p2) aggregates of [1, y, y^2] over a node.
struct ProxyPair {
  Matrix p1;  // rows x 3
  Matrix p2;  // cols x 3

  ImpurityStats row_stats(Index i) const noexcept { return {{p1(i, 0), p1(i, 1), p1(i, 2)}}; }
  ImpurityStats col_stats(Index j) const noexcept { return {{p2(j, 0), p2(j, 1), p2(j, 2)}}; }
};

// Proxies of the node block y[rows, cols] without copying the block.
inline ProxyPair build_proxies(const Matrix& y, std::span<const Index> rows,
                               std::span<const Index> cols) {
  if (rows.empty() || cols.empty()) throw ContractError("build_proxies: empty node");
  ProxyPair p{Matrix(rows.size(), 3), Matrix(cols.size(), 3)};
  for (Index i = 0; i < rows.size(); ++i) {
    const auto yrow = y.row(rows[i]);
    double s1 = 0.0, s2 = 0.0;
    for (Index j = 0; j < cols.size(); ++j) {
      const double v = yrow[cols[j]];
      const double v2 = v * v;
      s1 += v;
      s2 += v2;
      p.p2(j, 1) += v;
      p.p2(j, 2) += v2;
    }
    p.p1(i, 0) = static_cast<double>(cols.size());
    p.p1(i, 1) = s1;
    p.p1(i, 2) = s2;
  }
  for (Index j = 0; j < cols.size(); ++j) p.p2(j, 0) = static_cast<double>(rows.size());
  return p;
}

inline ProxyPair build_proxies(const Matrix& y_node) {
  IndexList rows(y_node.rows()), cols(y_node.cols());
  std::iota(rows.begin(), rows.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  return build_proxies(y_node, rows, cols);
}

// Sum of the rows of a proxy matrix: the node statistics.
inline ImpurityStats total_stats(const Matrix& proxy) noexcept {
  ImpurityStats st;
  for (Index i = 0; i < proxy.rows(); ++i)
    for (int k = 0; k < 3; ++k) st.s[k] += proxy(i, k);
  return st;
}

// Impurity decrease (1/n_norm)(n I(node) - n_a I(a) - n_b I(b)).
inline double delta_impurity(const ImpurityStats& node, const ImpurityStats& a,
                             const ImpurityStats& b, double n_norm) {
  for (int k = 0; k < 3; ++k) {
    if (std::abs(a.s[k] + b.s[k] - node.s[k]) > 1e-9) {
      throw ContractError("delta_impurity: children do not partition the node");
    }
  }
  if (!(n_norm > 0.0)) throw ContractError("delta_impurity: n_norm must be positive");
  if (a.s[0] < 1.0 || b.s[0] < 1.0) throw ContractError("delta_impurity: empty child");
  return detail::weighted_delta(node, a, b, n_norm);
}

struct ScoredThreshold {
  double threshold = 0.0;
  double delta = kEmptySide;
  Index n_left = 0;
};

// Scores every threshold of one feature from the proxy rows alone. Instance
// k goes left when feature_values[k] <= threshold. A single threshold is
// scored by one linear pass; several are scored by a prefix scan over the
// instances in feature order.
inline std::vector<ScoredThreshold> scan_axis_splits(const Matrix& proxy,
                                                     std::span<const double> feature_values,
                                                     std::span<const double> thresholds,
                                                     double n_norm) {
  const Index n = proxy.rows();
  if (feature_values.size() != n) {
    throw DimensionError("scan_axis_splits: " + std::to_string(feature_values.size()) +
                         " feature values for " + std::to_string(n) + " proxy rows");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ContractError("scan_axis_splits: thresholds must be sorted ascending");
  }
  const ImpurityStats node = total_stats(proxy);
  std::vector<ScoredThreshold> out(thresholds.size());

  auto score = [&](ScoredThreshold& r, const ImpurityStats& left, Index n_left) {
    r.n_left = n_left;
    if (n_left == 0 || n_left == n) {
      r.delta = kEmptySide;
    } else {
      r.delta = detail::weighted_delta(node, left, node - left, n_norm);
    }
  };

  if (thresholds.size() == 1) {
    ImpurityStats left;
    Index n_left = 0;
    const double t = thresholds[0];
    const double* row = proxy.values().data();
    for (Index k = 0; k < n; ++k, row += 3) {
      const bool go = feature_values[k] <= t;
      const double w = go ? 1.0 : 0.0;
      left.s[0] += w * row[0];
      left.s[1] += w * row[1];
      left.s[2] += w * row[2];
      n_left += go;
    }
    out[0].threshold = thresholds[0];
    score(out[0], left, n_left);
    return out;
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return feature_values[a] < feature_values[b]; });
  ImpurityStats left;
  Index cursor = 0;
  for (Index t = 0; t < thresholds.size(); ++t) {
    while (cursor < n && feature_values[order[cursor]] <= thresholds[t]) {
      const Index k = order[cursor++];
      left.s[0] += proxy(k, 0);
      left.s[1] += proxy(k, 1);
      left.s[2] += proxy(k, 2);
    }
    out[t].threshold = thresholds[t];
    score(out[t], left, cursor);
  }
  return out;
}

}  // namespace oxytrees
