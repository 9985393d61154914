#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "oxytrees/errors.hpp"
#include "oxytrees/matrix.hpp"
#include "oxytrees/matrix_io.hpp"
#include "oxytrees/random.hpp"

namespace oxytrees {

// Two feature matrices and the binary interaction matrix between their
// instances. When `precomputed` is set, feature column j of x1 (resp. x2) is
// the similarity to training row-instance j (resp. column-instance j).
struct BipartiteDataset {
  Matrix x1;
  Matrix x2;
  Matrix y;
  bool precomputed = false;

  Index n_rows() const noexcept { return y.rows(); }
  Index n_cols() const noexcept { return y.cols(); }

  void validate() const {
    if (y.rows() != x1.rows()) {
      throw DimensionError("y has " + std::to_string(y.rows()) + " rows but x1 has " +
                           std::to_string(x1.rows()));
    }
    if (y.cols() != x2.rows()) {
      throw DimensionError("y has " + std::to_string(y.cols()) + " columns but x2 has " +
                           std::to_string(x2.rows()) + " rows");
    }
    for (Index i = 0; i < y.rows(); ++i)
      for (Index j = 0; j < y.cols(); ++j) {
        const double v = y(i, j);
        if (v != 0.0 && v != 1.0) {
          throw ContractError("non-binary label " + format_number(v) + " at (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
        }
      }
    if (!x1.all_finite() || !x2.all_finite()) throw ContractError("non-finite feature value");
    if (precomputed && (x1.cols() != x1.rows() || x2.cols() != x2.rows())) {
      throw DimensionError("precomputed similarity features must be square, got x1 " +
                           shape_string(x1) + " and x2 " + shape_string(x2));
    }
  }
};

inline BipartiteDataset load_dataset(const std::string& x1_path, const std::string& x2_path,
                                     const std::string& y_path, bool precomputed = false) {
  BipartiteDataset d{read_matrix_file(x1_path), read_matrix_file(x2_path), read_matrix_file(y_path),
                     precomputed};
  d.validate();
  return d;
}

struct Dyad {
  Index row = 0;
  Index col = 0;
  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

struct LabeledDyad {
  Index row = 0;
  Index col = 0;
  double label = 0.0;
};

// One (row fold, column fold) cell of bipartite k1 x k2 cross-validation.
// All indices refer to the full dataset.
struct CvSplit {
  Index fold = 0;
  Index row_fold = 0;
  Index col_fold = 0;
  IndexList row_train;
  IndexList row_test;
  IndexList col_train;
  IndexList col_test;
  std::vector<Dyad> masked;  // positives hidden from the learning block
  double pmp = 0.0;
};

// Deals instances into k folds: seeded shuffle (tie-break), stable sort by
// descending positive count, then round-robin. Each returned fold is sorted.
inline std::vector<IndexList> stratified_folds(std::span<const double> degrees, Index k, Rng& rng) {
  std::vector<Index> order(degrees.size());
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return degrees[a] > degrees[b]; });
  std::vector<IndexList> folds(k);
  for (Index pos = 0; pos < order.size(); ++pos) folds[pos % k].push_back(order[pos]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace detail {

inline IndexList complement(const IndexList& sorted_subset, Index n) {
  IndexList out;
  out.reserve(n - sorted_subset.size());
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    if (next < sorted_subset.size() && sorted_subset[next] == i) {
      ++next;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<CvSplit> stratified_kfold(const BipartiteDataset& data, Index k1, Index k2,
                                             Rng& rng) {
  const Index n1 = data.n_rows();
  const Index n2 = data.n_cols();
  if (k1 < 2 || k2 < 2) throw ContractError("fold counts must be at least 2");
  if (k1 > n1) {
    throw ContractError("k1=" + std::to_string(k1) + " exceeds the " + std::to_string(n1) +
                        " row instances");
  }
  if (k2 > n2) {
    throw ContractError("k2=" + std::to_string(k2) + " exceeds the " + std::to_string(n2) +
                        " column instances");
  }
  std::vector<double> row_deg(n1, 0.0), col_deg(n2, 0.0);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) {
      row_deg[i] += data.y(i, j);
      col_deg[j] += data.y(i, j);
    }
  const auto row_folds = stratified_folds(row_deg, k1, rng);
  const auto col_folds = stratified_folds(col_deg, k2, rng);

  std::vector<CvSplit> splits;
  splits.reserve(k1 * k2);
  for (Index rf = 0; rf < k1; ++rf) {
    for (Index cf = 0; cf < k2; ++cf) {
      CvSplit s;
      s.fold = rf * k2 + cf;
      s.row_fold = rf;
      s.col_fold = cf;
      s.row_test = row_folds[rf];
      s.col_test = col_folds[cf];
      s.row_train = detail::complement(s.row_test, n1);
      s.col_train = detail::complement(s.col_test, n2);
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

struct MaskedSplit {
  CvSplit split;                      // with `masked` and `pmp` filled in
  Matrix y_learn;                     // LD block after masking
  std::vector<LabeledDyad> eval_td;   // LD-local coordinates
};

namespace detail {

inline void check_split(const BipartiteDataset& data, const CvSplit& s) {
  if (s.row_train.empty() || s.row_test.empty() || s.col_train.empty() || s.col_test.empty()) {
    throw ContractError("split " + std::to_string(s.fold) + " has an empty partition");
  }
  if (s.row_train.size() + s.row_test.size() != data.n_rows() ||
      s.col_train.size() + s.col_test.size() != data.n_cols()) {
    throw ContractError("split " + std::to_string(s.fold) + " does not cover the dataset");
  }
}

// Position of each global index in `ids`, or npos.
inline IndexList local_positions(const IndexList& ids, Index n) {
  IndexList pos(n, static_cast<Index>(-1));
  for (Index k = 0; k < ids.size(); ++k) pos[ids[k]] = k;
  return pos;
}

// LD block with the split's masked positives zeroed, plus the TD evaluation
// list: masked positives labeled 1 and original LD zeros labeled 0.
inline std::pair<Matrix, std::vector<LabeledDyad>> learning_block(const BipartiteDataset& data,
                                                                  const CvSplit& s) {
  Matrix y = data.y.select(s.row_train, s.col_train);
  const auto row_pos = local_positions(s.row_train, data.n_rows());
  const auto col_pos = local_positions(s.col_train, data.n_cols());
  Matrix hidden(y.rows(), y.cols(), 0.0);
  for (const auto& d : s.masked) {
    const Index i = row_pos[d.row];
    const Index j = col_pos[d.col];
    if (i == static_cast<Index>(-1) || j == static_cast<Index>(-1) || y(i, j) != 1.0) {
      throw ContractError("masked dyad (" + std::to_string(d.row) + "," + std::to_string(d.col) +
                          ") is not a positive of the learning block");
    }
    hidden(i, j) = 1.0;
  }
  std::vector<LabeledDyad> td;
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.cols(); ++j) {
      if (hidden(i, j) == 1.0) {
        y(i, j) = 0.0;
        td.push_back({i, j, 1.0});
      } else if (y(i, j) == 0.0) {
        td.push_back({i, j, 0.0});
      }
    }
  return {std::move(y), std::move(td)};
}

}  // namespace detail

// Hides round(pmp * P) of the P positives of the LD block, chosen uniformly.
inline MaskedSplit mask_positives(const BipartiteDataset& data, CvSplit split, double pmp, Rng& rng) {
  if (!(pmp >= 0.0 && pmp < 1.0)) throw ContractError("pmp must lie in [0, 1)");
  detail::check_split(data, split);
  std::vector<Dyad> positives;
  for (Index i : split.row_train)
    for (Index j : split.col_train)
      if (data.y(i, j) == 1.0) positives.push_back({i, j});
  const auto n_mask = static_cast<Index>(std::llround(pmp * static_cast<double>(positives.size())));
  rng.shuffle(std::span<Dyad>(positives));
  positives.resize(n_mask);
  std::sort(positives.begin(), positives.end());
  split.masked = std::move(positives);
  split.pmp = pmp;
  auto [y_learn, td] = detail::learning_block(data, split);
  return {std::move(split), std::move(y_learn), std::move(td)};
}

// Learning set plus the four test settings of one split.
struct CarvedSplit {
  BipartiteDataset ld;  // X1L, X2L, masked Y_LD
  BipartiteDataset lt;  // X1L, X2T
  BipartiteDataset tl;  // X1T, X2L
  BipartiteDataset tt;  // X1T, X2T
  std::vector<LabeledDyad> td;  // LD-local coordinates
};

inline CarvedSplit carve_split(const BipartiteDataset& data, const CvSplit& s) {
  detail::check_split(data, s);
  const bool pre = data.precomputed;
  IndexList all1(data.x1.cols()), all2(data.x2.cols());
  std::iota(all1.begin(), all1.end(), Index{0});
  std::iota(all2.begin(), all2.end(), Index{0});
  // Similarity features are restricted to the training instances.
  const IndexList& f1 = pre ? s.row_train : all1;
  const IndexList& f2 = pre ? s.col_train : all2;

  Matrix x1l = data.x1.select(s.row_train, f1);
  Matrix x1t = data.x1.select(s.row_test, f1);
  Matrix x2l = data.x2.select(s.col_train, f2);
  Matrix x2t = data.x2.select(s.col_test, f2);
  auto [y_ld, td] = detail::learning_block(data, s);

  CarvedSplit c;
  c.ld = {x1l, x2l, std::move(y_ld), pre};
  c.lt = {x1l, x2t, data.y.select(s.row_train, s.col_test), pre};
  c.tl = {x1t, x2l, data.y.select(s.row_test, s.col_train), pre};
  c.tt = {std::move(x1t), std::move(x2t), data.y.select(s.row_test, s.col_test), pre};
  c.td = std::move(td);
  return c;
}

}  // namespace oxytrees
