#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include "oxytrees/dataset.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/parallel.hpp"
#include "oxytrees/random.hpp"
#include "oxytrees/tree.hpp"

namespace oxytrees {

struct ForestParams {
  Index n_trees = 200;
  TreeParams tree;
  Index threads = 1;
  // Per-axis bootstrap of the training instances (duplicates collapsed).
  // Off by default: every tree sees the full training view.
  bool bootstrap = false;
};

struct OxyForest {
  std::vector<OxyTree> trees;
  std::uint64_t seed = 0;
  ForestParams params;
  Index width1 = 0;
  Index width2 = 0;
  std::shared_ptr<const TrainingFeatures> features;

  Index n_trees() const noexcept { return trees.size(); }
};

namespace detail {

inline IndexList bootstrap_axis(Index n, Rng& rng) {
  std::vector<char> seen(n, 0);
  for (Index k = 0; k < n; ++k) seen[rng.below(n)] = 1;
  IndexList ids;
  for (Index i = 0; i < n; ++i)
    if (seen[i]) ids.push_back(i);
  return ids;
}

}  // namespace detail

// Tree i is grown from Rng(child_seed(seed, i)), independent of scheduling.
inline OxyForest fit_forest(const BipartiteDataset& data, const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) throw ContractError("n_trees must be at least 1");
  params.tree.validate();
  const TrainingSet set(data);
  OxyForest forest;
  forest.seed = seed;
  forest.params = params;
  forest.params.tree = resolve_params(params.tree, set);
  forest.width1 = data.x1.cols();
  forest.width2 = data.x2.cols();
  if (params.tree.leaf == LeafKind::RlsKron) forest.features = set.features();
  forest.trees.resize(params.n_trees);
  parallel_for(params.n_trees, params.threads, [&](std::size_t i) {
    Rng rng(child_seed(seed, i));
    if (params.bootstrap) {
      IndexList rows = detail::bootstrap_axis(data.n_rows(), rng);
      IndexList cols = detail::bootstrap_axis(data.n_cols(), rng);
      forest.trees[i] = build_tree(set, std::move(rows), std::move(cols), params.tree, rng);
    } else {
      forest.trees[i] = build_tree(set, params.tree, rng);
    }
  });
  return forest;
}

// Score matrix of every tree, in tree order.
inline std::vector<Matrix> predict_per_tree(const OxyForest& forest, const Matrix& x1_test, const Matrix& x2_test,
                                            Index threads = 1) {
  std::vector<Matrix> out(forest.trees.size());
  parallel_for(forest.trees.size(), threads,
               [&](std::size_t i) { out[i] = predict(forest.trees[i], x1_test, x2_test); });
  return out;
}

// Mean of the first `first_k` trees (all when unset). Per-tree outputs are
// summed in tree order.
inline Matrix predict_forest(const OxyForest& forest, const Matrix& x1_test, const Matrix& x2_test,
                             std::optional<Index> first_k = std::nullopt, Index threads = 1) {
  const Index k = first_k.value_or(forest.trees.size());
  if (k < 1 || k > forest.trees.size()) {
    throw ContractError("first_k must lie in [1, " + std::to_string(forest.trees.size()) + "]");
  }
  std::vector<Matrix> per_tree(k);
  parallel_for(k, threads, [&](std::size_t i) { per_tree[i] = predict(forest.trees[i], x1_test, x2_test); });
  Matrix acc(x1_test.rows(), x2_test.rows(), 0.0);
  for (const auto& m : per_tree) {
    auto dst = acc.values();
    auto src = m.values();
    for (Index e = 0; e < dst.size(); ++e) dst[e] += src[e];
  }
  for (double& v : acc.values()) v /= static_cast<double>(k);
  return acc;
}

}  // namespace oxytrees
