#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oxytrees/dataset.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/random.hpp"
#include "oxytrees/tree.hpp"

namespace oxytrees {

// Features uniform in [0, 1), labels Bernoulli(density).
inline BipartiteDataset gen_synthetic(Index n1, Index n2, Index m1, Index m2, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density < 1.0)) throw ContractError("density must lie in (0, 1)");
  Rng rng(seed);
  BipartiteDataset d{Matrix(n1, m1), Matrix(n2, m2), Matrix(n1, n2), false};
  for (double& v : d.x1.values()) v = rng.uniform();
  for (double& v : d.x2.values()) v = rng.uniform();
  for (double& v : d.y.values()) v = rng.bernoulli(density) ? 1.0 : 0.0;
  return d;
}

struct PlantedOptions {
  Index blocks = 3;
  Index noise_features = 5;
  double flip = 0.05;
};

// Block-structured interactions: instance i of a domain with n instances
// belongs to block floor(i * blocks / n); dyads in diagonal blocks are
// positive, then every label is flipped with probability `flip`. Features are
// a one-hot block indicator followed by uniform noise columns.
inline BipartiteDataset gen_planted(Index n1, Index n2, std::uint64_t seed, PlantedOptions opt = {}) {
  if (opt.blocks < 1 || opt.blocks > std::min(n1, n2)) throw ContractError("invalid block count");
  if (!(opt.flip >= 0.0 && opt.flip < 0.5)) throw ContractError("flip probability must lie in [0, 0.5)");
  Rng rng(seed);
  auto block_of = [&](Index i, Index n) { return i * opt.blocks / n; };
  auto features = [&](Index n) {
    Matrix x(n, opt.blocks + opt.noise_features);
    for (Index i = 0; i < n; ++i) {
      x(i, block_of(i, n)) = 1.0;
      for (Index f = 0; f < opt.noise_features; ++f) x(i, opt.blocks + f) = rng.uniform();
    }
    return x;
  };
  BipartiteDataset d;
  d.x1 = features(n1);
  d.x2 = features(n2);
  d.y = Matrix(n1, n2);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) {
      const bool planted = block_of(i, n1) == block_of(j, n2);
      d.y(i, j) = (planted != rng.bernoulli(opt.flip)) ? 1.0 : 0.0;
    }
  return d;
}

struct SlopeFit {
  double slope = 0.0;
  double stddev = 0.0;  // standard error of the slope; 0 with only two points
  Index points = 0;
};

// Least-squares slope of log(time) on log(size) over the last
// `tail_fraction` of the points (at least two).
inline SlopeFit fit_slope(std::span<const double> sizes, std::span<const double> times, double tail_fraction = 0.10) {
  if (sizes.size() != times.size()) throw DimensionError("fit_slope: sizes and times differ in length");
  if (sizes.size() < 2) throw ContractError("fit_slope: need at least two points");
  for (Index k = 0; k < sizes.size(); ++k) {
    if (!(times[k] > 0.0)) throw ContractError("fit_slope: nonpositive time");
    if (!(sizes[k] > 0.0)) throw ContractError("fit_slope: nonpositive size");
  }
  const auto tail = std::max<Index>(2, static_cast<Index>(std::floor(tail_fraction * static_cast<double>(sizes.size()))));
  const Index first = sizes.size() - tail;
  double mx = 0.0, my = 0.0;
  for (Index k = first; k < sizes.size(); ++k) {
    mx += std::log(sizes[k]);
    my += std::log(times[k]);
  }
  mx /= static_cast<double>(tail);
  my /= static_cast<double>(tail);
  double sxx = 0.0, sxy = 0.0;
  for (Index k = first; k < sizes.size(); ++k) {
    const double dx = std::log(sizes[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(times[k]) - my);
  }
  if (sxx == 0.0) throw ContractError("fit_slope: sizes in the tail are identical");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.points = tail;
  if (tail > 2) {
    double rss = 0.0;
    for (Index k = first; k < sizes.size(); ++k) {
      const double r = std::log(times[k]) - my - fit.slope * (std::log(sizes[k]) - mx);
      rss += r * r;
    }
    fit.stddev = std::sqrt(rss / static_cast<double>(tail - 2) / sxx);
  }
  return fit;
}

struct BenchSeries {
  std::string method;
  std::vector<Index> sizes;
  std::vector<double> seconds;  // median per size
  std::optional<SlopeFit> slope;
};

struct BenchResult {
  std::vector<BenchSeries> series;

  const BenchSeries& get(const std::string& method) const {
    for (const auto& s : series)
      if (s.method == method) return s;
    throw ContractError("no benchmark series '" + method + "'");
  }
};

// Median wall time of `repeats` runs of fn after one discarded warm-up run.
template <class Fn>
double time_median(Index repeats, Fn&& fn) {
  using clock = std::chrono::steady_clock;
  fn();
  std::vector<double> t;
  for (Index r = 0; r < std::max<Index>(repeats, 1); ++r) {
    const auto start = clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  const Index mid = t.size() / 2;
  return t.size() % 2 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
}

namespace detail {

inline void check_grid(std::span<const Index> grid) {
  if (grid.empty()) throw ContractError("benchmark grid is empty");
  for (Index k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1]) throw ContractError("benchmark grid must be strictly increasing");
}

inline void attach_slopes(BenchResult& r) {
  for (auto& s : r.series) {
    if (s.sizes.size() < 2) continue;
    std::vector<double> x(s.sizes.begin(), s.sizes.end());
    s.slope = fit_slope(x, s.seconds);
  }
}

}  // namespace detail

struct BuildBenchOptions {
  Index repeats = 3;
  std::uint64_t seed = 0;
  Index min_leaf = 5;
  bool include_naive = true;
  bool include_deep = true;
};

// Single-tree build times on n x n data with n features per domain, every
// feature evaluated at each node. Methods: "proxy", "naive" (children
// re-aggregated from Y per candidate) and "deep" (proxy, grown to purity).
// Mean leaves, so only the split search is compared.
inline BenchResult bench_build(std::span<const Index> sizes, const BuildBenchOptions& opt = {}) {
  detail::check_grid(sizes);
  BenchResult result;
  result.series.push_back({"proxy", {}, {}, std::nullopt});
  if (opt.include_naive) result.series.push_back({"naive", {}, {}, std::nullopt});
  if (opt.include_deep) result.series.push_back({"deep", {}, {}, std::nullopt});
  for (Index n : sizes) {
    const TrainingSet set(gen_synthetic(n, n, n, n, 0.5, child_seed(opt.seed, n)));
    TreeParams base;
    base.leaf = LeafKind::Mean;
    base.min_rows = opt.min_leaf;
    base.min_cols = opt.min_leaf;
    base.max_features_rows = n;
    base.max_features_cols = n;
    for (auto& s : result.series) {
      TreeParams p = base;
      if (s.method == "naive") p.evaluator = SplitEvaluator::Naive;
      if (s.method == "deep") p = TreeParams::deep(p);
      const double t = time_median(opt.repeats, [&] {
        Rng rng(child_seed(opt.seed, n + 1));
        auto tree = build_tree(set, p, rng);
        if (tree.nodes.empty()) throw NumericError("empty tree");
      });
      s.sizes.push_back(n);
      s.seconds.push_back(t);
    }
  }
  detail::attach_slopes(result);
  return result;
}

// Tree of random rules: at each node a random splittable axis, a random
// feature and a uniform threshold between the node's extremes of that
// feature. Stops when neither axis can be cut into two parts of at least
// (min_rows, min_cols). Leaves predict 0.
inline OxyTree build_random_tree(const Matrix& x1, const Matrix& x2, Index min_rows, Index min_cols, Rng& rng) {
  OxyTree tree;
  tree.width1 = x1.cols();
  tree.width2 = x2.cols();
  tree.params.leaf = LeafKind::Mean;
  tree.params.min_rows = min_rows;
  tree.params.min_cols = min_cols;
  tree.seed = rng.seed();
  struct Job {
    Index node;
    IndexList rows;
    IndexList cols;
  };
  IndexList rows(x1.rows()), cols(x2.rows());
  std::iota(rows.begin(), rows.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  tree.nodes.emplace_back();
  std::vector<Job> stack{{0, std::move(rows), std::move(cols)}};
  constexpr int kAttempts = 8;
  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();
    const bool can_rows = detail::axis_splittable(job.rows.size(), min_rows) && x1.cols() > 0;
    const bool can_cols = detail::axis_splittable(job.cols.size(), min_cols) && x2.cols() > 0;
    std::optional<SplitRule> rule;
    IndexList left, right;
    for (int attempt = 0; attempt < kAttempts && (can_rows || can_cols) && !rule; ++attempt) {
      const bool by_rows = can_rows && (!can_cols || rng.below(2) == 0);
      const Matrix& x = by_rows ? x1 : x2;
      const IndexList& ids = by_rows ? job.rows : job.cols;
      const Index min_side = by_rows ? min_rows : min_cols;
      const Index f = rng.below(x.cols());
      double lo = x(ids[0], f), hi = lo;
      for (Index id : ids) {
        lo = std::min(lo, x(id, f));
        hi = std::max(hi, x(id, f));
      }
      if (!(lo < hi)) continue;
      double t = lo + rng.uniform() * (hi - lo);
      if (t >= hi) t = std::nextafter(hi, lo);
      left.clear();
      right.clear();
      for (Index id : ids) (x(id, f) <= t ? left : right).push_back(id);
      if (left.size() < min_side || right.size() < min_side) continue;
      rule = SplitRule{by_rows ? Axis::Rows : Axis::Cols, f, t};
    }
    if (!rule) {
      tree.nodes[job.node].is_leaf = true;
      tree.nodes[job.node].leaf = tree.leaves.size();
      tree.leaves.push_back(MeanLeaf{0.0});
      continue;
    }
    const Index l = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[job.node] = TreeNode{false, *rule, l, l + 1, 0};
    if (rule->axis == Axis::Rows) {
      stack.push_back({l + 1, std::move(right), job.cols});
      stack.push_back({l, std::move(left), std::move(job.cols)});
    } else {
      stack.push_back({l + 1, job.rows, std::move(right)});
      stack.push_back({l, std::move(job.rows), std::move(left)});
    }
  }
  return tree;
}

struct InferenceBenchOptions {
  Index n_test = 512;
  Index features = 16;
  Index min_leaf = 5;
  Index repeats = 3;
  std::uint64_t seed = 0;
};

// Leaf assignment of every dyad of an n_test x n_test grid by a random tree
// grown on n_train x n_train instances. Methods: "batch" (for_each_leaf_block)
// and "per_dyad" (traverse_dyad on each dyad). Both fill the same grid of
// leaf ids.
inline BenchResult bench_inference(std::span<const Index> train_sizes, const InferenceBenchOptions& opt = {}) {
  detail::check_grid(train_sizes);
  BenchResult result;
  result.series.push_back({"batch", {}, {}, std::nullopt});
  result.series.push_back({"per_dyad", {}, {}, std::nullopt});
  Rng test_rng(child_seed(opt.seed, 0));
  Matrix x1_test(opt.n_test, opt.features), x2_test(opt.n_test, opt.features);
  for (double& v : x1_test.values()) v = test_rng.uniform();
  for (double& v : x2_test.values()) v = test_rng.uniform();
  std::vector<Index> grid_batch(opt.n_test * opt.n_test), grid_dyad(opt.n_test * opt.n_test);

  for (Index n : train_sizes) {
    Rng rng(child_seed(opt.seed, n));
    Matrix x1(n, opt.features), x2(n, opt.features);
    for (double& v : x1.values()) v = rng.uniform();
    for (double& v : x2.values()) v = rng.uniform();
    const OxyTree tree = build_random_tree(x1, x2, opt.min_leaf, opt.min_leaf, rng);

    const double t_batch = time_median(opt.repeats, [&] {
      for_each_leaf_block(tree, x1_test, x2_test,
                          [&](Index leaf, std::span<const Index> rows, std::span<const Index> cols) {
                            for (Index i : rows) {
                              Index* out = grid_batch.data() + i * opt.n_test;
                              for (Index j : cols) out[j] = leaf;
                            }
                          });
    });
    const double t_dyad = time_median(opt.repeats, [&] {
      for (Index i = 0; i < opt.n_test; ++i) {
        const auto r1 = x1_test.row(i);
        Index* out = grid_dyad.data() + i * opt.n_test;
        for (Index j = 0; j < opt.n_test; ++j) out[j] = traverse_dyad(tree, r1, x2_test.row(j));
      }
    });
    if (grid_batch != grid_dyad) throw NumericError("batch and per-dyad leaf assignments disagree");
    result.series[0].sizes.push_back(n);
    result.series[0].seconds.push_back(t_batch);
    result.series[1].sizes.push_back(n);
    result.series[1].seconds.push_back(t_dyad);
  }
  detail::attach_slopes(result);
  return result;
}

}  // namespace oxytrees
