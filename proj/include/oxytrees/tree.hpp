#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "oxytrees/dataset.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/impurity.hpp"
#include "oxytrees/leaf_models.hpp"
#include "oxytrees/matrix.hpp"
#include "oxytrees/random.hpp"

namespace oxytrees {

// Rows: the rule cuts the row instances using a column of x1.
// Cols: the rule cuts the column instances using a column of x2.
enum class Axis : std::uint8_t { Rows = 0, Cols = 1 };

inline const char* to_string(Axis a) { return a == Axis::Rows ? "rows" : "cols"; }

// Instance goes left when feature value <= threshold.
struct SplitRule {
  Axis axis = Axis::Rows;
  Index feature = 0;
  double threshold = 0.0;
  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

enum class LeafKind { Mean, RlsKron };
enum class SplitEvaluator { Proxy, Naive };
enum class NormMode { Global, Node };

struct TreeParams {
  Index min_rows = 5;
  Index min_cols = 5;
  Index max_features_rows = 0;  // 0: ceil(sqrt(x1 width))
  Index max_features_cols = 0;  // 0: ceil(sqrt(x2 width))
  bool exhaustive_thresholds = false;
  SplitEvaluator evaluator = SplitEvaluator::Proxy;
  NormMode norm = NormMode::Global;
  LeafKind leaf = LeafKind::RlsKron;
  double alpha = 1.0;
  std::optional<KernelConfig> kernel1;  // default: precomputed or rbf(1/width)
  std::optional<KernelConfig> kernel2;

  // Grown until every node is pure.
  static TreeParams deep(TreeParams base) {
    base.min_rows = 1;
    base.min_cols = 1;
    return base;
  }
  static TreeParams deep();

  void validate() const {
    if (min_rows < 1 || min_cols < 1) throw ContractError("minimum leaf dimensions must be >= 1");
    if (leaf == LeafKind::RlsKron && !(alpha > 0.0)) throw ContractError("alpha must be positive");
  }
};

inline TreeParams TreeParams::deep() { return deep(TreeParams{}); }

struct TreeNode {
  bool is_leaf = true;
  SplitRule rule;
  Index left = 0;
  Index right = 0;
  Index leaf = 0;  // index into OxyTree::leaves
};

struct TrainingFeatures {
  Matrix x1;
  Matrix x2;
};

struct OxyTree {
  std::vector<TreeNode> nodes;
  std::vector<LeafModel> leaves;
  Index root = 0;
  TreeParams params;  // with max features and kernels resolved
  std::uint64_t seed = 0;
  Index width1 = 0;  // x1 feature count at training time
  Index width2 = 0;
  // Training features, needed by Linear/Rbf leaf kernels.
  std::shared_ptr<const TrainingFeatures> features;

  Index n_leaves() const noexcept { return leaves.size(); }

  Index depth() const {
    std::vector<std::pair<Index, Index>> stack{{root, 0}};
    Index best = 0;
    while (!stack.empty()) {
      auto [id, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[id].is_leaf) {
        stack.push_back({nodes[id].left, d + 1});
        stack.push_back({nodes[id].right, d + 1});
      }
    }
    return best;
  }
};

// Read-only training data shared by the trees of a forest.
class TrainingSet {
 public:
  explicit TrainingSet(const BipartiteDataset& data)
      : features_(std::make_shared<TrainingFeatures>(TrainingFeatures{data.x1, data.x2})),
        y_(data.y),
        x1_t_(data.x1.transposed()),
        x2_t_(data.x2.transposed()),
        precomputed_(data.precomputed) {
    data.validate();
  }

  const Matrix& x1() const noexcept { return features_->x1; }
  const Matrix& x2() const noexcept { return features_->x2; }
  const Matrix& y() const noexcept { return y_; }
  // Feature-major copies: row f holds feature f of every instance.
  const Matrix& x1_by_feature() const noexcept { return x1_t_; }
  const Matrix& x2_by_feature() const noexcept { return x2_t_; }
  bool precomputed() const noexcept { return precomputed_; }
  const std::shared_ptr<const TrainingFeatures>& features() const noexcept { return features_; }

 private:
  std::shared_ptr<const TrainingFeatures> features_;
  Matrix y_;
  Matrix x1_t_;
  Matrix x2_t_;
  bool precomputed_;
};

// Fills the defaulted fields of `p` for this training set.
inline TreeParams resolve_params(TreeParams p, const TrainingSet& set) {
  auto default_features = [](Index width) {
    return static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(width))));
  };
  const Index m1 = set.x1().cols(), m2 = set.x2().cols();
  p.max_features_rows = std::min(p.max_features_rows ? p.max_features_rows : default_features(m1), m1);
  p.max_features_cols = std::min(p.max_features_cols ? p.max_features_cols : default_features(m2), m2);
  auto default_kernel = [&](Index width) {
    return set.precomputed() ? KernelConfig::precomputed()
                             : KernelConfig::rbf(1.0 / static_cast<double>(std::max<Index>(width, 1)));
  };
  if (!p.kernel1) p.kernel1 = default_kernel(m1);
  if (!p.kernel2) p.kernel2 = default_kernel(m2);
  return p;
}

struct CandidateRule {
  Axis axis = Axis::Rows;
  Index feature = 0;
  double threshold = 0.0;
};

struct SplitCandidate {
  SplitRule rule;
  double delta = kEmptySide;
  Index n_left = 0;          // instances of the split axis sent left
  bool admissible = false;   // both children meet the minimum leaf dimensions
};

// Everything the builder saw at one internal-or-leaf node.
struct NodeTrace {
  IndexList rows;
  IndexList cols;
  double n_norm = 0.0;
  std::vector<SplitCandidate> candidates;
  std::optional<Index> chosen;  // index into candidates
};

using SplitObserver = std::function<void(const NodeTrace&)>;

namespace detail {

inline bool axis_splittable(Index count, Index min_size) { return count >= std::max<Index>(2, 2 * min_size); }

inline std::tuple<int, Index, double> rule_key(const SplitRule& r) {
  return {static_cast<int>(r.axis), r.feature, r.threshold};
}

}  // namespace detail

// Picks the admissible candidate of largest delta; candidates within 1e-12 of
// the maximum are resolved by (axis Rows first, feature, threshold).
inline std::optional<Index> select_best(std::span<const SplitCandidate> cands) {
  double best = kEmptySide;
  for (const auto& c : cands)
    if (c.admissible && c.delta > best) best = c.delta;
  if (best == kEmptySide) return std::nullopt;
  std::optional<Index> chosen;
  for (Index k = 0; k < cands.size(); ++k) {
    const auto& c = cands[k];
    if (!c.admissible || c.delta < best - 1e-12) continue;
    if (!chosen || detail::rule_key(c.rule) < detail::rule_key(cands[*chosen].rule)) chosen = k;
  }
  return chosen;
}

namespace detail {

// Feature values of one node, feature-major: row f holds feature f over the
// node instances in order. Filled on first use; when most features will be
// drawn, all of them are gathered at once from the sample-major matrix.
class NodeFeatures {
 public:
  NodeFeatures(const Matrix& by_sample, const Matrix& by_feature, std::span<const Index> ids, Index draws,
               std::vector<double>& storage)
      : by_feature_(by_feature), ids_(ids) {
    const Index m = by_sample.cols(), n = ids.size();
    if (storage.size() < m * n) storage.resize(m * n);
    buf_ = storage.data();
    ready_.assign(m, 0);
    if (2 * draws >= m) {
      for (Index k = 0; k < n; ++k) {
        const auto src = by_sample.row(ids[k]);
        for (Index f = 0; f < m; ++f) buf_[f * n + k] = src[f];
      }
      ready_.assign(m, 1);
    }
  }

  std::span<const double> operator()(Index f) {
    const Index n = ids_.size();
    double* dst = buf_ + f * n;
    if (!ready_[f]) {
      const auto column = by_feature_.row(f);
      for (Index k = 0; k < n; ++k) dst[k] = column[ids_[k]];
      ready_[f] = 1;
    }
    return {dst, n};
  }

 private:
  const Matrix& by_feature_;
  std::span<const Index> ids_;
  double* buf_ = nullptr;
  std::vector<char> ready_;
};

template <class Values>
void sample_axis_candidates(Axis axis, Index m, Index max_features, const TreeParams& params, Rng& rng,
                            Values&& values_of, std::vector<CandidateRule>& out) {
  const Index draws = std::min(max_features, m);
  std::vector<Index> features(m);
  std::iota(features.begin(), features.end(), Index{0});
  std::vector<double> sorted;
  for (Index d = 0; d < draws; ++d) {
    const Index pick = d + rng.below(m - d);
    std::swap(features[d], features[pick]);
    const Index f = features[d];
    const std::span<const double> values = values_of(f);
    if (!params.exhaustive_thresholds) {
      double lo = values[0], hi = lo;
      for (double v : values) {
        lo = v < lo ? v : lo;
        hi = v > hi ? v : hi;
      }
      if (!(lo < hi)) continue;
      double t = lo + rng.uniform() * (hi - lo);
      if (t >= hi) t = std::nextafter(hi, lo);
      out.push_back({axis, f, t});
    } else {
      sorted.assign(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      for (Index k = 1; k < sorted.size(); ++k) {
        if (sorted[k] > sorted[k - 1]) {
          double t = sorted[k - 1] + 0.5 * (sorted[k] - sorted[k - 1]);
          if (t >= sorted[k]) t = sorted[k - 1];
          out.push_back({axis, f, t});
        }
      }
    }
  }
}

}  // namespace detail

// Extra-trees candidate generation on the node (rows, cols). Per splittable
// axis, draws up to max_features features without replacement and one
// uniform threshold in (min, max) of each non-constant feature over the node
// instances. With exhaustive_thresholds every midpoint between consecutive
// distinct values is proposed instead.
inline std::vector<CandidateRule> sample_candidates(const TrainingSet& set, std::span<const Index> rows,
                                                    std::span<const Index> cols, const TreeParams& params,
                                                    Rng& rng) {
  std::vector<CandidateRule> out;
  std::vector<double> storage;
  if (detail::axis_splittable(rows.size(), params.min_rows)) {
    detail::NodeFeatures v(set.x1(), set.x1_by_feature(), rows, 0, storage);
    detail::sample_axis_candidates(Axis::Rows, set.x1().cols(), params.max_features_rows, params, rng, v, out);
  }
  if (detail::axis_splittable(cols.size(), params.min_cols)) {
    detail::NodeFeatures v(set.x2(), set.x2_by_feature(), cols, 0, storage);
    detail::sample_axis_candidates(Axis::Cols, set.x2().cols(), params.max_features_cols, params, rng, v, out);
  }
  return out;
}

namespace detail {

// Node statistics aggregated directly from Y.
inline ImpurityStats block_stats(const Matrix& y, std::span<const Index> rows, std::span<const Index> cols) {
  ImpurityStats st;
  for (Index i : rows) {
    const auto yr = y.row(i);
    for (Index j : cols) st.add(yr[j]);
  }
  return st;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& set, const TreeParams& params, Rng& rng, const SplitObserver* observer)
      : set_(set), params_(params), rng_(rng), observer_(observer) {}

  OxyTree build(IndexList rows, IndexList cols) {
    OxyTree tree;
    tree.params = params_;
    tree.seed = rng_.seed();
    tree.width1 = set_.x1().cols();
    tree.width2 = set_.x2().cols();
    if (params_.leaf == LeafKind::RlsKron) tree.features = set_.features();
    if (rows.empty() || cols.empty()) throw ContractError("build_tree: empty training view");
    n_norm_global_ = static_cast<double>(rows.size() * cols.size());

    struct Pending {
      Index node;
      IndexList rows;
      IndexList cols;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(rows), std::move(cols)});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      auto split = find_split(job.rows, job.cols);
      if (!split) {
        tree.nodes[job.node].is_leaf = true;
        tree.nodes[job.node].leaf = tree.leaves.size();
        tree.leaves.push_back(fit_leaf(job.rows, job.cols));
        continue;
      }
      IndexList left_ids, right_ids;
      const bool by_rows = split->axis == Axis::Rows;
      const Matrix& by_feature = by_rows ? set_.x1_by_feature() : set_.x2_by_feature();
      const auto column = by_feature.row(split->feature);
      for (Index id : by_rows ? job.rows : job.cols) {
        (column[id] <= split->threshold ? left_ids : right_ids).push_back(id);
      }
      const Index left = tree.nodes.size();
      const Index right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[job.node];
      node.is_leaf = false;
      node.rule = *split;
      node.left = left;
      node.right = right;
      if (by_rows) {
        stack.push_back({right, std::move(right_ids), job.cols});
        stack.push_back({left, std::move(left_ids), std::move(job.cols)});
      } else {
        stack.push_back({right, job.rows, std::move(right_ids)});
        stack.push_back({left, std::move(job.rows), std::move(left_ids)});
      }
    }
    return tree;
  }

 private:
  std::optional<SplitRule> find_split(const IndexList& rows, const IndexList& cols) {
    const bool proxy = params_.evaluator == SplitEvaluator::Proxy;
    ProxyPair proxies;
    ImpurityStats node;
    if (proxy) {
      proxies = build_proxies(set_.y(), rows, cols);
      node = total_stats(proxies.p1);
    } else {
      node = block_stats(set_.y(), rows, cols);
    }
    const double n_norm =
        params_.norm == NormMode::Global ? n_norm_global_ : static_cast<double>(rows.size() * cols.size());

    NodeTrace trace;
    if (observer_) {
      trace.rows = rows;
      trace.cols = cols;
      trace.n_norm = n_norm;
    }
    auto finish = [&](std::optional<Index> chosen) -> std::optional<SplitRule> {
      if (observer_) {
        trace.chosen = chosen;
        (*observer_)(trace);
      }
      if (!chosen) return std::nullopt;
      return trace.candidates[*chosen].rule;
    };

    if (impurity(node) == 0.0) return finish(std::nullopt);
    std::vector<CandidateRule> rules;
    std::optional<NodeFeatures> row_values, col_values;
    if (axis_splittable(rows.size(), params_.min_rows)) {
      row_values.emplace(set_.x1(), set_.x1_by_feature(), rows, params_.max_features_rows, row_scratch_);
      sample_axis_candidates(Axis::Rows, set_.x1().cols(), params_.max_features_rows, params_, rng_, *row_values,
                             rules);
    }
    if (axis_splittable(cols.size(), params_.min_cols)) {
      col_values.emplace(set_.x2(), set_.x2_by_feature(), cols, params_.max_features_cols, col_scratch_);
      sample_axis_candidates(Axis::Cols, set_.x2().cols(), params_.max_features_cols, params_, rng_, *col_values,
                             rules);
    }
    if (rules.empty()) return finish(std::nullopt);

    trace.candidates.reserve(rules.size());
    std::vector<double> thresholds;
    for (Index begin = 0; begin < rules.size();) {
      Index end = begin + 1;
      while (end < rules.size() && rules[end].axis == rules[begin].axis &&
             rules[end].feature == rules[begin].feature)
        ++end;
      const bool by_rows = rules[begin].axis == Axis::Rows;
      const IndexList& ids = by_rows ? rows : cols;
      const Index min_side = by_rows ? params_.min_rows : params_.min_cols;
      const auto values = (by_rows ? *row_values : *col_values)(rules[begin].feature);
      thresholds.clear();
      for (Index k = begin; k < end; ++k) thresholds.push_back(rules[k].threshold);

      if (proxy) {
        const auto scored = scan_axis_splits(by_rows ? proxies.p1 : proxies.p2, values, thresholds, n_norm);
        for (Index k = 0; k < scored.size(); ++k) {
          push_candidate(trace, rules[begin + k], scored[k].delta, scored[k].n_left, ids.size(), min_side);
        }
      } else {
        for (Index k = begin; k < end; ++k) {
          auto [delta, n_left] = naive_delta(rows, cols, by_rows, values, rules[k].threshold, node, n_norm);
          push_candidate(trace, rules[k], delta, n_left, ids.size(), min_side);
        }
      }
      begin = end;
    }
    return finish(select_best(trace.candidates));
  }

  static void push_candidate(NodeTrace& trace, const CandidateRule& r, double delta, Index n_left,
                             Index n_axis, Index min_side) {
    SplitCandidate c;
    c.rule = {r.axis, r.feature, r.threshold};
    c.delta = delta;
    c.n_left = n_left;
    c.admissible = delta != kEmptySide && n_left >= min_side && n_axis - n_left >= min_side;
    trace.candidates.push_back(c);
  }

  // Both children aggregated straight from Y, without the proxies.
  std::pair<double, Index> naive_delta(const IndexList& rows, const IndexList& cols, bool by_rows,
                                       std::span<const double> values, double threshold,
                                       const ImpurityStats& node, double n_norm) const {
    ImpurityStats left, right;
    Index n_left = 0;
    const Matrix& y = set_.y();
    if (by_rows) {
      for (Index k = 0; k < rows.size(); ++k) {
        const bool go_left = values[k] <= threshold;
        n_left += go_left;
        ImpurityStats& side = go_left ? left : right;
        const auto yr = y.row(rows[k]);
        for (Index j : cols) side.add(yr[j]);
      }
    } else {
      for (Index i : rows) {
        const auto yr = y.row(i);
        for (Index k = 0; k < cols.size(); ++k) (values[k] <= threshold ? left : right).add(yr[cols[k]]);
      }
      for (double v : values) n_left += v <= threshold;
    }
    if (left.count() == 0.0 || right.count() == 0.0) return {kEmptySide, n_left};
    return {weighted_delta(node, left, right, n_norm), n_left};
  }

  LeafModel fit_leaf(const IndexList& rows, const IndexList& cols) const {
    if (params_.leaf == LeafKind::Mean) return mean_fit(set_.y().select(rows, cols));
    return rls_kron_leaf_fit(set_.x1(), set_.x2(), set_.y(), rows, cols, *params_.kernel1, *params_.kernel2,
                             params_.alpha);
  }

  const TrainingSet& set_;
  const TreeParams& params_;
  Rng& rng_;
  const SplitObserver* observer_;
  double n_norm_global_ = 1.0;
  std::vector<double> row_scratch_, col_scratch_;
};

}  // namespace detail

// Grows one tree on the training view (rows, cols). Leaves are fitted with
// the configured leaf model; `observer`, when given, sees every node.
inline OxyTree build_tree(const TrainingSet& set, IndexList rows, IndexList cols, TreeParams params, Rng& rng,
                          const SplitObserver* observer = nullptr) {
  params.validate();
  params = resolve_params(std::move(params), set);
  for (Index r : rows)
    if (r >= set.y().rows()) throw ContractError("build_tree: row index out of range");
  for (Index c : cols)
    if (c >= set.y().cols()) throw ContractError("build_tree: column index out of range");
  detail::TreeBuilder builder(set, params, rng, observer);
  return builder.build(std::move(rows), std::move(cols));
}

inline OxyTree build_tree(const TrainingSet& set, const TreeParams& params, Rng& rng,
                          const SplitObserver* observer = nullptr) {
  IndexList rows(set.y().rows()), cols(set.y().cols());
  std::iota(rows.begin(), rows.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  return build_tree(set, std::move(rows), std::move(cols), params, rng, observer);
}

inline OxyTree build_tree(const BipartiteDataset& data, const TreeParams& params, Rng& rng,
                          const SplitObserver* observer = nullptr) {
  return build_tree(TrainingSet(data), params, rng, observer);
}

namespace detail {

inline void check_widths(const OxyTree& tree, const Matrix& x1, const Matrix& x2) {
  if (x1.rows() > 0 && x1.cols() != tree.width1) {
    throw DimensionError("x1 has " + std::to_string(x1.cols()) + " features, tree expects " +
                         std::to_string(tree.width1));
  }
  if (x2.rows() > 0 && x2.cols() != tree.width2) {
    throw DimensionError("x2 has " + std::to_string(x2.cols()) + " features, tree expects " +
                         std::to_string(tree.width2));
  }
}

template <class Fn>
void descend(const OxyTree& tree, const Matrix& x1, const Matrix& x2, Index node_id, std::span<Index> rows,
             std::span<Index> cols, Fn& fn) {
  const TreeNode& node = tree.nodes[node_id];
  if (node.is_leaf) {
    fn(node_id, std::span<const Index>(rows), std::span<const Index>(cols));
    return;
  }
  const SplitRule& r = node.rule;
  if (r.axis == Axis::Rows) {
    const auto mid = std::partition(rows.begin(), rows.end(),
                                    [&](Index i) { return x1(i, r.feature) <= r.threshold; });
    const auto n_left = static_cast<Index>(mid - rows.begin());
    if (n_left > 0) descend(tree, x1, x2, node.left, rows.first(n_left), cols, fn);
    if (n_left < rows.size()) descend(tree, x1, x2, node.right, rows.subspan(n_left), cols, fn);
  } else {
    const auto mid = std::partition(cols.begin(), cols.end(),
                                    [&](Index j) { return x2(j, r.feature) <= r.threshold; });
    const auto n_left = static_cast<Index>(mid - cols.begin());
    if (n_left > 0) descend(tree, x1, x2, node.left, rows, cols.first(n_left), fn);
    if (n_left < cols.size()) descend(tree, x1, x2, node.right, rows, cols.subspan(n_left), fn);
  }
}

}  // namespace detail

// Batch leaf assignment: the test rows and columns travel down the tree
// together; each rule partitions only its own axis and the other axis is
// handed to both children unchanged. Calls fn(leaf node id, rows, cols) once
// per nonempty leaf block. The blocks tile the test grid.
template <class Fn>
void for_each_leaf_block(const OxyTree& tree, const Matrix& x1_test, const Matrix& x2_test, Fn&& fn) {
  detail::check_widths(tree, x1_test, x2_test);
  if (x1_test.rows() == 0 || x2_test.rows() == 0) return;
  IndexList rows(x1_test.rows()), cols(x2_test.rows());
  std::iota(rows.begin(), rows.end(), Index{0});
  std::iota(cols.begin(), cols.end(), Index{0});
  detail::descend(tree, x1_test, x2_test, tree.root, std::span<Index>(rows), std::span<Index>(cols), fn);
}

struct LeafBlock {
  Index leaf = 0;  // node id
  IndexList rows;  // ascending
  IndexList cols;  // ascending
};

inline std::vector<LeafBlock> assign_leaves_batch(const OxyTree& tree, const Matrix& x1_test,
                                                  const Matrix& x2_test) {
  std::vector<LeafBlock> blocks;
  for_each_leaf_block(tree, x1_test, x2_test,
                      [&](Index leaf, std::span<const Index> rows, std::span<const Index> cols) {
                        LeafBlock b{leaf, {rows.begin(), rows.end()}, {cols.begin(), cols.end()}};
                        std::sort(b.rows.begin(), b.rows.end());
                        std::sort(b.cols.begin(), b.cols.end());
                        blocks.push_back(std::move(b));
                      });
  return blocks;
}

// Per-dyad root-to-leaf walk; returns the leaf node id.
inline Index traverse_dyad(const OxyTree& tree, std::span<const double> x1_row, std::span<const double> x2_row) {
  if (x1_row.size() != tree.width1 || x2_row.size() != tree.width2) {
    throw DimensionError("traverse_dyad: feature widths do not match the tree");
  }
  Index id = tree.root;
  while (!tree.nodes[id].is_leaf) {
    const TreeNode& n = tree.nodes[id];
    const double v = n.rule.axis == Axis::Rows ? x1_row[n.rule.feature] : x2_row[n.rule.feature];
    id = v <= n.rule.threshold ? n.left : n.right;
  }
  return id;
}

// Scores of a block of test rows/columns under one leaf.
inline Matrix predict_leaf(const OxyTree& tree, const LeafModel& leaf, const Matrix& x1_block,
                           const Matrix& x2_block) {
  if (const auto* mean = std::get_if<MeanLeaf>(&leaf)) {
    return mean_predict(*mean, x1_block.rows(), x2_block.rows());
  }
  const auto& kron = std::get<RlsKronLeaf>(leaf);
  static const Matrix kEmpty;
  const Matrix& x1_train = tree.features ? tree.features->x1 : kEmpty;
  const Matrix& x2_train = tree.features ? tree.features->x2 : kEmpty;
  return rls_kron_leaf_predict(kron, x1_train, x2_train, x1_block, x2_block);
}

// Score matrix over x1_test x x2_test.
inline Matrix predict(const OxyTree& tree, const Matrix& x1_test, const Matrix& x2_test) {
  Matrix out(x1_test.rows(), x2_test.rows());
  for_each_leaf_block(tree, x1_test, x2_test,
                      [&](Index leaf_node, std::span<const Index> rows, std::span<const Index> cols) {
                        const LeafModel& leaf = tree.leaves[tree.nodes[leaf_node].leaf];
                        Matrix block;
                        if (std::holds_alternative<MeanLeaf>(leaf)) {
                          block = Matrix(rows.size(), cols.size(), std::get<MeanLeaf>(leaf).value);
                        } else {
                          block = predict_leaf(tree, leaf, x1_test.select_rows(rows), x2_test.select_rows(cols));
                        }
                        for (Index a = 0; a < rows.size(); ++a)
                          for (Index b = 0; b < cols.size(); ++b) out(rows[a], cols[b]) = block(a, b);
                      });
  return out;
}

}  // namespace oxytrees
