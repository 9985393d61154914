#pragma once

#include <fstream>
#include <memory>
#include <string>

#include "json.hpp"

#include "oxytrees/errors.hpp"
#include "oxytrees/forest.hpp"
#include "oxytrees/leaf_models.hpp"
#include "oxytrees/tree.hpp"

namespace oxytrees {

inline constexpr const char* kFormatVersion = "oxyforest-1";

using Json = nlohmann::json;

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(Json(std::vector<double>(r.begin(), r.end())));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, Index cols_if_empty = 0) {
  if (!j.is_array()) throw ContractError("model: matrix must be an array of rows");
  const Index rows = j.size();
  const Index cols = rows ? j[0].size() : cols_if_empty;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw ContractError("model: ragged matrix");
    for (Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline KernelConfig::Mode kernel_mode_from(const std::string& s) {
  if (s == "precomputed") return KernelConfig::Mode::Precomputed;
  if (s == "linear") return KernelConfig::Mode::Linear;
  if (s == "rbf") return KernelConfig::Mode::Rbf;
  throw ContractError("model: unknown kernel mode '" + s + "'");
}

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw ContractError(std::string("model: missing field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace detail

inline Json to_json(const KernelConfig& k) {
  Json j{{"mode", to_string(k.mode)}};
  if (k.mode == KernelConfig::Mode::Rbf) j["gamma"] = k.gamma;
  return j;
}

inline KernelConfig kernel_from_json(const Json& j) {
  KernelConfig k;
  k.mode = detail::kernel_mode_from(detail::required<std::string>(j, "mode"));
  if (k.mode == KernelConfig::Mode::Rbf) k = KernelConfig::rbf(detail::required<double>(j, "gamma"));
  return k;
}

// {"kind":"mean","value":v} or
// {"kind":"rls_kron","alpha":a,"w":[[...]],"rows":[...],"cols":[...],"kernel":{"rows":..,"cols":..}}
inline Json to_json(const LeafModel& leaf) {
  if (const auto* m = std::get_if<MeanLeaf>(&leaf)) return Json{{"kind", "mean"}, {"value", m->value}};
  const auto& k = std::get<RlsKronLeaf>(leaf);
  return Json{{"kind", "rls_kron"},
              {"alpha", k.alpha},
              {"w", detail::matrix_to_json(k.w)},
              {"rows", k.rows},
              {"cols", k.cols},
              {"kernel", {{"rows", to_json(k.kernel1)}, {"cols", to_json(k.kernel2)}}}};
}

inline LeafModel leaf_from_json(const Json& j) {
  const auto kind = detail::required<std::string>(j, "kind");
  if (kind == "mean") return MeanLeaf{detail::required<double>(j, "value")};
  if (kind != "rls_kron") throw ContractError("model: unknown leaf kind '" + kind + "'");
  RlsKronLeaf k;
  k.alpha = detail::required<double>(j, "alpha");
  k.rows = detail::required<IndexList>(j, "rows");
  k.cols = detail::required<IndexList>(j, "cols");
  k.w = detail::matrix_from_json(j.at("w"), k.cols.size());
  if (k.w.rows() != k.rows.size() || k.w.cols() != k.cols.size()) {
    throw ContractError("model: leaf coefficients do not match leaf dimensions");
  }
  const Json& kernel = j.at("kernel");
  k.kernel1 = kernel_from_json(kernel.at("rows"));
  k.kernel2 = kernel_from_json(kernel.at("cols"));
  return k;
}

inline Json to_json(const TreeParams& p) {
  Json j{{"min_rows", p.min_rows},
         {"min_cols", p.min_cols},
         {"max_features_rows", p.max_features_rows},
         {"max_features_cols", p.max_features_cols},
         {"exhaustive_thresholds", p.exhaustive_thresholds},
         {"evaluator", p.evaluator == SplitEvaluator::Proxy ? "proxy" : "naive"},
         {"norm", p.norm == NormMode::Global ? "global" : "node"},
         {"leaf", p.leaf == LeafKind::Mean ? "mean" : "rls_kron"},
         {"alpha", p.alpha}};
  if (p.kernel1) j["kernel_rows"] = to_json(*p.kernel1);
  if (p.kernel2) j["kernel_cols"] = to_json(*p.kernel2);
  return j;
}

inline TreeParams tree_params_from_json(const Json& j) {
  TreeParams p;
  p.min_rows = detail::required<Index>(j, "min_rows");
  p.min_cols = detail::required<Index>(j, "min_cols");
  p.max_features_rows = detail::required<Index>(j, "max_features_rows");
  p.max_features_cols = detail::required<Index>(j, "max_features_cols");
  p.exhaustive_thresholds = detail::required<bool>(j, "exhaustive_thresholds");
  p.evaluator = detail::required<std::string>(j, "evaluator") == "naive" ? SplitEvaluator::Naive
                                                                          : SplitEvaluator::Proxy;
  p.norm = detail::required<std::string>(j, "norm") == "node" ? NormMode::Node : NormMode::Global;
  p.leaf = detail::required<std::string>(j, "leaf") == "mean" ? LeafKind::Mean : LeafKind::RlsKron;
  p.alpha = detail::required<double>(j, "alpha");
  if (j.contains("kernel_rows")) p.kernel1 = kernel_from_json(j.at("kernel_rows"));
  if (j.contains("kernel_cols")) p.kernel2 = kernel_from_json(j.at("kernel_cols"));
  return p;
}

// Node array; hyperparameters and training features live in the forest header.
inline Json to_json(const OxyTree& tree) {
  Json nodes = Json::array();
  for (const auto& n : tree.nodes) {
    if (n.is_leaf) {
      nodes.push_back({{"kind", "leaf"}, {"leaf", to_json(tree.leaves[n.leaf])}});
    } else {
      nodes.push_back({{"kind", "split"},
                       {"axis", to_string(n.rule.axis)},
                       {"feature", n.rule.feature},
                       {"threshold", n.rule.threshold},
                       {"children", {n.left, n.right}}});
    }
  }
  return Json{{"seed", tree.seed}, {"root", tree.root}, {"nodes", std::move(nodes)}};
}

inline OxyTree tree_from_json(const Json& j, const TreeParams& params, Index width1, Index width2,
                              std::shared_ptr<const TrainingFeatures> features) {
  OxyTree t;
  t.params = params;
  t.width1 = width1;
  t.width2 = width2;
  t.features = std::move(features);
  t.seed = detail::required<std::uint64_t>(j, "seed");
  t.root = detail::required<Index>(j, "root");
  const Json& nodes = j.at("nodes");
  t.nodes.resize(nodes.size());
  for (Index i = 0; i < nodes.size(); ++i) {
    const Json& n = nodes[i];
    const auto kind = detail::required<std::string>(n, "kind");
    TreeNode& node = t.nodes[i];
    if (kind == "leaf") {
      node.is_leaf = true;
      node.leaf = t.leaves.size();
      t.leaves.push_back(leaf_from_json(n.at("leaf")));
    } else if (kind == "split") {
      node.is_leaf = false;
      node.rule.axis = detail::required<std::string>(n, "axis") == "rows" ? Axis::Rows : Axis::Cols;
      node.rule.feature = detail::required<Index>(n, "feature");
      node.rule.threshold = detail::required<double>(n, "threshold");
      const auto children = detail::required<std::vector<Index>>(n, "children");
      if (children.size() != 2) throw ContractError("model: split node needs two children");
      node.left = children[0];
      node.right = children[1];
      const Index width = node.rule.axis == Axis::Rows ? width1 : width2;
      if (node.rule.feature >= width) throw ContractError("model: split feature out of range");
    } else {
      throw ContractError("model: unknown node kind '" + kind + "'");
    }
  }
  // Children must point forward, which also rules out cycles.
  for (Index i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    if (!n.is_leaf && (n.left <= i || n.right <= i || n.left >= t.nodes.size() || n.right >= t.nodes.size())) {
      throw ContractError("model: invalid child index at node " + std::to_string(i));
    }
  }
  if (t.root >= t.nodes.size()) throw ContractError("model: root out of range");
  return t;
}

inline bool needs_training_features(const TreeParams& p) {
  auto raw = [](const std::optional<KernelConfig>& k) {
    return !k || k->mode != KernelConfig::Mode::Precomputed;
  };
  return p.leaf == LeafKind::RlsKron && (raw(p.kernel1) || raw(p.kernel2));
}

inline Json to_json(const OxyForest& f) {
  Json trees = Json::array();
  for (const auto& t : f.trees) trees.push_back(to_json(t));
  Json j{{"format", kFormatVersion},
         {"seed", f.seed},
         {"n_trees", f.trees.size()},
         {"bootstrap", f.params.bootstrap},
         {"params", to_json(f.params.tree)},
         {"width1", f.width1},
         {"width2", f.width2},
         {"trees", std::move(trees)}};
  if (needs_training_features(f.params.tree) && f.features) {
    j["train_x1"] = detail::matrix_to_json(f.features->x1);
    j["train_x2"] = detail::matrix_to_json(f.features->x2);
  }
  return j;
}

inline OxyForest forest_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != kFormatVersion) {
    throw ContractError(std::string("model: expected format '") + kFormatVersion + "'");
  }
  OxyForest f;
  f.seed = detail::required<std::uint64_t>(j, "seed");
  f.params.bootstrap = detail::required<bool>(j, "bootstrap");
  f.params.tree = tree_params_from_json(j.at("params"));
  f.width1 = detail::required<Index>(j, "width1");
  f.width2 = detail::required<Index>(j, "width2");
  if (j.contains("train_x1")) {
    f.features = std::make_shared<TrainingFeatures>(TrainingFeatures{
        detail::matrix_from_json(j.at("train_x1"), f.width1), detail::matrix_from_json(j.at("train_x2"), f.width2)});
  } else if (needs_training_features(f.params.tree)) {
    throw ContractError("model: missing training features for kernel leaves");
  }
  const Json& trees = j.at("trees");
  if (trees.size() != detail::required<Index>(j, "n_trees")) throw ContractError("model: tree count mismatch");
  for (const auto& t : trees) {
    f.trees.push_back(tree_from_json(t, f.params.tree, f.width1, f.width2,
                                     f.params.tree.leaf == LeafKind::RlsKron ? f.features : nullptr));
  }
  f.params.n_trees = f.trees.size();
  return f;
}

inline void save_forest(const std::string& path, const OxyForest& f) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json(f).dump() << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline OxyForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ContractError("model '" + path + "': " + e.what());
  }
  try {
    return forest_from_json(j);
  } catch (const Json::exception& e) {
    throw ContractError("model '" + path + "': " + e.what());
  }
}

}  // namespace oxytrees
