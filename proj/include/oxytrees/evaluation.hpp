#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "oxytrees/dataset.hpp"
#include "oxytrees/errors.hpp"
#include "oxytrees/forest.hpp"
#include "oxytrees/metrics.hpp"
#include "oxytrees/random.hpp"

namespace oxytrees {

enum class Setting { TD, LT, TL, TT };

inline const char* to_string(Setting s) {
  switch (s) {
    case Setting::TD: return "TD";
    case Setting::LT: return "LT";
    case Setting::TL: return "TL";
    case Setting::TT: return "TT";
  }
  return "?";
}

struct ReportEntry {
  Setting setting = Setting::TT;
  Index fold = 0;
  double pmp = 0.0;
  Metric metric = Metric::Auroc;
  std::optional<double> value;  // empty when the metric is undefined for the fold
};

struct EvaluationReport {
  std::vector<ReportEntry> entries;
  std::map<std::string, std::string> metadata;

  // Mean over folds of the defined values; empty when none is defined.
  std::optional<double> mean(Setting setting, Metric metric, double pmp) const {
    double total = 0.0;
    Index count = 0;
    for (const auto& e : entries) {
      if (e.setting == setting && e.metric == metric && e.pmp == pmp && e.value) {
        total += *e.value;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return total / static_cast<double>(count);
  }

  // LT and TL folded together.
  std::optional<double> semi_inductive_mean(Metric metric, double pmp) const {
    const auto lt = mean(Setting::LT, metric, pmp);
    const auto tl = mean(Setting::TL, metric, pmp);
    if (lt && tl) return 0.5 * (*lt + *tl);
    return lt ? lt : tl;
  }
};

namespace detail {

inline std::optional<double> safe_metric(Metric m, std::span<const double> scores, std::span<const double> labels) {
  try {
    return score_metric(m, scores, labels);
  } catch (const UndefinedMetric&) {
    return std::nullopt;
  }
}

inline void check_no_leakage(const CvSplit& s) {
  auto disjoint = [](const IndexList& a, const IndexList& b) {
    IndexList common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.empty();
  };
  if (!disjoint(s.row_train, s.row_test) || !disjoint(s.col_train, s.col_test)) {
    throw ContractError("split " + std::to_string(s.fold) + ": test instances leak into training");
  }
}

}  // namespace detail

struct CvOptions {
  Index k1 = 2;
  Index k2 = 2;
  std::vector<double> pmp_grid{0.0, 0.25, 0.5, 0.75};
  std::uint64_t seed = 0;
};

// Streams used by run_cv: folds from child 0; masks and forests of cell c
// from child c of streams 1 and 2.
inline std::uint64_t cv_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t cell) {
  return child_seed(child_seed(seed, stream), cell);
}

// Bipartite k1 x k2 cross-validation. For every split and PMP value: mask
// positives of the learning block, fit a forest on it, then score TD
// (masked positives vs learning zeros), LT, TL and TT with AUROC and AUPRC.
inline EvaluationReport run_cv(const BipartiteDataset& data, const ForestParams& params, const CvOptions& opt) {
  data.validate();
  if (opt.pmp_grid.empty()) throw ContractError("pmp grid is empty");
  Rng fold_rng(child_seed(opt.seed, 0));
  const auto splits = stratified_kfold(data, opt.k1, opt.k2, fold_rng);

  EvaluationReport report;
  report.metadata["k1"] = std::to_string(opt.k1);
  report.metadata["k2"] = std::to_string(opt.k2);
  report.metadata["seed"] = std::to_string(opt.seed);
  report.metadata["n_trees"] = std::to_string(params.n_trees);
  report.metadata["min_rows"] = std::to_string(params.tree.min_rows);
  report.metadata["min_cols"] = std::to_string(params.tree.min_cols);
  report.metadata["leaf"] = params.tree.leaf == LeafKind::Mean ? "mean" : "rls_kron";

  for (const auto& split : splits) {
    detail::check_no_leakage(split);
    for (Index p = 0; p < opt.pmp_grid.size(); ++p) {
      const double pmp = opt.pmp_grid[p];
      const std::uint64_t cell = split.fold * opt.pmp_grid.size() + p;
      Rng mask_rng(cv_stream(opt.seed, 1, cell));
      const auto masked = mask_positives(data, split, pmp, mask_rng);
      const auto carved = carve_split(data, masked.split);
      const auto forest = fit_forest(carved.ld, params, cv_stream(opt.seed, 2, cell));

      auto record = [&](Setting s, std::span<const double> scores, std::span<const double> labels) {
        for (Metric m : {Metric::Auroc, Metric::Auprc}) {
          report.entries.push_back({s, split.fold, pmp, m, detail::safe_metric(m, scores, labels)});
        }
      };

      {
        const Matrix pred = predict_forest(forest, carved.ld.x1, carved.ld.x2, std::nullopt, params.threads);
        std::vector<double> scores, labels;
        for (const auto& d : carved.td) {
          scores.push_back(pred(d.row, d.col));
          labels.push_back(d.label);
        }
        // Without masked positives the transductive setting is undefined.
        std::optional<double> none;
        if (masked.split.masked.empty()) {
          for (Metric m : {Metric::Auroc, Metric::Auprc}) report.entries.push_back({Setting::TD, split.fold, pmp, m, none});
        } else {
          record(Setting::TD, scores, labels);
        }
      }
      const std::pair<Setting, const BipartiteDataset*> tests[] = {
          {Setting::LT, &carved.lt}, {Setting::TL, &carved.tl}, {Setting::TT, &carved.tt}};
      for (const auto& [setting, view] : tests) {
        const Matrix pred = predict_forest(forest, view->x1, view->x2, std::nullopt, params.threads);
        record(setting, pred.values(), view->y.values());
      }
    }
  }
  return report;
}

// First tree count at which `curve` (score after k trees at index k-1)
// reaches target_fraction of its last value, linearly interpolated between
// neighbouring counts. Returns curve.size() when never reached.
inline double interpolate_tree_count(std::span<const double> curve, double target_fraction) {
  if (curve.empty()) throw ContractError("empty score curve");
  const double target = target_fraction * curve.back();
  for (Index k = 0; k < curve.size(); ++k) {
    if (curve[k] >= target) {
      if (k == 0) return 1.0;
      const double lo = curve[k - 1], hi = curve[k];
      return static_cast<double>(k) + (target - lo) / (hi - lo);
    }
  }
  return static_cast<double>(curve.size());
}

// Mean over `repeats` random tree orders of the interpolated tree count.
// curve_for(order) must return the score after each prefix of `order`.
template <class CurveFn>
double tree_count_bootstrap(Index total, double target_fraction, Index repeats, Rng& rng, CurveFn&& curve_for) {
  if (total < 2) throw ContractError("tree count bootstrap needs at least 2 trees");
  if (repeats < 1) throw ContractError("repeats must be positive");
  std::vector<Index> order(total);
  double acc = 0.0;
  for (Index r = 0; r < repeats; ++r) {
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(std::span<Index>(order));
    const std::vector<double> curve = curve_for(std::span<const Index>(order));
    acc += interpolate_tree_count(curve, target_fraction);
  }
  return acc / static_cast<double>(repeats);
}

// Same, with the curve given by `metric` of the running mean of per-tree scores.
inline double tree_count_bootstrap(std::span<const Matrix> per_tree, std::span<const double> labels, Metric metric,
                                   double target_fraction, Index repeats, Rng& rng) {
  const Index total = per_tree.size();
  return tree_count_bootstrap(total, target_fraction, repeats, rng, [&](std::span<const Index> order) {
    std::vector<double> running(labels.size(), 0.0), mean(labels.size());
    std::vector<double> curve;
    curve.reserve(order.size());
    for (Index k = 0; k < order.size(); ++k) {
      const auto scores = per_tree[order[k]].values();
      if (scores.size() != labels.size()) throw DimensionError("per-tree scores do not match labels");
      for (Index e = 0; e < running.size(); ++e) {
        running[e] += scores[e];
        mean[e] = running[e] / static_cast<double>(k + 1);
      }
      curve.push_back(score_metric(metric, mean, labels));
    }
    return curve;
  });
}

struct TreeCountResult {
  Index fold = 0;
  std::optional<double> expected_trees;  // empty when the metric is undefined on the fold
  std::optional<double> final_score;
};

// Per CV split: fit `params.n_trees` trees on the (masked) learning block and
// estimate how many are needed to reach target_fraction of the full
// forest's TT score.
inline std::vector<TreeCountResult> tree_count_experiment(const BipartiteDataset& data, const ForestParams& params,
                                                          const CvOptions& opt, Metric metric, double target_fraction,
                                                          Index repeats) {
  Rng fold_rng(child_seed(opt.seed, 0));
  const auto splits = stratified_kfold(data, opt.k1, opt.k2, fold_rng);
  const double pmp = opt.pmp_grid.empty() ? 0.0 : opt.pmp_grid.front();
  std::vector<TreeCountResult> out;
  for (const auto& split : splits) {
    Rng mask_rng(cv_stream(opt.seed, 1, split.fold));
    const auto masked = mask_positives(data, split, pmp, mask_rng);
    const auto carved = carve_split(data, masked.split);
    const auto forest = fit_forest(carved.ld, params, cv_stream(opt.seed, 2, split.fold));
    const auto per_tree = predict_per_tree(forest, carved.tt.x1, carved.tt.x2, params.threads);
    TreeCountResult r;
    r.fold = split.fold;
    try {
      Rng boot(cv_stream(opt.seed, 3, split.fold));
      r.expected_trees = tree_count_bootstrap(per_tree, carved.tt.y.values(), metric, target_fraction, repeats, boot);
      r.final_score = score_metric(metric, predict_forest(forest, carved.tt.x1, carved.tt.x2).values(),
                                   carved.tt.y.values());
    } catch (const UndefinedMetric&) {
    }
    out.push_back(r);
  }
  return out;
}

struct LeafSweepRow {
  LeafKind variant = LeafKind::RlsKron;
  Index min_dim = 2;
  Setting setting = Setting::TT;
  Metric metric = Metric::Auprc;
  std::optional<double> score;
  std::optional<double> relative;  // score / score at the reference dimension
};

// Mean CV score of each leaf variant for each minimum leaf dimension
// (min_rows = min_cols = d), relative to the 2x2 score (or to the first grid
// point when 2 is absent).
inline std::vector<LeafSweepRow> leaf_size_sweep(const BipartiteDataset& data, std::span<const Index> dims,
                                                 std::span<const LeafKind> variants, const ForestParams& base,
                                                 CvOptions opt, std::span<const Setting> settings) {
  if (dims.empty()) throw ContractError("leaf size grid is empty");
  if (variants.empty()) throw ContractError("no leaf variants given");
  const auto ref_it = std::find(dims.begin(), dims.end(), Index{2});
  const Index ref = ref_it == dims.end() ? 0 : static_cast<Index>(ref_it - dims.begin());
  const double pmp = opt.pmp_grid.empty() ? 0.0 : opt.pmp_grid.front();
  opt.pmp_grid = {pmp};
  std::vector<LeafSweepRow> rows;
  for (LeafKind variant : variants) {
    std::vector<EvaluationReport> reports;
    for (Index d : dims) {
      ForestParams p = base;
      p.tree.leaf = variant;
      p.tree.min_rows = d;
      p.tree.min_cols = d;
      reports.push_back(run_cv(data, p, opt));
    }
    for (Setting s : settings) {
      for (Metric m : {Metric::Auroc, Metric::Auprc}) {
        const auto reference = reports[ref].mean(s, m, pmp);
        for (Index g = 0; g < dims.size(); ++g) {
          LeafSweepRow row{variant, dims[g], s, m, reports[g].mean(s, m, pmp), std::nullopt};
          if (row.score && reference && *reference > 0.0) row.relative = *row.score / *reference;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

}  // namespace oxytrees
