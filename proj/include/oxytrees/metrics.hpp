#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "oxytrees/errors.hpp"

namespace oxytrees {

enum class Metric { Auroc, Auprc };

inline const char* to_string(Metric m) { return m == Metric::Auroc ? "AUROC" : "AUPRC"; }

namespace detail {

inline void check_metric_input(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("metric: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
  }
}

}  // namespace detail

// Probability that a random positive outscores a random negative; ties count
// one half (Mann-Whitney U over average ranks).
inline double auroc(std::span<const double> scores, std::span<const double> labels) {
  detail::check_metric_input(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    // ranks start+1 .. end share their average
    const double avg_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] > 0.5) {
        positives += 1.0;
        rank_sum += avg_rank;
      }
    }
    start = end;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) throw UndefinedMetric("AUROC needs both classes");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

// Average precision: sum over score levels (descending, ties grouped into one
// cut) of precision at the cut times the recall gained at it.
inline double auprc(std::span<const double> scores, std::span<const double> labels) {
  detail::check_metric_input(scores, labels);
  const std::size_t n = scores.size();
  double positives = 0.0;
  for (double l : labels) positives += l > 0.5;
  if (positives == 0.0) throw UndefinedMetric("AUPRC needs at least one positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double tp = 0.0, seen = 0.0, ap = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    double group_tp = 0.0;
    for (std::size_t k = start; k < end; ++k) group_tp += labels[order[k]] > 0.5;
    tp += group_tp;
    seen += static_cast<double>(end - start);
    if (group_tp > 0.0) ap += (tp / seen) * (group_tp / positives);
    start = end;
  }
  return ap;
}

inline double score_metric(Metric m, std::span<const double> scores, std::span<const double> labels) {
  return m == Metric::Auroc ? auroc(scores, labels) : auprc(scores, labels);
}

}  // namespace oxytrees
