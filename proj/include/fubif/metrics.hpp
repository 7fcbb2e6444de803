#pragma once

// Ranking metrics (average precision, ROC AUC, precision at a known
// contamination) and the AUC_FS feature-selection proxy for judging an
// importance ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fubif/data.hpp"
#include "fubif/errors.hpp"
#include "fubif/forest.hpp"
#include "fubif/rng.hpp"

namespace fubif {

struct ScoredLabels {
  std::span<const double> scores;
  std::span<const int> labels;  // 1 = anomaly
};

namespace detail {

inline void check_scored(const ScoredLabels& sl) {
  if (sl.scores.size() != sl.labels.size())
    throw DataError("scores and labels have different lengths");
  if (sl.scores.empty()) throw DataError("no scored points");
}

}  // namespace detail

// Step-wise AP over descending-score thresholds; equal scores are processed
// as one threshold step.
inline double average_precision(const ScoredLabels& sl) {
  detail::check_scored(sl);
  const std::size_t n = sl.scores.size();
  double total_pos = 0;
  for (int l : sl.labels) total_pos += l;
  if (total_pos == 0) throw DataError("no positive labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sl.scores[a] > sl.scores[b]; });

  double ap = 0.0, tp = 0.0, fp = 0.0, prev_recall = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && sl.scores[order[j]] == sl.scores[order[i]]) {
      if (sl.labels[order[j]]) tp += 1.0; else fp += 1.0;
      ++j;
    }
    const double recall = tp / total_pos;
    const double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

// Mann-Whitney statistic P(score+ > score-) + 0.5 P(tie), via midranks.
inline double roc_auc(const ScoredLabels& sl) {
  detail::check_scored(sl);
  const std::size_t n = sl.scores.size();
  double n_pos = 0;
  for (int l : sl.labels) n_pos += l;
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("labels contain a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sl.scores[a] < sl.scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && sl.scores[order[j]] == sl.scores[order[i]]) ++j;
    // Ascending 1-based midrank of the tie group [i, j).
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (sl.labels[order[k]]) rank_sum_pos += midrank;
    i = j;
  }
  const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

// Precision among the top ceil(p*n) scores; ties broken by stable input order.
inline double precision_at_contamination(const ScoredLabels& sl, double p) {
  detail::check_scored(sl);
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("contamination must be in (0, 1)");
  const std::size_t n = sl.scores.size();
  const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sl.scores[a] > sl.scores[b]; });
  double tp = 0;
  for (std::size_t i = 0; i < std::min(k, n); ++i) tp += sl.labels[order[i]];
  return tp / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// AUC_FS: area between the two feature-elimination precision curves.

struct FeatureSelectionCurves {
  // k[i] features kept; direct keeps the top-k of the ranking, inverse the
  // bottom-k. Stored with k ascending (1 .. d).
  std::vector<int> k;
  std::vector<double> direct;
  std::vector<double> inverse;
};

// Trapezoidal integral over k of (direct - inverse), unnormalized.
inline double area_between_curves(const FeatureSelectionCurves& curves) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curves.k.size(); ++i) {
    const double d0 = curves.direct[i] - curves.inverse[i];
    const double d1 = curves.direct[i + 1] - curves.inverse[i + 1];
    area += 0.5 * (d0 + d1) * static_cast<double>(curves.k[i + 1] - curves.k[i]);
  }
  return area;
}

// Refits the forest on the k best (resp. worst) features per the ranking and
// records mean average precision over `runs` seed-deterministic refits.
inline FeatureSelectionCurves feature_selection_curves(
    const Dataset& ds, const ForestConfig& base_config, Scenario scenario,
    std::span<const double> ranking, int runs, std::uint64_t seed) {
  const std::size_t d = ds.dimension();
  if (d < 2) throw DataError("nothing to select");
  if (!ds.has_labels()) throw DataError("labels required");
  if (ranking.size() != d) throw DimensionError("ranking length does not match data");
  if (runs < 1) throw ConfigError("runs must be >= 1");

  std::vector<std::size_t> desc(d);
  std::iota(desc.begin(), desc.end(), 0);
  std::stable_sort(desc.begin(), desc.end(),
                   [&](std::size_t a, std::size_t b) { return ranking[a] > ranking[b]; });
  std::vector<std::size_t> asc(desc.rbegin(), desc.rend());

  FeatureSelectionCurves curves;
  curves.k.resize(d);
  curves.direct.resize(d);
  curves.inverse.resize(d);

  auto mean_ap = [&](std::span<const std::size_t> keep, std::uint64_t stream) {
    // Keep columns in their original order.
    std::vector<std::size_t> cols(keep.begin(), keep.end());
    std::sort(cols.begin(), cols.end());
    const Dataset projected = project_features(ds, cols);
    const auto [train, test] = scenario_split(projected, scenario, 0);
    double total = 0.0;
    for (int run = 0; run < runs; ++run) {
      ForestConfig config = base_config;
      config.master_seed = mix_seed(seed, stream, static_cast<std::uint64_t>(run));
      const Forest forest = fit(train.points, config);
      const auto scores = anomaly_scores(forest, test.points);
      total += average_precision({scores, *test.labels});
    }
    return total / static_cast<double>(runs);
  };

  for (std::size_t k = 1; k <= d; ++k) {
    curves.k[k - 1] = static_cast<int>(k);
    curves.direct[k - 1] = mean_ap({desc.data(), k}, 2 * k);
    curves.inverse[k - 1] = mean_ap({asc.data(), k}, 2 * k + 1);
  }
  return curves;
}

inline double auc_fs(const Dataset& ds, const ForestConfig& base_config,
                     Scenario scenario, std::span<const double> ranking, int runs,
                     std::uint64_t seed) {
  return area_between_curves(
      feature_selection_curves(ds, base_config, scenario, ranking, runs, seed));
}

}  // namespace fubif
