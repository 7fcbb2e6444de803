#pragma once

// FuBIFFI feature importance: squared normalized split-function gradients,
// averaged over the training points in the child on the explained point's
// path, weighted by how sharply each node isolates, averaged over trees.
// Global importance is the component-wise outlier/inlier ratio.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fubif/errors.hpp"
#include "fubif/forest.hpp"
#include "fubif/matrix.hpp"
#include "fubif/parallel.hpp"

namespace fubif {

// Percentage influence of each feature on one split at point y:
// (d1 f^2, ..., dn f^2) / ||grad f||^2. Uniform when the gradient vanishes.
inline std::vector<double> node_feature_influence(const SplitInstance& split,
                                                  std::span<const double> y) {
  std::vector<double> g = gradient(split, y);
  double norm2 = 0.0;
  for (double v : g) norm2 += v * v;
  if (norm2 < 1e-18) {
    std::fill(g.begin(), g.end(), 1.0 / static_cast<double>(g.size()));
    return g;
  }
  for (double& v : g) v = v * v / norm2;
  return g;
}

// Mean influence over the points of the next node on the path.
inline std::vector<double> node_importance(const SplitInstance& split,
                                           const Matrix& points,
                                           std::span<const std::int32_t> rows) {
  if (rows.empty()) throw DataError("explanation point not routed");
  std::vector<double> acc(points.cols(), 0.0);
  for (const std::int32_t r : rows) {
    const auto inf = node_feature_influence(split, points.row(static_cast<std::size_t>(r)));
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += inf[j];
  }
  for (double& v : acc) v /= static_cast<double>(rows.size());
  return acc;
}

inline std::vector<double> node_importance(const SplitInstance& split,
                                           const Matrix& points) {
  std::vector<std::int32_t> all(points.rows());
  std::iota(all.begin(), all.end(), 0);
  return node_importance(split, points, all);
}

// lambda^k = |Y_k| / (|Y_{k+1}| + 1).
inline double path_weight(std::int64_t size_parent, std::int64_t size_child) {
  return static_cast<double>(size_parent) / (static_cast<double>(size_child) + 1.0);
}

// Read-only explanation state. The per-node vector i^k is the mean influence
// over the training points routed into a node, which does not depend on the
// query, so one routing pass per tree caches every vector up front.
class ExplainContext {
 public:
  explicit ExplainContext(const Forest& forest) : forest_(forest) {
    child_importance_.resize(forest.trees.size());
    routed_counts_.resize(forest.trees.size());
    parallel_for(forest.trees.size(), [&](std::size_t t) {
      const Tree& tree = forest_.trees[t];
      const Matrix& sub = forest_.tree_subsamples[t];
      auto& sums = child_importance_[t];
      auto& counts = routed_counts_[t];
      sums.assign(tree.nodes.size(), {});
      counts.assign(tree.nodes.size(), 0);
      counts[0] = static_cast<std::int64_t>(sub.rows());
      for (std::size_t r = 0; r < sub.rows(); ++r) {
        std::int32_t node = 0;
        while (!tree.nodes[node].is_leaf()) {
          const auto& split = *tree.nodes[node].split;
          const std::int32_t child =
              (evaluate(split, sub.row(r)) - split.threshold <= 0.0)
                  ? tree.nodes[node].left
                  : tree.nodes[node].right;
          const auto inf = node_feature_influence(split, sub.row(r));
          auto& acc = sums[child];
          if (acc.empty()) acc.assign(forest_.dimension, 0.0);
          for (std::size_t j = 0; j < inf.size(); ++j) acc[j] += inf[j];
          ++counts[child];
          node = child;
        }
      }
      for (std::size_t i = 0; i < sums.size(); ++i)
        if (counts[i] > 0 && !sums[i].empty())
          for (double& v : sums[i]) v /= static_cast<double>(counts[i]);
    });
  }

  const Forest& forest() const { return forest_; }

  // Training points that landed in the node when re-routing the subsample.
  std::int64_t routed_count(std::size_t tree, std::int32_t node) const {
    return routed_counts_[tree][static_cast<std::size_t>(node)];
  }

  // i^T_x: path-weighted mean of per-node importances along x's path.
  std::vector<double> tree_importance(std::size_t t, std::span<const double> x) const {
    const Tree& tree = forest_.trees[t];
    std::vector<double> acc(forest_.dimension, 0.0);
    std::int32_t node = 0;
    int path_nodes = 0;
    while (!tree.nodes[node].is_leaf()) {
      const auto& split = *tree.nodes[node].split;
      const std::int32_t child =
          (evaluate(split, x) - split.threshold <= 0.0) ? tree.nodes[node].left
                                                        : tree.nodes[node].right;
      const std::vector<double>* imp =
          &child_importance_[t][static_cast<std::size_t>(child)];
      std::vector<double> fallback;
      if (imp->empty()) {
        // Empty branch under a normal threshold: fall back to x itself.
        fallback = node_feature_influence(split, x);
        imp = &fallback;
      }
      const double w = path_weight(tree.nodes[node].size, tree.nodes[child].size);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * (*imp)[j];
      ++path_nodes;
      node = child;
    }
    if (path_nodes > 0)
      for (double& v : acc) v /= static_cast<double>(path_nodes);
    return acc;
  }

  // I_x: mean of tree importances over the forest.
  std::vector<double> local_importance(std::span<const double> x) const {
    if (x.size() != forest_.dimension)
      throw DimensionError("point dimension does not match the model");
    std::vector<double> acc(forest_.dimension, 0.0);
    for (std::size_t t = 0; t < forest_.trees.size(); ++t) {
      const auto imp = tree_importance(t, x);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += imp[j];
    }
    for (double& v : acc) v /= static_cast<double>(forest_.trees.size());
    return acc;
  }

  // One row of local importance per point of X.
  Matrix local_importance_batch(const Matrix& X) const {
    if (X.cols() != forest_.dimension)
      throw DimensionError("data dimension does not match the model");
    Matrix out(X.rows(), forest_.dimension);
    parallel_for(X.rows(), [&](std::size_t i) {
      const auto imp = local_importance(X.row(i));
      for (std::size_t j = 0; j < imp.size(); ++j) out(i, j) = imp[j];
    }, 8);
    return out;
  }

 private:
  const Forest& forest_;
  // Per tree, per node: mean influence of the parent's split over the points
  // routed here (empty at the root and at unreached nodes).
  std::vector<std::vector<std::vector<double>>> child_importance_;
  std::vector<std::vector<std::int64_t>> routed_counts_;
};

struct GlobalImportance {
  std::vector<double> gfi;           // I_O / (I_I + eps), component-wise
  std::vector<double> inlier_mean;   // I_I
  std::vector<double> outlier_mean;  // I_O
  std::size_t n_inliers = 0;
  std::size_t n_outliers = 0;
};

inline GlobalImportance global_importance_from_partition(
    const ExplainContext& ctx, const Matrix& X, std::span<const int> is_outlier) {
  const std::size_t d = X.cols();
  GlobalImportance out;
  out.inlier_mean.assign(d, 0.0);
  out.outlier_mean.assign(d, 0.0);
  const Matrix local = ctx.local_importance_batch(X);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto& acc = is_outlier[i] ? out.outlier_mean : out.inlier_mean;
    auto& count = is_outlier[i] ? out.n_outliers : out.n_inliers;
    for (std::size_t j = 0; j < d; ++j) acc[j] += local(i, j);
    ++count;
  }
  if (out.n_inliers == 0 || out.n_outliers == 0)
    throw DataError("degenerate partition");
  for (double& v : out.inlier_mean) v /= static_cast<double>(out.n_inliers);
  for (double& v : out.outlier_mean) v /= static_cast<double>(out.n_outliers);
  out.gfi.resize(d);
  for (std::size_t j = 0; j < d; ++j)
    out.gfi[j] = out.outlier_mean[j] / (out.inlier_mean[j] + 1e-12);
  return out;
}

// Splits X into outliers/inliers: ground-truth labels when given, otherwise
// the top-ceil(p*n) anomaly scores (stable input order on ties).
inline std::vector<int> outlier_partition(const Forest& forest, const Matrix& X,
                                          const std::vector<int>* labels,
                                          std::optional<double> contamination) {
  if (labels) {
    if (labels->size() != X.rows())
      throw DataError("label vector length does not match data");
    return *labels;
  }
  if (!contamination) throw DataError("labels or contamination required");
  if (!(*contamination > 0.0 && *contamination < 1.0))
    throw ConfigError("contamination must be in (0, 1)");
  const std::vector<double> scores = anomaly_scores(forest, X);
  const auto k = static_cast<std::size_t>(
      std::ceil(*contamination * static_cast<double>(X.rows())));
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<int> is_outlier(X.rows(), 0);
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) is_outlier[order[i]] = 1;
  return is_outlier;
}

inline GlobalImportance global_importance(const Forest& forest, const Matrix& X,
                                          const std::vector<int>* labels,
                                          std::optional<double> contamination) {
  const ExplainContext ctx(forest);
  const auto partition = outlier_partition(forest, X, labels, contamination);
  return global_importance_from_partition(ctx, X, partition);
}

}  // namespace fubif
