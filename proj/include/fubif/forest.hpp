#pragma once

// Tree construction by recursive split/threshold sampling, path lengths, and
// the normalized anomaly score s(x, n) = 2^(-E[h(x)] / c(n)).

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fubif/errors.hpp"
#include "fubif/matrix.hpp"
#include "fubif/parallel.hpp"
#include "fubif/rng.hpp"
#include "fubif/splitting.hpp"
#include "fubif/threshold.hpp"

namespace fubif {

// Expected path length of an unsuccessful BST lookup over n points:
// 2 H(n-1) - 2 (n-1)/n. Exact harmonic sum up to n = 10^4, ln + gamma beyond.
inline double c_factor(std::int64_t n) {
  if (n <= 1) return 0.0;
  const double m = static_cast<double>(n - 1);
  double harmonic;
  if (n <= 10000) {
    harmonic = 0.0;
    for (std::int64_t k = 1; k <= n - 1; ++k) harmonic += 1.0 / static_cast<double>(k);
  } else {
    harmonic = std::log(m) + 0.5772156649;
  }
  return 2.0 * harmonic - 2.0 * m / static_cast<double>(n);
}

struct TreeNode {
  std::int32_t left = -1;   // -1 on both = leaf
  std::int32_t right = -1;
  std::int64_t size = 0;    // training points that reached this node
  std::optional<SplitInstance> split;  // engaged iff internal

  bool is_leaf() const { return left < 0; }
};

// Binary tree as a flat pool; nodes[0] is the root, children in preorder.
struct Tree {
  std::vector<TreeNode> nodes;
};

struct ForestConfig {
  int n_trees = 100;
  int subsample_size = 256;              // psi
  std::optional<int> max_depth;          // nullopt = ceil(log2(effective psi))
  SplitFamilyDescriptor family;
  ThresholdKind threshold_kind = ThresholdKind::kUniform;
  double eta = 1.5;
  std::uint64_t master_seed = 1;
  int max_resample_attempts = 8;

  void validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (subsample_size < 2) throw ConfigError("subsample_size must be >= 2");
    if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be positive");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (max_resample_attempts < 1)
      throw ConfigError("max_resample_attempts must be >= 1");
  }
};

struct Forest {
  ForestConfig config;               // family resolved for the training dimension
  std::size_t dimension = 0;
  int effective_subsample = 0;       // min(psi, |X|); the n of s(x, n)
  int max_depth_used = 0;
  std::vector<Tree> trees;
  std::vector<Matrix> tree_subsamples;  // training points per tree, build order
};

namespace detail {

inline int auto_max_depth(int effective_subsample) {
  int k = 0;
  while ((std::int64_t{1} << k) < effective_subsample) ++k;
  return std::max(1, k);
}

struct TreeBuilder {
  const Matrix& points;
  const SplitFamilyDescriptor& family;
  ThresholdKind threshold_kind;
  double eta;
  int max_depth;
  int max_attempts;
  Rng& rng;
  std::vector<TreeNode>& nodes;

  std::int32_t build(std::vector<std::size_t>& rows, int depth) {
    const auto idx = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes[idx].size = static_cast<std::int64_t>(rows.size());
    if (rows.size() <= 1 || depth >= max_depth) return idx;

    const auto range = compute_range(points, rows);
    std::vector<double> values(rows.size());
    std::vector<std::size_t> left_rows, right_rows;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      SplitParams params = sample_params(family, range, rng);
      for (std::size_t k = 0; k < rows.size(); ++k)
        values[k] = evaluate(params, points.row(rows[k]));
      const ThresholdModel model =
          fit_threshold_model(values, threshold_kind, eta);
      if (model.degenerate()) continue;  // all split values equal
      const double tau = sample_threshold(model, rng);
      left_rows.clear();
      right_rows.clear();
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (values[k] - tau <= 0.0)
          left_rows.push_back(rows[k]);
        else
          right_rows.push_back(rows[k]);
      }
      // A uniform threshold must split the node; tau can still round onto the
      // max value, so an empty side counts as a failed draw.
      if (threshold_kind == ThresholdKind::kUniform &&
          (left_rows.empty() || right_rows.empty()))
        continue;

      nodes[idx].split = SplitInstance{std::move(params), tau};
      rows.clear();
      rows.shrink_to_fit();
      const std::int32_t left = build(left_rows, depth + 1);
      nodes[idx].left = left;
      const std::int32_t right = build(right_rows, depth + 1);
      nodes[idx].right = right;
      return idx;
    }
    return idx;  // attempts exhausted: keep as leaf
  }
};

}  // namespace detail

// Builds one tree over the given subsample (all rows of `subsample`).
inline Tree build_tree(const Matrix& subsample, const ForestConfig& config,
                       int max_depth, std::uint64_t tree_seed) {
  Tree tree;
  Rng rng(tree_seed);
  const SplitFamilyDescriptor family = config.family.resolved(subsample.cols());
  std::vector<std::size_t> rows(subsample.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::TreeBuilder builder{subsample,
                              family,
                              config.threshold_kind,
                              config.eta,
                              max_depth,
                              config.max_resample_attempts,
                              rng,
                              tree.nodes};
  builder.build(rows, 0);
  return tree;
}

inline Forest fit(const Matrix& X, const ForestConfig& config_in) {
  if (X.rows() < 2) throw DataError("dataset too small");
  ForestConfig config = config_in;
  config.validate();
  config.family = config.family.resolved(X.cols());

  Forest forest;
  forest.config = config;
  forest.dimension = X.cols();
  forest.effective_subsample =
      static_cast<int>(std::min<std::size_t>(config.subsample_size, X.rows()));
  forest.max_depth_used =
      config.max_depth ? *config.max_depth
                       : detail::auto_max_depth(forest.effective_subsample);
  forest.trees.resize(config.n_trees);
  forest.tree_subsamples.resize(config.n_trees);

  const std::size_t n = X.rows();
  const auto psi = static_cast<std::size_t>(forest.effective_subsample);
  parallel_for(static_cast<std::size_t>(config.n_trees), [&](std::size_t t) {
    const std::uint64_t tree_seed = mix_seed(config.master_seed, t);
    Rng rng(tree_seed);
    // Partial Fisher-Yates: first psi entries form the subsample, no repeats.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = 0; i < psi; ++i) {
      const std::size_t j = i + rng.uniform_index(n - i);
      std::swap(perm[i], perm[j]);
    }
    perm.resize(psi);
    forest.tree_subsamples[t] = X.take_rows(perm);
    forest.trees[t] =
        build_tree(forest.tree_subsamples[t], config, forest.max_depth_used,
                   mix_seed(config.master_seed, t, 0x7265657274ull));
  });
  return forest;
}

// Internal nodes traversed to reach x's leaf, plus c(leaf size).
inline double path_length(const Tree& tree, std::span<const double> x) {
  std::int32_t node = 0;
  double depth = 0.0;
  while (!tree.nodes[node].is_leaf()) {
    const auto& split = *tree.nodes[node].split;
    node = (evaluate(split, x) - split.threshold <= 0.0) ? tree.nodes[node].left
                                                         : tree.nodes[node].right;
    depth += 1.0;
  }
  return depth + c_factor(tree.nodes[node].size);
}

// s(x, n) = 2^(-mean_path / c(n)); monotone decreasing in the mean path.
inline double score_from_mean_path(double mean_path, std::int64_t n) {
  return std::exp2(-mean_path / c_factor(n));
}

inline double anomaly_score(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.dimension)
    throw DimensionError("point dimension does not match the model");
  double total = 0.0;
  for (const auto& tree : forest.trees) total += path_length(tree, x);
  const double mean = total / static_cast<double>(forest.trees.size());
  return score_from_mean_path(mean, forest.effective_subsample);
}

inline std::vector<double> anomaly_scores(const Forest& forest, const Matrix& X) {
  if (X.cols() != forest.dimension)
    throw DimensionError("data dimension does not match the model");
  std::vector<double> scores(X.rows());
  parallel_for(
      X.rows(), [&](std::size_t i) { scores[i] = anomaly_score(forest, X.row(i)); },
      64);
  return scores;
}

// ---------------------------------------------------------------------------
// Score grids for 2-d models (scoremaps).

struct GridBounds {
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
};

// Bounding box of 2-d data, padded by 10% of the span on each side.
inline GridBounds padded_bounds(const Matrix& X) {
  const auto range = compute_range(X);
  GridBounds b{range.lower[0], range.upper[0], range.lower[1], range.upper[1]};
  const double px = 0.1 * (b.x_hi - b.x_lo);
  const double py = 0.1 * (b.y_hi - b.y_lo);
  b.x_lo -= px;
  b.x_hi += px;
  b.y_lo -= py;
  b.y_hi += py;
  return b;
}

// m x m anomaly scores over the bounds; rows ordered x-major then y.
inline std::vector<std::array<double, 3>> score_grid(const Forest& forest,
                                                     const GridBounds& bounds,
                                                     int m) {
  if (forest.dimension != 2) throw DimensionError("scoremap requires 2-d models");
  if (m < 1) throw ConfigError("grid size must be >= 1");
  auto coord = [m](double lo, double hi, int i) {
    if (m == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
  };
  std::vector<std::array<double, 3>> cells(static_cast<std::size_t>(m) * m);
  parallel_for(cells.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k) / m;
    const int j = static_cast<int>(k) % m;
    const std::array<double, 2> p{coord(bounds.x_lo, bounds.x_hi, i),
                                  coord(bounds.y_lo, bounds.y_hi, j)};
    cells[k] = {p[0], p[1], anomaly_score(forest, p)};
  }, 16);
  return cells;
}

}  // namespace fubif
