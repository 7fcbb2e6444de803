#pragma once

// FUBIF1 model files: a whitespace-delimited text format holding the build
// configuration, per-tree training subsamples, and every node's split record.
// Reals are written as C hexfloats, so a reloaded forest reproduces scores
// bit-for-bit. See README for the full layout.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fubif/errors.hpp"
#include "fubif/forest.hpp"

namespace fubif {

namespace detail {

inline std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string tok;
    if (!(in_ >> tok)) throw DataError("model file truncated");
    return tok;
  }

  void expect(const std::string& keyword) {
    const std::string tok = word();
    if (tok != keyword)
      throw DataError("model file: expected '" + keyword + "', got '" + tok + "'");
  }

  double real() {
    const std::string tok = word();
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw DataError("model file: bad real '" + tok + "'");
    return v;
  }

  long long integer() {
    const std::string tok = word();
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw DataError("model file: bad integer '" + tok + "'");
    return v;
  }

  std::uint64_t unsigned64() {
    const std::string tok = word();
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw DataError("model file: bad integer '" + tok + "'");
    return v;
  }

 private:
  std::istream& in_;
};

inline void write_params(std::ostream& out, const SplitParams& params) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IfParams>) {
          out << ' ' << p.feature;
        } else if constexpr (std::is_same_v<T, EifParams>) {
          for (double v : p.direction) out << ' ' << hex_double(v);
        } else if constexpr (std::is_same_v<T, HifParams>) {
          for (double v : p.center) out << ' ' << hex_double(v);
        } else if constexpr (std::is_same_v<T, EllipseParams> ||
                             std::is_same_v<T, HyperParams>) {
          for (double v : p.focus1) out << ' ' << hex_double(v);
          for (double v : p.focus2) out << ' ' << hex_double(v);
        } else if constexpr (std::is_same_v<T, ParaParams>) {
          for (double v : p.focus) out << ' ' << hex_double(v);
          for (double v : p.direction) out << ' ' << hex_double(v);
        } else if constexpr (std::is_same_v<T, QuadParams>) {
          for (double v : p.a.values()) out << ' ' << hex_double(v);
          for (double v : p.linear) out << ' ' << hex_double(v);
        } else if constexpr (std::is_same_v<T, NnParams>) {
          out << ' ' << p.weights.size();
          for (std::size_t l = 0; l < p.weights.size(); ++l) {
            out << ' ' << p.weights[l].rows() << ' ' << p.weights[l].cols();
            for (double v : p.weights[l].values()) out << ' ' << hex_double(v);
            for (double v : p.biases[l]) out << ' ' << hex_double(v);
          }
        } else {
          static_assert(std::is_same_v<T, SineParams>);
        }
      },
      params);
}

inline SplitParams read_params(TokenReader& r, SplitFamily family, std::size_t d) {
  auto read_vec = [&](std::size_t len) {
    std::vector<double> v(len);
    for (auto& x : v) x = r.real();
    return v;
  };
  switch (family) {
    case SplitFamily::kIf:
      return IfParams{static_cast<int>(r.integer())};
    case SplitFamily::kEif:
      return EifParams{read_vec(d)};
    case SplitFamily::kHif:
      return HifParams{read_vec(d)};
    case SplitFamily::kEllipse: {
      auto c1 = read_vec(d);
      auto c2 = read_vec(d);
      return EllipseParams{std::move(c1), std::move(c2)};
    }
    case SplitFamily::kHyper: {
      auto c1 = read_vec(d);
      auto c2 = read_vec(d);
      return HyperParams{std::move(c1), std::move(c2)};
    }
    case SplitFamily::kPara: {
      auto c = read_vec(d);
      auto v = read_vec(d);
      return ParaParams{std::move(c), std::move(v)};
    }
    case SplitFamily::kQuad: {
      QuadParams q;
      q.a = Matrix(d, d);
      for (auto& x : q.a.values()) x = r.real();
      q.linear = read_vec(d);
      return q;
    }
    case SplitFamily::kNn: {
      NnParams nn;
      const auto n_layers = static_cast<std::size_t>(r.integer());
      for (std::size_t l = 0; l < n_layers; ++l) {
        const auto rows = static_cast<std::size_t>(r.integer());
        const auto cols = static_cast<std::size_t>(r.integer());
        Matrix w(rows, cols);
        for (auto& x : w.values()) x = r.real();
        std::vector<double> b(rows);
        for (auto& x : b) x = r.real();
        nn.weights.push_back(std::move(w));
        nn.biases.push_back(std::move(b));
      }
      return nn;
    }
    case SplitFamily::kSine:
      return SineParams{};
  }
  throw DataError("model file: unknown family");
}

}  // namespace detail

inline void write_forest(std::ostream& out, const Forest& forest) {
  const auto& cfg = forest.config;
  out << "FUBIF1\n";
  out << "dimension " << forest.dimension << '\n';
  out << "family " << family_name(cfg.family.family) << '\n';
  out << "quad_lambda " << detail::hex_double(cfg.family.quad_lambda) << '\n';
  out << "nn_widths " << cfg.family.nn_hidden_widths.size();
  for (int w : cfg.family.nn_hidden_widths) out << ' ' << w;
  out << '\n';
  out << "threshold_kind " << threshold_kind_name(cfg.threshold_kind) << '\n';
  out << "eta " << detail::hex_double(cfg.eta) << '\n';
  out << "n_trees " << cfg.n_trees << '\n';
  out << "subsample_size " << cfg.subsample_size << '\n';
  out << "effective_subsample " << forest.effective_subsample << '\n';
  out << "max_depth " << forest.max_depth_used << '\n';
  out << "master_seed " << cfg.master_seed << '\n';
  out << "max_resample_attempts " << cfg.max_resample_attempts << '\n';
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const Tree& tree = forest.trees[t];
    out << "tree " << t << " nodes " << tree.nodes.size() << '\n';
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const TreeNode& node = tree.nodes[i];
      if (node.is_leaf()) {
        out << "node " << i << " leaf " << node.size << '\n';
      } else {
        out << "node " << i << " split " << node.left << ' ' << node.right << ' '
            << node.size << ' ' << family_name(node.split->family()) << ' '
            << detail::hex_double(node.split->threshold);
        detail::write_params(out, node.split->params);
        out << '\n';
      }
    }
    const Matrix& sub = forest.tree_subsamples[t];
    out << "subsample " << sub.rows() << '\n';
    for (std::size_t i = 0; i < sub.rows(); ++i) {
      const auto row = sub.row(i);
      for (std::size_t j = 0; j < row.size(); ++j)
        out << (j ? " " : "") << detail::hex_double(row[j]);
      out << '\n';
    }
    out << "end_tree\n";
  }
  out << "end_model\n";
}

inline Forest read_forest(std::istream& in) {
  detail::TokenReader r(in);
  if (r.word() != "FUBIF1") throw DataError("not a FUBIF1 model file");
  Forest forest;
  ForestConfig& cfg = forest.config;
  r.expect("dimension");
  forest.dimension = static_cast<std::size_t>(r.integer());
  r.expect("family");
  cfg.family.family = parse_family(r.word());
  r.expect("quad_lambda");
  cfg.family.quad_lambda = r.real();
  r.expect("nn_widths");
  const auto n_widths = static_cast<std::size_t>(r.integer());
  for (std::size_t i = 0; i < n_widths; ++i)
    cfg.family.nn_hidden_widths.push_back(static_cast<int>(r.integer()));
  r.expect("threshold_kind");
  cfg.threshold_kind = parse_threshold_kind(r.word());
  r.expect("eta");
  cfg.eta = r.real();
  r.expect("n_trees");
  cfg.n_trees = static_cast<int>(r.integer());
  r.expect("subsample_size");
  cfg.subsample_size = static_cast<int>(r.integer());
  r.expect("effective_subsample");
  forest.effective_subsample = static_cast<int>(r.integer());
  r.expect("max_depth");
  forest.max_depth_used = static_cast<int>(r.integer());
  cfg.max_depth = forest.max_depth_used;
  r.expect("master_seed");
  cfg.master_seed = r.unsigned64();
  r.expect("max_resample_attempts");
  cfg.max_resample_attempts = static_cast<int>(r.integer());

  for (int t = 0; t < cfg.n_trees; ++t) {
    r.expect("tree");
    if (r.integer() != t) throw DataError("model file: tree indices out of order");
    r.expect("nodes");
    const auto n_nodes = static_cast<std::size_t>(r.integer());
    Tree tree;
    tree.nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      r.expect("node");
      if (static_cast<std::size_t>(r.integer()) != i)
        throw DataError("model file: node indices out of order");
      const std::string kind = r.word();
      TreeNode& node = tree.nodes[i];
      if (kind == "leaf") {
        node.size = r.integer();
      } else if (kind == "split") {
        node.left = static_cast<std::int32_t>(r.integer());
        node.right = static_cast<std::int32_t>(r.integer());
        node.size = r.integer();
        const SplitFamily fam = parse_family(r.word());
        const double tau = r.real();
        node.split = SplitInstance{detail::read_params(r, fam, forest.dimension), tau};
        if (node.left < 0 || node.right < 0 ||
            static_cast<std::size_t>(node.left) >= n_nodes ||
            static_cast<std::size_t>(node.right) >= n_nodes)
          throw DataError("model file: child index out of range");
      } else {
        throw DataError("model file: unknown node kind '" + kind + "'");
      }
    }
    r.expect("subsample");
    const auto n_rows = static_cast<std::size_t>(r.integer());
    Matrix sub(n_rows, forest.dimension);
    for (auto& x : sub.values()) x = r.real();
    r.expect("end_tree");
    forest.trees.push_back(std::move(tree));
    forest.tree_subsamples.push_back(std::move(sub));
  }
  r.expect("end_model");
  return forest;
}

inline void save_forest(const Forest& forest, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    write_forest(out, forest);
    if (!out) throw DataError("failed while writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return read_forest(in);
}

}  // namespace fubif
