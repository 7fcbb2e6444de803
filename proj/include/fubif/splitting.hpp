#pragma once

// Splitting-function families: one parameter record per family plus the three
// operations every family supports -- parameter sampling, point evaluation and
// the analytic gradient. A node's decision boundary is the level set
// f(x) = tau of the sampled instance.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fubif/errors.hpp"
#include "fubif/matrix.hpp"
#include "fubif/rng.hpp"

namespace fubif {

enum class SplitFamily : int {
  kIf = 0,
  kEif,
  kHif,
  kEllipse,
  kHyper,
  kPara,
  kQuad,
  kNn,
  kSine,
};

inline const char* family_name(SplitFamily f) {
  switch (f) {
    case SplitFamily::kIf: return "if";
    case SplitFamily::kEif: return "eif";
    case SplitFamily::kHif: return "hif";
    case SplitFamily::kEllipse: return "ellipse";
    case SplitFamily::kHyper: return "hyper";
    case SplitFamily::kPara: return "para";
    case SplitFamily::kQuad: return "quad";
    case SplitFamily::kNn: return "nn";
    case SplitFamily::kSine: return "sine";
  }
  return "?";
}

inline SplitFamily parse_family(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(SplitFamily::kSine); ++i) {
    const auto f = static_cast<SplitFamily>(i);
    if (name == family_name(f)) return f;
  }
  throw ConfigError("unknown split family '" + name + "'");
}

// Identifies one family plus its hyperparameters.
struct SplitFamilyDescriptor {
  SplitFamily family = SplitFamily::kEif;
  double quad_lambda = 1.0;             // Quad only
  std::vector<int> nn_hidden_widths;    // NN only; empty = auto [max(8,d), max(8,d)]

  // Checks the descriptor against a dataset dimension; fills the NN default.
  SplitFamilyDescriptor resolved(std::size_t d) const {
    SplitFamilyDescriptor out = *this;
    if (family == SplitFamily::kQuad && !(quad_lambda > 0.0))
      throw ConfigError("quad_lambda must be > 0");
    if (family == SplitFamily::kNn) {
      if (out.nn_hidden_widths.empty()) {
        const int w = static_cast<int>(std::max<std::size_t>(8, d));
        out.nn_hidden_widths = {w, w};
      }
      for (int w : out.nn_hidden_widths)
        if (w <= 0) throw ConfigError("nn_hidden_widths entries must be positive");
    }
    if (family == SplitFamily::kSine && d != 2)
      throw ConfigError("sine family is only defined for dimension 2");
    return out;
  }
};

// Axis-aligned envelope of a point set; sampling domain for centers and foci.
struct HyperRectangle {
  std::vector<double> lower;
  std::vector<double> upper;
};

inline HyperRectangle compute_range(const Matrix& points) {
  if (points.rows() == 0) throw DataError("empty node set");
  const std::size_t d = points.cols();
  HyperRectangle r;
  r.lower.assign(points.row(0).begin(), points.row(0).end());
  r.upper = r.lower;
  for (std::size_t i = 1; i < points.rows(); ++i) {
    const auto p = points.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (p[j] < r.lower[j]) r.lower[j] = p[j];
      if (p[j] > r.upper[j]) r.upper[j] = p[j];
    }
  }
  return r;
}

inline HyperRectangle compute_range(const Matrix& points,
                                    std::span<const std::size_t> rows) {
  if (rows.empty()) throw DataError("empty node set");
  const std::size_t d = points.cols();
  HyperRectangle r;
  r.lower.assign(points.row(rows[0]).begin(), points.row(rows[0]).end());
  r.upper = r.lower;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto p = points.row(rows[k]);
    for (std::size_t j = 0; j < d; ++j) {
      if (p[j] < r.lower[j]) r.lower[j] = p[j];
      if (p[j] > r.upper[j]) r.upper[j] = p[j];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Family parameter records. Records are immutable after sampling.

struct IfParams {
  int feature = 0;  // 0-based
};

struct EifParams {
  std::vector<double> direction;  // unit vector
};

struct HifParams {
  std::vector<double> center;
};

struct EllipseParams {
  std::vector<double> focus1, focus2;
};

struct HyperParams {
  std::vector<double> focus1, focus2;
};

struct ParaParams {
  std::vector<double> focus;
  std::vector<double> direction;  // unit vector
};

struct QuadParams {
  Matrix a;                    // d x d, entries N(0,1)
  std::vector<double> linear;  // entries U([-lambda, lambda])
};

struct NnParams {
  // Fully connected net, tanh hidden activations, scalar linear output.
  // weights[l] has shape widths[l+1] x widths[l] with widths = {d, hidden..., 1}.
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

struct SineParams {};  // f(x1, x2) = x2 - sin(x1)

using SplitParams = std::variant<IfParams, EifParams, HifParams, EllipseParams,
                                 HyperParams, ParaParams, QuadParams, NnParams,
                                 SineParams>;

// A sampled split: concrete parameters plus the drawn threshold tau.
struct SplitInstance {
  SplitParams params;
  double threshold = 0.0;

  SplitFamily family() const { return static_cast<SplitFamily>(params.index()); }
};

// ---------------------------------------------------------------------------
// Parameter sampling (the rho of each family).

namespace detail {

// Uniform on the unit sphere: normalized standard Gaussian; zero-norm draws
// are redrawn.
inline std::vector<double> sample_unit_vector(std::size_t d, Rng& rng) {
  std::vector<double> v(d);
  for (;;) {
    for (auto& x : v) x = rng.normal();
    const double n = norm(v);
    if (n > 1e-30) {
      for (auto& x : v) x /= n;
      return v;
    }
  }
}

inline std::vector<double> sample_in_range(const HyperRectangle& range, Rng& rng) {
  std::vector<double> c(range.lower.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] = rng.uniform(range.lower[j], range.upper[j]);
  return c;
}

}  // namespace detail

// Draws family parameters for a node whose points span `range` (dimension d).
inline SplitParams sample_params(const SplitFamilyDescriptor& desc,
                                 const HyperRectangle& range, Rng& rng) {
  const std::size_t d = range.lower.size();
  switch (desc.family) {
    case SplitFamily::kIf:
      return IfParams{static_cast<int>(rng.uniform_index(d))};
    case SplitFamily::kEif:
      return EifParams{detail::sample_unit_vector(d, rng)};
    case SplitFamily::kHif:
      return HifParams{detail::sample_in_range(range, rng)};
    case SplitFamily::kEllipse: {
      auto c1 = detail::sample_in_range(range, rng);
      auto c2 = detail::sample_in_range(range, rng);
      return EllipseParams{std::move(c1), std::move(c2)};
    }
    case SplitFamily::kHyper: {
      auto c1 = detail::sample_in_range(range, rng);
      auto c2 = detail::sample_in_range(range, rng);
      return HyperParams{std::move(c1), std::move(c2)};
    }
    case SplitFamily::kPara: {
      auto c = detail::sample_in_range(range, rng);
      auto v = detail::sample_unit_vector(d, rng);
      return ParaParams{std::move(c), std::move(v)};
    }
    case SplitFamily::kQuad: {
      QuadParams q;
      q.a = Matrix(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) q.a(i, j) = rng.normal();
      q.linear.resize(d);
      for (auto& x : q.linear) x = rng.uniform(-desc.quad_lambda, desc.quad_lambda);
      return q;
    }
    case SplitFamily::kNn: {
      NnParams nn;
      std::vector<std::size_t> widths;
      widths.push_back(d);
      for (int w : desc.nn_hidden_widths) widths.push_back(static_cast<std::size_t>(w));
      widths.push_back(1);
      for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Matrix w(widths[l + 1], widths[l]);
        for (std::size_t i = 0; i < w.rows(); ++i)
          for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = rng.normal();
        std::vector<double> b(widths[l + 1]);
        for (auto& x : b) x = rng.uniform(-1.0, 1.0);
        nn.weights.push_back(std::move(w));
        nn.biases.push_back(std::move(b));
      }
      return nn;
    }
    case SplitFamily::kSine:
      return SineParams{};
  }
  throw ConfigError("unknown split family");
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

inline void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got)
    throw DimensionError("point has dimension " + std::to_string(got) +
                         ", split expects " + std::to_string(expected));
}

// Forward pass; optionally records layer activations for the backward pass.
inline double nn_forward(const NnParams& nn, std::span<const double> x,
                         std::vector<std::vector<double>>* activations) {
  std::vector<double> cur(x.begin(), x.end());
  const std::size_t n_layers = nn.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Matrix& w = nn.weights[l];
    std::vector<double> next(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = nn.biases[l][i];
      const auto wrow = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) s += wrow[j] * cur[j];
      next[i] = (l + 1 < n_layers) ? std::tanh(s) : s;  // linear output layer
    }
    cur = std::move(next);
    if (activations) activations->push_back(cur);
  }
  return cur[0];
}

}  // namespace detail

inline double evaluate(const SplitParams& params, std::span<const double> x) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IfParams>) {
          if (static_cast<std::size_t>(p.feature) >= x.size())
            throw DimensionError("split feature index out of range");
          return x[static_cast<std::size_t>(p.feature)];
        } else if constexpr (std::is_same_v<T, EifParams>) {
          detail::check_dim(p.direction.size(), x.size());
          return dot(p.direction, x);
        } else if constexpr (std::is_same_v<T, HifParams>) {
          detail::check_dim(p.center.size(), x.size());
          return squared_distance(x, p.center);
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          detail::check_dim(p.focus1.size(), x.size());
          return std::sqrt(squared_distance(x, p.focus1)) +
                 std::sqrt(squared_distance(x, p.focus2));
        } else if constexpr (std::is_same_v<T, HyperParams>) {
          detail::check_dim(p.focus1.size(), x.size());
          return std::sqrt(squared_distance(x, p.focus1)) -
                 std::sqrt(squared_distance(x, p.focus2));
        } else if constexpr (std::is_same_v<T, ParaParams>) {
          detail::check_dim(p.focus.size(), x.size());
          return std::sqrt(squared_distance(x, p.focus)) + dot(p.direction, x);
        } else if constexpr (std::is_same_v<T, QuadParams>) {
          detail::check_dim(p.linear.size(), x.size());
          // x . (A + A^t) x = 2 x^t A x
          double quad = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const auto arow = p.a.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += arow[j] * x[j];
            quad += x[i] * s;
          }
          return 2.0 * quad + dot(p.linear, x);
        } else if constexpr (std::is_same_v<T, NnParams>) {
          detail::check_dim(p.weights.front().cols(), x.size());
          return detail::nn_forward(p, x, nullptr);
        } else {
          static_assert(std::is_same_v<T, SineParams>);
          detail::check_dim(2, x.size());
          return x[1] - std::sin(x[0]);
        }
      },
      params);
}

inline double evaluate(const SplitInstance& inst, std::span<const double> x) {
  return evaluate(inst.params, x);
}

// ---------------------------------------------------------------------------
// Analytic gradients.

namespace detail {

// Unit-vector term (x - c)/||x - c||; the zero vector within 1e-12 of the
// center, which is the centroid of the subgradient ball there.
inline void add_radial_term(std::span<const double> x, std::span<const double> c,
                            double sign, std::span<double> out) {
  const double dist = std::sqrt(squared_distance(x, c));
  if (dist < 1e-12) return;
  for (std::size_t j = 0; j < x.size(); ++j) out[j] += sign * (x[j] - c[j]) / dist;
}

inline void nn_gradient(const NnParams& nn, std::span<const double> x,
                        std::span<double> out) {
  std::vector<std::vector<double>> activations;
  nn_forward(nn, x, &activations);
  const std::size_t n_layers = nn.weights.size();
  // Reverse pass: delta starts as d(out)/d(out) = 1 at the scalar output.
  std::vector<double> delta{1.0};
  for (std::size_t l = n_layers; l-- > 0;) {
    const Matrix& w = nn.weights[l];
    if (l + 1 < n_layers) {
      // tanh'(s) = 1 - tanh(s)^2, and activations[l] stores tanh(s).
      for (std::size_t i = 0; i < delta.size(); ++i) {
        const double a = activations[l][i];
        delta[i] *= 1.0 - a * a;
      }
    }
    std::vector<double> prev(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto wrow = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) prev[j] += delta[i] * wrow[j];
    }
    delta = std::move(prev);
  }
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = delta[j];
}

}  // namespace detail

inline std::vector<double> gradient(const SplitParams& params,
                                    std::span<const double> x) {
  std::vector<double> g(x.size(), 0.0);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IfParams>) {
          if (static_cast<std::size_t>(p.feature) >= x.size())
            throw DimensionError("split feature index out of range");
          g[static_cast<std::size_t>(p.feature)] = 1.0;
        } else if constexpr (std::is_same_v<T, EifParams>) {
          detail::check_dim(p.direction.size(), x.size());
          for (std::size_t j = 0; j < x.size(); ++j) g[j] = p.direction[j];
        } else if constexpr (std::is_same_v<T, HifParams>) {
          detail::check_dim(p.center.size(), x.size());
          for (std::size_t j = 0; j < x.size(); ++j) g[j] = 2.0 * (x[j] - p.center[j]);
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          detail::check_dim(p.focus1.size(), x.size());
          detail::add_radial_term(x, p.focus1, 1.0, g);
          detail::add_radial_term(x, p.focus2, 1.0, g);
        } else if constexpr (std::is_same_v<T, HyperParams>) {
          detail::check_dim(p.focus1.size(), x.size());
          detail::add_radial_term(x, p.focus1, 1.0, g);
          detail::add_radial_term(x, p.focus2, -1.0, g);
        } else if constexpr (std::is_same_v<T, ParaParams>) {
          detail::check_dim(p.focus.size(), x.size());
          detail::add_radial_term(x, p.focus, 1.0, g);
          for (std::size_t j = 0; j < x.size(); ++j) g[j] += p.direction[j];
        } else if constexpr (std::is_same_v<T, QuadParams>) {
          detail::check_dim(p.linear.size(), x.size());
          // 2 (A + A^t) x + v
          for (std::size_t i = 0; i < x.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j)
              s += (p.a(i, j) + p.a(j, i)) * x[j];
            g[i] = 2.0 * s + p.linear[i];
          }
        } else if constexpr (std::is_same_v<T, NnParams>) {
          detail::check_dim(p.weights.front().cols(), x.size());
          detail::nn_gradient(p, x, g);
        } else {
          static_assert(std::is_same_v<T, SineParams>);
          detail::check_dim(2, x.size());
          g[0] = -std::cos(x[0]);
          g[1] = 1.0;
        }
      },
      params);
  return g;
}

inline std::vector<double> gradient(const SplitInstance& inst,
                                    std::span<const double> x) {
  return gradient(inst.params, x);
}

}  // namespace fubif
