#pragma once

// Threshold distributions over the sampled split values {f(x) | x in Y}:
// uniform over their range, or normal with the sample mean and eta-scaled
// population standard deviation. The normal variant permits cuts beyond the
// data range, forming empty branches.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "fubif/errors.hpp"
#include "fubif/rng.hpp"

namespace fubif {

enum class ThresholdKind : int { kUniform = 0, kNormal = 1 };

inline const char* threshold_kind_name(ThresholdKind k) {
  return k == ThresholdKind::kUniform ? "uniform" : "normal";
}

inline ThresholdKind parse_threshold_kind(const std::string& name) {
  if (name == "uniform") return ThresholdKind::kUniform;
  if (name == "normal") return ThresholdKind::kNormal;
  throw ConfigError("unknown threshold kind '" + name + "'");
}

struct ThresholdModel {
  ThresholdKind kind = ThresholdKind::kUniform;
  double lo = 0.0, hi = 0.0;      // uniform
  double mean = 0.0, sigma = 0.0; // normal, sigma already scaled by eta
  double eta = 1.0;               // kept for provenance

  // A degenerate model cannot separate the node's points.
  bool degenerate() const {
    return kind == ThresholdKind::kUniform ? !(lo < hi) : !(sigma > 0.0);
  }
};

inline ThresholdModel fit_threshold_model(std::span<const double> values,
                                          ThresholdKind kind, double eta) {
  if (values.empty()) throw DataError("no sample values");
  ThresholdModel m;
  m.kind = kind;
  m.eta = eta;
  if (kind == ThresholdKind::kUniform) {
    m.lo = *std::min_element(values.begin(), values.end());
    m.hi = *std::max_element(values.begin(), values.end());
  } else {
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
      const double d = v - m.mean;
      ss += d * d;
    }
    // Population standard deviation: well defined for |Y| = 1 (sigma = 0).
    m.sigma = eta * std::sqrt(ss / static_cast<double>(values.size()));
  }
  return m;
}

inline double sample_threshold(const ThresholdModel& m, Rng& rng) {
  if (m.kind == ThresholdKind::kUniform) return rng.uniform(m.lo, m.hi);
  return m.mean + m.sigma * rng.normal();
}

// P(tau <= t). Degenerate models behave as a point mass: 0 below, 1 above,
// 0.5 at the atom, so cdf(-inf)=0 and cdf(+inf)=1 still hold.
inline double threshold_cdf(const ThresholdModel& m, double t) {
  if (m.kind == ThresholdKind::kUniform) {
    if (!(m.lo < m.hi)) return t < m.lo ? 0.0 : (t > m.lo ? 1.0 : 0.5);
    return std::clamp((t - m.lo) / (m.hi - m.lo), 0.0, 1.0);
  }
  if (!(m.sigma > 0.0)) return t < m.mean ? 0.0 : (t > m.mean ? 1.0 : 0.5);
  return 0.5 * std::erfc(-(t - m.mean) / (m.sigma * 1.4142135623730951));
}

}  // namespace fubif
