#pragma once

// Synthetic benchmark generators, CSV ingestion, scenario splitting, and
// affine translation for the bias experiment.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fubif/errors.hpp"
#include "fubif/matrix.hpp"
#include "fubif/rng.hpp"
#include "fubif/splitting.hpp"

namespace fubif {

struct Dataset {
  std::string name;
  Matrix points;
  std::optional<std::vector<int>> labels;  // 1 = anomaly

  std::size_t size() const { return points.rows(); }
  std::size_t dimension() const { return points.cols(); }
  bool has_labels() const { return labels.has_value(); }
};

enum class Scenario { kOne, kTwo };

inline Scenario parse_scenario(const std::string& name) {
  if (name == "I" || name == "i" || name == "1") return Scenario::kOne;
  if (name == "II" || name == "ii" || name == "2") return Scenario::kTwo;
  throw ConfigError("unknown scenario '" + name + "' (use I or II)");
}

inline const char* scenario_name(Scenario s) {
  return s == Scenario::kOne ? "I" : "II";
}

namespace detail {

// 1000 inliers uniform in the unit 6-ball plus 100 anomalies displaced by
// +-r (r ~ U[2,3]) along `direction`, with N(0, 0.05^2) noise per coordinate.
inline Dataset generate_displaced(std::uint64_t seed, std::span<const double> direction,
                                  const std::string& name) {
  constexpr std::size_t kInliers = 1000;
  constexpr std::size_t kAnomalies = 100;
  constexpr std::size_t kDim = 6;
  constexpr double kNoiseSigma = 0.05;
  Dataset ds;
  ds.name = name;
  ds.points = Matrix(kInliers + kAnomalies, kDim);
  ds.labels = std::vector<int>(kInliers + kAnomalies, 0);
  Rng rng(mix_seed(seed, 0x64617461ull));
  for (std::size_t i = 0; i < kInliers; ++i) {
    const auto dir = detail::sample_unit_vector(kDim, rng);
    const double radius = std::pow(rng.uniform01(), 1.0 / static_cast<double>(kDim));
    for (std::size_t j = 0; j < kDim; ++j) ds.points(i, j) = radius * dir[j];
  }
  for (std::size_t i = 0; i < kAnomalies; ++i) {
    const double r = rng.uniform(2.0, 3.0);
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    const std::size_t row = kInliers + i;
    for (std::size_t j = 0; j < kDim; ++j)
      ds.points(row, j) = sign * r * direction[j] + kNoiseSigma * rng.normal();
    (*ds.labels)[row] = 1;
  }
  return ds;
}

}  // namespace detail

// Anomalies along the first feature.
inline Dataset generate_xaxis(std::uint64_t seed) {
  const std::vector<double> e1{1, 0, 0, 0, 0, 0};
  return detail::generate_displaced(seed, e1, "xaxis");
}

// Anomalies along the bisector of the first three features.
inline Dataset generate_bisect3d(std::uint64_t seed) {
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<double> bisector{s, s, s, 0, 0, 0};
  return detail::generate_displaced(seed, bisector, "bisect3d");
}

// ---------------------------------------------------------------------------
// CSV: header row, numeric feature columns, optional {0,1} label column.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col_no) {
  const std::string t = trim(cell);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end == t.c_str() || *end != '\0' || !std::isfinite(v))
    throw DataError("csv: non-numeric or non-finite cell '" + cell + "' at line " +
                    std::to_string(line_no) + ", column " + std::to_string(col_no));
  return v;
}

}  // namespace detail

inline Dataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: '" + path + "' is empty");
  const auto header = detail::split_csv_line(line);

  std::optional<std::size_t> label_idx;
  if (label_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (detail::trim(header[j]) == *label_column) label_idx = j;
    if (!label_idx)
      throw DataError("csv: unknown label column '" + *label_column + "' in '" +
                      path + "'");
  }

  const std::size_t d = header.size() - (label_idx ? 1 : 0);
  if (d == 0) throw DataError("csv: no feature columns in '" + path + "'");
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t n = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double v = detail::parse_cell(cells[j], line_no, j + 1);
      if (label_idx && j == *label_idx) {
        if (v != 0.0 && v != 1.0)
          throw DataError("csv: label at line " + std::to_string(line_no) +
                          " must be 0 or 1, got '" + cells[j] + "'");
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
    ++n;
  }

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.points = Matrix(n, d);
  ds.points.values() = std::move(values);
  if (label_idx) ds.labels = std::move(labels);
  return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    for (std::size_t j = 0; j < ds.dimension(); ++j) out << (j ? ",f" : "f") << j;
    if (ds.has_labels()) out << ",label";
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto row = ds.points.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
        out << (j ? "," : "") << buf;
      }
      if (ds.has_labels()) out << ',' << (*ds.labels)[i];
      out << '\n';
    }
    if (!out) throw DataError("failed while writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

// Scenario I trains on everything; Scenario II trains on inliers only.
// The test set is the full dataset in both.
inline std::pair<Dataset, Dataset> scenario_split(const Dataset& ds, Scenario scenario,
                                                  std::uint64_t /*seed*/) {
  if (scenario == Scenario::kOne) return {ds, ds};
  if (!ds.has_labels()) throw DataError("scenario II requires labels");
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if ((*ds.labels)[i] == 0) inliers.push_back(i);
  Dataset train;
  train.name = ds.name;
  train.points = ds.points.take_rows(inliers);
  train.labels = std::vector<int>(inliers.size(), 0);
  return {std::move(train), ds};
}

inline Dataset translate(const Dataset& ds, std::span<const double> offset) {
  if (offset.size() != ds.dimension())
    throw DimensionError("offset dimension does not match dataset");
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = out.points.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += offset[j];
  }
  return out;
}

// Keeps only the given feature columns (used by feature-selection curves).
inline Dataset project_features(const Dataset& ds, std::span<const std::size_t> cols) {
  Dataset out;
  out.name = ds.name;
  out.points = ds.points.take_cols(cols);
  out.labels = ds.labels;
  return out;
}

}  // namespace fubif
