// fubif command line: fit / score / explain / benchmark / scoremap / gen-data.
// Configuration comes from an optional JSON file plus flag overrides (flags
// win); every command is deterministic given its flags and seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fubif/fubif.hpp"

namespace {

using namespace fubif;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDimension = 4;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

// Options every subcommand shares; only flags the user actually passed
// override the config file.
struct ConfigFlags {
  std::string config_path;
  std::string family;
  double quad_lambda = 0;
  std::string nn_widths;
  std::string threshold_kind;
  double eta = 0;
  int n_trees = 0;
  int subsample = 0;
  std::string max_depth;
  std::uint64_t seed = 0;
  std::string scenario;
  double contamination = 0;
  int runs = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--family", family,
                    "split family: if|eif|hif|ellipse|hyper|para|quad|nn|sine");
    cmd->add_option("--quad-lambda", quad_lambda, "lambda for the quad family");
    cmd->add_option("--nn-widths", nn_widths,
                    "comma-separated hidden widths for the nn family");
    cmd->add_option("--threshold", threshold_kind, "threshold kind: uniform|normal");
    cmd->add_option("--eta", eta, "normal-threshold std scale");
    cmd->add_option("--n-trees", n_trees, "number of trees");
    cmd->add_option("--subsample", subsample, "per-tree subsample size (psi)");
    cmd->add_option("--max-depth", max_depth, "max tree depth or 'auto'");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--scenario", scenario, "training scenario: I|II");
    cmd->add_option("--contamination", contamination,
                    "anomaly fraction for score-based partitions");
    cmd->add_option("--runs", runs, "seeded repetitions for benchmark/auc_fs");
  }

  RunConfig resolve(const CLI::App* cmd) const {
    RunConfig rc;
    if (!config_path.empty()) rc = load_run_config(config_path);
    auto passed = [cmd](const std::string& name) { return cmd->count(name) > 0; };
    if (passed("--family")) rc.family = family;
    if (passed("--quad-lambda")) rc.quad_lambda = quad_lambda;
    if (passed("--nn-widths")) {
      rc.nn_hidden_widths.clear();
      std::stringstream ss(nn_widths);
      std::string tok;
      while (std::getline(ss, tok, ','))
        rc.nn_hidden_widths.push_back(std::stoi(tok));
    }
    if (passed("--threshold")) rc.threshold_kind = threshold_kind;
    if (passed("--eta")) rc.eta = eta;
    if (passed("--n-trees")) rc.n_trees = n_trees;
    if (passed("--subsample")) rc.subsample = subsample;
    if (passed("--max-depth")) rc.max_depth = max_depth;
    if (passed("--seed")) rc.seed = seed;
    if (passed("--scenario")) rc.scenario = scenario;
    if (passed("--contamination")) rc.contamination = contamination;
    if (passed("--runs")) rc.runs = runs;
    rc.validate();
    return rc;
  }
};

Dataset load_dataset(const std::string& path, const std::string& label_column,
                     bool ignore_labels) {
  if (ignore_labels) return load_csv(path, std::nullopt);
  // Use the label column when the header has it; plain features otherwise.
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  in.close();
  std::stringstream ss(header);
  std::string column;
  bool found = false;
  while (std::getline(ss, column, ',')) {
    while (!column.empty() && (column.back() == '\r' || column.back() == ' '))
      column.pop_back();
    if (column == label_column) found = true;
  }
  return load_csv(path, found ? std::optional<std::string>(label_column)
                              : std::nullopt);
}

std::vector<double> parse_offset(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("bad offset component '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

// Atomic file write: everything lands or nothing does.
void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw DataError("failed while writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_fit(const std::string& data_path, const std::string& model_path,
            const RunConfig& rc, const std::string& label_column, bool no_labels) {
  const Dataset ds = load_dataset(data_path, label_column, no_labels);
  const auto [train, test] = scenario_split(ds, rc.scenario_enum(), rc.seed);
  const auto start = std::chrono::steady_clock::now();
  const Forest forest = fit(train.points, rc.forest_config());
  const double ms = elapsed_ms(start);
  save_forest(forest, model_path);
  std::cout << "fit_ms " << format_double(ms) << "\n"
            << "trees " << forest.trees.size() << " effective_subsample "
            << forest.effective_subsample << " dimension " << forest.dimension
            << "\nmodel " << model_path << "\n";
  return kExitOk;
}

int cmd_score(const std::string& model_path, const std::string& data_path,
              const std::string& out_path, bool with_metrics,
              const std::string& label_column, bool no_labels) {
  const Forest forest = load_forest(model_path);
  const Dataset ds = load_dataset(data_path, label_column, no_labels);
  const auto start = std::chrono::steady_clock::now();
  const auto scores = anomaly_scores(forest, ds.points);
  const double ms = elapsed_ms(start);

  std::string out = "row_index,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i)
    out += std::to_string(i) + "," + format_double(scores[i]) + "\n";
  if (with_metrics) {
    if (!ds.has_labels()) throw DataError("labels required");
    const ScoredLabels sl{scores, *ds.labels};
    double positives = 0;
    for (int l : *ds.labels) positives += l;
    const double p = positives / static_cast<double>(ds.size());
    const double ap = average_precision(sl);
    const double auc = roc_auc(sl);
    const double prec = precision_at_contamination(sl, p);
    for (const auto& [name, value] :
         {std::pair<const char*, double>{"avg_prec", ap},
          {"roc_auc", auc},
          {"prec_at_contamination", prec}}) {
      out += std::string("# ") + name + "," + format_double(value) + "\n";
      std::cout << name << " " << format_double(value) << "\n";
    }
  }
  write_text_file(out_path, out);
  std::cout << "score_ms " << format_double(ms) << "\nscores " << out_path << "\n";
  return kExitOk;
}

int cmd_explain(const std::string& model_path, const std::string& data_path,
                const std::string& mode, const std::string& out_path,
                const RunConfig& rc, const CLI::App* cmd,
                const std::string& label_column, bool no_labels) {
  const Forest forest = load_forest(model_path);
  const Dataset ds = load_dataset(data_path, label_column, no_labels);
  if (mode == "local") {
    const ExplainContext ctx(forest);
    const Matrix imp = ctx.local_importance_batch(ds.points);
    std::string out = "row_index";
    for (std::size_t j = 0; j < imp.cols(); ++j) out += ",imp_" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < imp.rows(); ++i) {
      out += std::to_string(i);
      for (std::size_t j = 0; j < imp.cols(); ++j)
        out += "," + format_double(imp(i, j));
      out += "\n";
    }
    write_text_file(out_path, out);
  } else if (mode == "global") {
    const bool use_labels = ds.has_labels();
    const bool contamination_given = cmd->count("--contamination") > 0;
    if (!use_labels && !contamination_given)
      throw DataError("global explanation needs labels or --contamination");
    const auto gi = global_importance(
        forest, ds.points, use_labels ? &*ds.labels : nullptr,
        use_labels ? std::nullopt : std::optional<double>(rc.contamination));
    std::string out = "feature_index,score\n";
    for (std::size_t j = 0; j < gi.gfi.size(); ++j)
      out += std::to_string(j) + "," + format_double(gi.gfi[j]) + "\n";
    out += std::string("# partition=") +
           (use_labels ? "labels"
                       : "contamination:" + format_double(rc.contamination)) +
           ",seed=" + std::to_string(forest.config.master_seed) + "\n";
    write_text_file(out_path, out);
  } else {
    throw ConfigError("explain mode must be 'local' or 'global'");
  }
  std::cout << "importance " << out_path << "\n";
  return kExitOk;
}

int cmd_gen_data(const std::string& kind, std::uint64_t seed,
                 const std::string& out_path, const std::string& translate_spec) {
  Dataset ds;
  if (kind == "xaxis") ds = generate_xaxis(seed);
  else if (kind == "bisect3d") ds = generate_bisect3d(seed);
  else throw ConfigError("unknown kind '" + kind + "' (use xaxis or bisect3d)");
  if (!translate_spec.empty()) ds = translate(ds, parse_offset(translate_spec));
  save_csv(ds, out_path);
  std::cout << "dataset " << out_path << " rows " << ds.size() << "\n";
  return kExitOk;
}

int cmd_scoremap(const std::string& model_path, const std::string& data_path,
                 const std::string& bounds_spec, int grid,
                 const std::string& out_path, const std::string& label_column) {
  const Forest forest = load_forest(model_path);
  GridBounds bounds;
  if (!bounds_spec.empty()) {
    const auto v = parse_offset(bounds_spec);
    if (v.size() != 4) throw ConfigError("--bounds needs x_lo,x_hi,y_lo,y_hi");
    bounds = GridBounds{v[0], v[1], v[2], v[3]};
  } else if (!data_path.empty()) {
    const Dataset ds = load_dataset(data_path, label_column, false);
    if (ds.dimension() != 2) throw DimensionError("scoremap requires 2-d models");
    bounds = padded_bounds(ds.points);
  } else {
    throw ConfigError("scoremap needs --data or --bounds");
  }
  const auto cells = score_grid(forest, bounds, grid);
  std::string out = "x,y,score\n";
  for (const auto& c : cells)
    out += format_double(c[0]) + "," + format_double(c[1]) + "," +
           format_double(c[2]) + "\n";
  write_text_file(out_path, out);
  std::cout << "scoremap " << out_path << " cells " << cells.size() << "\n";
  return kExitOk;
}

int cmd_benchmark(const std::string& datasets_dir, const std::string& out_path,
                  const RunConfig& rc, const std::string& families_spec,
                  bool with_auc_fs) {
  std::vector<std::string> family_names;
  {
    std::stringstream ss(families_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      parse_family(tok);  // validate early
      family_names.push_back(tok);
    }
  }
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(datasets_dir))
    throw DataError("'" + datasets_dir + "' is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(datasets_dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::string out =
      "dataset,model,scenario,threshold_kind,avg_prec,roc_auc,prec_at_p,auc_fs,"
      "fit_ms,score_ms,runs\n";
  for (const auto& file : files) {
    for (const auto& family : family_names) {
      try {
        Dataset ds = load_dataset(file.string(), "label", false);
        if (!ds.has_labels()) throw DataError("labels required");
        const auto [train, test] = scenario_split(ds, rc.scenario_enum(), rc.seed);
        double positives = 0;
        for (int l : *ds.labels) positives += l;
        const double p = positives / static_cast<double>(ds.size());

        RunConfig cell_rc = rc;
        cell_rc.family = family;
        ForestConfig config = cell_rc.forest_config();

        double ap_sum = 0, auc_sum = 0, prec_sum = 0;
        std::vector<double> fit_times, score_times;
        for (int run = 0; run < rc.runs; ++run) {
          config.master_seed = mix_seed(rc.seed, static_cast<std::uint64_t>(run));
          const auto t0 = std::chrono::steady_clock::now();
          const Forest forest = fit(train.points, config);
          fit_times.push_back(elapsed_ms(t0));
          const auto t1 = std::chrono::steady_clock::now();
          const auto scores = anomaly_scores(forest, test.points);
          score_times.push_back(elapsed_ms(t1));
          const ScoredLabels sl{scores, *test.labels};
          ap_sum += average_precision(sl);
          auc_sum += roc_auc(sl);
          prec_sum += precision_at_contamination(sl, p);
        }
        const auto median = [](std::vector<double> v) {
          std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
          return v[v.size() / 2];
        };
        std::string auc_fs_cell = "";
        if (with_auc_fs) {
          config.master_seed = rc.seed;
          const Forest forest = fit(train.points, config);
          const auto gi =
              global_importance(forest, test.points, &*test.labels, std::nullopt);
          const double value = auc_fs(ds, config, rc.scenario_enum(), gi.gfi,
                                      rc.runs, mix_seed(rc.seed, 0xFEEDull));
          auc_fs_cell = format_double(value);
        }
        out += ds.name + "," + family + "," + scenario_name(rc.scenario_enum()) +
               "," + rc.threshold_kind + "," +
               format_double(ap_sum / rc.runs) + "," +
               format_double(auc_sum / rc.runs) + "," +
               format_double(prec_sum / rc.runs) + "," + auc_fs_cell + "," +
               format_double(median(fit_times)) + "," +
               format_double(median(score_times)) + "," + std::to_string(rc.runs) +
               "\n";
      } catch (const std::exception& e) {
        std::cerr << "benchmark: " << file.filename().string() << " x " << family
                  << " failed: " << e.what() << "\n";
      }
    }
  }
  write_text_file(out_path, out);
  std::cout << "report " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Function-based isolation forests with feature importance"};
  app.require_subcommand(1);

  ConfigFlags flags;
  std::string data_path, model_path, out_path, mode = "global";
  std::string label_column = "label";
  bool no_labels = false;
  bool with_metrics = false;
  std::string kind, translate_spec, bounds_spec;
  std::string families = "if,eif,hif,ellipse,hyper,para,quad,nn";
  bool with_auc_fs = false;
  int grid = 64;

  auto* fit_cmd = app.add_subcommand("fit", "train a forest and save the model");
  fit_cmd->add_option("--data", data_path, "training CSV")->required();
  fit_cmd->add_option("--out", model_path, "model output path")->required();
  fit_cmd->add_option("--label-column", label_column, "label column name");
  fit_cmd->add_flag("--no-labels", no_labels, "treat every column as a feature");
  flags.attach(fit_cmd);

  auto* score_cmd = app.add_subcommand("score", "score points with a saved model");
  score_cmd->add_option("--model", model_path, "model path")->required();
  score_cmd->add_option("--data", data_path, "CSV to score")->required();
  score_cmd->add_option("--out", out_path, "scores CSV")->required();
  score_cmd->add_flag("--metrics", with_metrics, "append AP/ROC-AUC/precision@p");
  score_cmd->add_option("--label-column", label_column, "label column name");
  score_cmd->add_flag("--no-labels", no_labels, "ignore any label column");

  auto* explain_cmd = app.add_subcommand("explain", "feature importance");
  explain_cmd->add_option("--model", model_path, "model path")->required();
  explain_cmd->add_option("--data", data_path, "CSV to explain")->required();
  explain_cmd->add_option("--mode", mode, "local|global");
  explain_cmd->add_option("--out", out_path, "importance CSV")->required();
  explain_cmd->add_option("--label-column", label_column, "label column name");
  explain_cmd->add_flag("--no-labels", no_labels, "ignore any label column");
  flags.attach(explain_cmd);

  auto* bench_cmd = app.add_subcommand("benchmark", "dataset x family report");
  bench_cmd->add_option("--datasets", data_path, "directory of labeled CSVs")
      ->required();
  bench_cmd->add_option("--out", out_path, "report CSV")->required();
  bench_cmd->add_option("--families", families, "comma-separated family list");
  bench_cmd->add_flag("--with-auc-fs", with_auc_fs, "also compute AUC_FS per cell");
  flags.attach(bench_cmd);

  auto* map_cmd = app.add_subcommand("scoremap", "score a 2-d grid");
  map_cmd->add_option("--model", model_path, "model path")->required();
  map_cmd->add_option("--data", data_path, "CSV for grid bounds");
  map_cmd->add_option("--bounds", bounds_spec, "x_lo,x_hi,y_lo,y_hi");
  map_cmd->add_option("--grid", grid, "grid size m (m x m cells)");
  map_cmd->add_option("--out", out_path, "scoremap CSV")->required();
  map_cmd->add_option("--label-column", label_column, "label column name");

  auto* gen_cmd = app.add_subcommand("gen-data", "write a synthetic dataset");
  gen_cmd->add_option("--kind", kind, "xaxis|bisect3d")->required();
  gen_cmd->add_option("--seed", flags.seed, "generator seed");
  gen_cmd->add_option("--out", out_path, "dataset CSV")->required();
  gen_cmd->add_option("--translate", translate_spec, "comma-separated offset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (fit_cmd->parsed())
      return cmd_fit(data_path, model_path, flags.resolve(fit_cmd), label_column,
                     no_labels);
    if (score_cmd->parsed())
      return cmd_score(model_path, data_path, out_path, with_metrics, label_column,
                       no_labels);
    if (explain_cmd->parsed())
      return cmd_explain(model_path, data_path, mode, out_path,
                         flags.resolve(explain_cmd), explain_cmd, label_column,
                         no_labels);
    if (bench_cmd->parsed())
      return cmd_benchmark(data_path, out_path, flags.resolve(bench_cmd), families,
                           with_auc_fs);
    if (map_cmd->parsed())
      return cmd_scoremap(model_path, data_path, bounds_spec, grid, out_path,
                          label_column);
    if (gen_cmd->parsed())
      return cmd_gen_data(kind, flags.seed, out_path, translate_spec);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kExitDimension;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
