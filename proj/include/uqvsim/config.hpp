#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uqvsim/index.hpp"
#include "uqvsim/measure.hpp"
#include "uqvsim/simulator.hpp"

namespace uqvsim {

enum class Command { kIndex, kSimulate, kRun, kEvaluate, kCompare };

std::string_view to_string(Command command);

struct PathsConfig {
  std::string corpus;
  std::string topics;
  std::string qrels;
  std::string uqv;  // real query variants; optional
  std::string index;
  std::string output = "out";
};

struct RetrievalConfig {
  RetrievalModel model;
  std::size_t depth = 1000;         // per-query run depth
  std::size_t session_depth = 100;  // documents per query in pooled runs
  /// Dirichlet mu values of the QLD systems ranked for Kendall's tau.
  std::vector<double> systems = {50, 250, 500, 1250, 2500, 5000};
};

struct EvaluationConfig {
  std::vector<MeasureId> measures = {MeasureId::ap(), MeasureId::ndcg(),
                                     MeasureId::precision(10)};
  /// Source that every other source is compared against.
  std::string reference;
  /// Sources to run, evaluate and compare; empty means every known source.
  std::vector<std::string> sources;
  /// Measure of the paired t-tests and the system orderings.
  MeasureId test_measure = MeasureId::ndcg();
  /// Measures of the RMSE-by-depth curves.
  std::vector<MeasureId> rmse_measures = {MeasureId::precision(1000),
                                          MeasureId::ndcg(), MeasureId::ap()};
  /// Per-query depths of the RMSE and sDCG curves.
  std::vector<std::size_t> depths = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  double sdcg_b = 2.0;
  double sdcg_bq = 4.0;
  std::vector<std::size_t> session_lengths = {3, 5, 10};
  std::vector<double> gain_levels = {0.3, 0.4, 0.5};
  std::size_t isoquant_max_queries = 10;
  std::size_t isoquant_max_depth = 100;
};

/// One experiment. Relative paths are resolved against the directory of the
/// config file.
struct ExperimentConfig {
  PathsConfig paths;
  RetrievalConfig retrieval;
  double lambda = kDefaultLambda;
  std::vector<SimulatorSpec> simulators;
  EvaluationConfig evaluation;
  std::size_t threads = 1;
  bool force = false;
  unsigned long long seed = 0;  // reserved

  /// Parses YAML text; throws ConfigError with the offending key.
  static ExperimentConfig parse(const std::string& yaml, const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);

  /// Checks the whole config for `command`, including that every input the
  /// command reads exists. Throws ConfigError.
  void validate(Command command) const;

  std::string index_path() const;
  std::string simulated_path() const;  // <output>/simulated.tsv
  std::string run_path(const std::string& source, bool pooled) const;
  std::string eval_path(const std::string& source, bool pooled) const;
  std::string report_path() const;     // <output>/compare.json
};

}  // namespace uqvsim
