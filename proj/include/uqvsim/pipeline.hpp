#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "uqvsim/collection.hpp"
#include "uqvsim/config.hpp"

namespace uqvsim {

/// What a command produced, for the caller to print.
struct CommandResult {
  std::vector<std::string> outputs;  // files written
  std::string summary;
  Warnings warnings;
};

/// Builds the index from paths.corpus and writes it with a stats JSON file
/// next to it. Refuses to overwrite without `force`.
CommandResult cmd_index(const ExperimentConfig& config);

/// Runs every configured simulator over every topic into
/// <output>/simulated.tsv. Topics without relevant documents are skipped
/// with a warning for simulators that need them.
CommandResult cmd_simulate(const ExperimentConfig& config);

/// Writes a per-query run (iteration column Q<i-1> for query i) and a pooled
/// session run (iteration Q0) per source.
CommandResult cmd_run(const ExperimentConfig& config);

/// Scores the runs of every source into per-query and pooled EvalMatrix CSVs.
/// The pooled matrix stores each topic under the index of its last query.
CommandResult cmd_evaluate(const ExperimentConfig& config);

/// Compares every source with the reference and writes <output>/compare.json.
CommandResult cmd_compare(const ExperimentConfig& config);

/// Every query source known to the config: real variants from paths.uqv and
/// simulated ones from the simulate output, restricted to
/// evaluation.sources when given (unknown ids are a ConfigError).
QueryVariantSet load_queries(const ExperimentConfig& config,
                             std::vector<std::string>* sources);

/// Calls fn(i) for i in [0, n) on up to `threads` threads. The first exception
/// thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace uqvsim
