// Command-line front end: uqvsim <index|simulate|run|evaluate|compare> --config FILE

#include <CLI11.hpp>

#include <iostream>

#include "uqvsim/config.hpp"
#include "uqvsim/error.hpp"
#include "uqvsim/pipeline.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::string output;
  bool force = false;
  std::size_t threads = 0;
  unsigned long long seed = 0;
};

int run(uqvsim::Command command, const GlobalFlags& flags) {
  auto config = uqvsim::ExperimentConfig::load(flags.config);
  if (!flags.output.empty()) config.paths.output = flags.output;
  if (flags.force) config.force = true;
  if (flags.threads > 0) config.threads = flags.threads;
  config.seed = flags.seed;

  uqvsim::CommandResult result;
  switch (command) {
    case uqvsim::Command::kIndex:
      result = uqvsim::cmd_index(config);
      break;
    case uqvsim::Command::kSimulate:
      result = uqvsim::cmd_simulate(config);
      break;
    case uqvsim::Command::kRun:
      result = uqvsim::cmd_run(config);
      break;
    case uqvsim::Command::kEvaluate:
      result = uqvsim::cmd_evaluate(config);
      break;
    case uqvsim::Command::kCompare:
      result = uqvsim::cmd_compare(config);
      break;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& path : result.outputs) std::cout << "wrote " << path << '\n';
  if (!result.summary.empty()) std::cout << result.summary << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and validate user query variants"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config, "Experiment config (YAML)")->required();
  app.add_option("--output", flags.output, "Override paths.output");
  app.add_flag("--force", flags.force, "Overwrite existing outputs");
  app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", flags.seed, "Reserved; every algorithm is deterministic");

  const std::pair<const char*, uqvsim::Command> commands[] = {
      {"index", uqvsim::Command::kIndex},
      {"simulate", uqvsim::Command::kSimulate},
      {"run", uqvsim::Command::kRun},
      {"evaluate", uqvsim::Command::kEvaluate},
      {"compare", uqvsim::Command::kCompare},
  };
  const char* descriptions[] = {
      "Build the inverted index from the corpus",
      "Simulate query sessions for every topic",
      "Write per-query and pooled session runs",
      "Score runs into evaluation matrices",
      "Compare query sources against the reference",
  };
  std::map<CLI::App*, uqvsim::Command> by_app;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, descriptions[i]);
    sub->fallthrough();
    by_app[sub] = commands[i].second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, command] : by_app)
      if (sub->parsed()) return run(command, flags);
  } catch (const uqvsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
