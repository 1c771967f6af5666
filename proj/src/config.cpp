#include "uqvsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "uqvsim/error.hpp"

namespace fs = std::filesystem;

namespace uqvsim {

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kIndex:
      return "index";
    case Command::kSimulate:
      return "simulate";
    case Command::kRun:
      return "run";
    case Command::kEvaluate:
      return "evaluate";
    case Command::kCompare:
      return "compare";
  }
  return "?";
}

namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError("unknown key " + where + "." + key);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + " has an invalid value");
  }
}

template <typename T>
void read_if(const YAML::Node& parent, const char* key, const std::string& where,
             T& target) {
  if (auto node = parent[key]) target = scalar<T>(node, where + "." + key);
}

template <typename T>
void read_list_if(const YAML::Node& parent, const char* key, const std::string& where,
                  std::vector<T>& target) {
  auto node = parent[key];
  if (!node) return;
  const auto path = where + "." + key;
  if (!node.IsSequence()) throw ConfigError(path + " must be a list");
  target.clear();
  for (const auto& item : node) target.push_back(scalar<T>(item, path));
}

std::vector<MeasureId> parse_measures(const std::vector<std::string>& names,
                                      const std::string& where) {
  std::vector<MeasureId> out;
  for (const auto& name : names) {
    try {
      out.push_back(MeasureId::parse(name));
    } catch (const DataError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

std::string resolve(const std::string& path, const fs::path& base) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

CandidateSource parse_source(const std::string& name, const std::string& where) {
  if (name == "topic") return CandidateSource::kTopic;
  if (name == "rel") return CandidateSource::kRel;
  if (name == "topic_plus_rel") return CandidateSource::kTopicPlusRel;
  throw ConfigError(where + ": unknown candidate source " + name);
}

SimulatorSpec parse_simulator(const YAML::Node& node, const std::string& where,
                              double lambda) {
  if (node.IsScalar()) {
    auto spec = SimulatorSpec::from_label(node.as<std::string>());
    spec.lambda = lambda;
    return spec;
  }
  check_keys(node, where,
             {"label", "source", "k", "strategy", "n_queries", "lambda", "alpha", "beta",
              "epsilon", "delta", "ngram_sizes", "vocab_cap"});
  if (!node["label"]) throw ConfigError(where + ".label is required");
  const auto label = scalar<std::string>(node["label"], where + ".label");

  SimulatorSpec spec;
  if (node["strategy"]) {
    const auto strategy =
        parse_strategy(scalar<std::string>(node["strategy"], where + ".strategy"));
    spec.label = label;
    spec.strategy = StrategyId::with_preset(strategy);
    if (!node["source"]) {
      if (label.starts_with("TTS_") || label.starts_with("KIS_")) {
        spec.source = SimulatorSpec::from_label(label.substr(0, 4) +
                                                std::string(to_string(strategy)))
                          .source;
      } else {
        throw ConfigError(where + ".source is required for label " + label);
      }
    }
  } else {
    spec = SimulatorSpec::from_label(label);
  }
  spec.lambda = lambda;
  if (node["source"])
    spec.source = parse_source(scalar<std::string>(node["source"], where + ".source"),
                               where + ".source");
  read_if(node, "k", where, spec.k);
  read_if(node, "n_queries", where, spec.n_queries);
  read_if(node, "lambda", where, spec.lambda);

  const bool has_qcm_keys = node["alpha"] || node["beta"] || node["epsilon"] ||
                            node["delta"] || node["ngram_sizes"] || node["vocab_cap"];
  if (has_qcm_keys) {
    if (!spec.strategy.qcm)
      throw ConfigError(where + ": QCM parameters given for conventional strategy " +
                        spec.strategy.name());
    auto& qcm = *spec.strategy.qcm;
    read_if(node, "alpha", where, qcm.alpha);
    read_if(node, "beta", where, qcm.beta);
    read_if(node, "epsilon", where, qcm.epsilon);
    read_if(node, "delta", where, qcm.delta);
    read_list_if(node, "ngram_sizes", where, qcm.ngram_sizes);
    read_if(node, "vocab_cap", where, qcm.vocab_cap);
  }
  return spec;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError("paths." + what + " is required");
  if (!fs::is_regular_file(path))
    throw ConfigError("paths." + what + " does not exist: " + path);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& yaml,
                                         const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  ExperimentConfig config;
  if (root.IsNull()) return config;
  check_keys(root, "config",
             {"paths", "retrieval", "language_model", "simulators", "evaluation",
              "threads", "seed"});
  const fs::path base(base_dir);

  if (auto paths = root["paths"]) {
    check_keys(paths, "paths", {"corpus", "topics", "qrels", "uqv", "index", "output"});
    auto& p = config.paths;
    read_if(paths, "corpus", "paths", p.corpus);
    read_if(paths, "topics", "paths", p.topics);
    read_if(paths, "qrels", "paths", p.qrels);
    read_if(paths, "uqv", "paths", p.uqv);
    read_if(paths, "index", "paths", p.index);
    read_if(paths, "output", "paths", p.output);
  }
  for (auto* p : {&config.paths.corpus, &config.paths.topics, &config.paths.qrels,
                  &config.paths.uqv, &config.paths.index, &config.paths.output})
    *p = resolve(*p, base);

  if (auto r = root["retrieval"]) {
    check_keys(r, "retrieval", {"model", "k1", "b", "mu", "depth", "session_depth",
                                "systems"});
    std::string model = "bm25";
    read_if(r, "model", "retrieval", model);
    if (model == "bm25") {
      config.retrieval.model = RetrievalModel::bm25_default();
    } else if (model == "qld") {
      config.retrieval.model = RetrievalModel::qld_with(QldParams{}.mu);
    } else {
      throw ConfigError("retrieval.model must be bm25 or qld, not " + model);
    }
    read_if(r, "k1", "retrieval", config.retrieval.model.bm25.k1);
    read_if(r, "b", "retrieval", config.retrieval.model.bm25.b);
    read_if(r, "mu", "retrieval", config.retrieval.model.qld.mu);
    read_if(r, "depth", "retrieval", config.retrieval.depth);
    read_if(r, "session_depth", "retrieval", config.retrieval.session_depth);
    read_list_if(r, "systems", "retrieval", config.retrieval.systems);
  }

  if (auto lm = root["language_model"]) {
    check_keys(lm, "language_model", {"lambda"});
    read_if(lm, "lambda", "language_model", config.lambda);
  }

  if (auto sims = root["simulators"]) {
    if (!sims.IsSequence()) throw ConfigError("simulators must be a list");
    std::size_t i = 0;
    for (const auto& item : sims)
      config.simulators.push_back(
          parse_simulator(item, "simulators[" + std::to_string(i++) + "]", config.lambda));
  }

  if (auto ev = root["evaluation"]) {
    check_keys(ev, "evaluation",
               {"measures", "reference", "sources", "test_measure", "rmse_measures",
                "depths", "sdcg_b", "sdcg_bq", "session_lengths", "gain_levels",
                "isoquant_max_queries", "isoquant_max_depth"});
    auto& e = config.evaluation;
    std::vector<std::string> names;
    read_list_if(ev, "measures", "evaluation", names);
    if (ev["measures"]) e.measures = parse_measures(names, "evaluation.measures");
    names.clear();
    read_list_if(ev, "rmse_measures", "evaluation", names);
    if (ev["rmse_measures"])
      e.rmse_measures = parse_measures(names, "evaluation.rmse_measures");
    if (ev["test_measure"])
      e.test_measure = parse_measures(
          {scalar<std::string>(ev["test_measure"], "evaluation.test_measure")},
          "evaluation.test_measure")[0];
    read_if(ev, "reference", "evaluation", e.reference);
    read_list_if(ev, "sources", "evaluation", e.sources);
    read_list_if(ev, "depths", "evaluation", e.depths);
    read_if(ev, "sdcg_b", "evaluation", e.sdcg_b);
    read_if(ev, "sdcg_bq", "evaluation", e.sdcg_bq);
    read_list_if(ev, "session_lengths", "evaluation", e.session_lengths);
    read_list_if(ev, "gain_levels", "evaluation", e.gain_levels);
    read_if(ev, "isoquant_max_queries", "evaluation", e.isoquant_max_queries);
    read_if(ev, "isoquant_max_depth", "evaluation", e.isoquant_max_depth);
  }

  read_if(root, "threads", "config", config.threads);
  read_if(root, "seed", "config", config.seed);
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string text;
  text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  auto base = fs::path(path).parent_path();
  return parse(text, base.empty() ? "." : base.string());
}

void ExperimentConfig::validate(Command command) const {
  try {
    retrieval.model.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("retrieval: ") + e.what());
  }
  if (retrieval.depth == 0) throw ConfigError("retrieval.depth must be >= 1");
  if (retrieval.session_depth == 0)
    throw ConfigError("retrieval.session_depth must be >= 1");
  for (double mu : retrieval.systems)
    if (!(mu > 0.0)) throw ConfigError("retrieval.systems: mu must be > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("language_model.lambda must lie in [0, 1]");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  if (paths.output.empty()) throw ConfigError("paths.output is required");

  std::set<std::string> labels;
  for (const auto& spec : simulators) {
    spec.validate();
    if (!labels.insert(spec.label).second)
      throw ConfigError("duplicate simulator label " + spec.label);
  }

  const auto& e = evaluation;
  if (e.measures.empty()) throw ConfigError("evaluation.measures must not be empty");
  for (auto d : e.depths)
    if (d == 0) throw ConfigError("evaluation.depths must be >= 1");
  for (auto n : e.session_lengths)
    if (n == 0) throw ConfigError("evaluation.session_lengths must be >= 1");
  for (double g : e.gain_levels)
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("evaluation.gain_levels must lie in (0, 1)");
  if (!(e.sdcg_b > 1.0) || !(e.sdcg_bq > 1.0))
    throw ConfigError("evaluation.sdcg_b and sdcg_bq must be > 1");
  if (e.isoquant_max_queries == 0 || e.isoquant_max_depth == 0)
    throw ConfigError("isoquant bounds must be >= 1");
  std::set<std::string> sources;
  for (const auto& s : e.sources)
    if (!sources.insert(s).second) throw ConfigError("duplicate evaluation source " + s);

  const bool needs_rel = std::any_of(simulators.begin(), simulators.end(), [](const auto& s) {
    return s.source != CandidateSource::kTopic;
  });
  switch (command) {
    case Command::kIndex:
      require_file(paths.corpus, "corpus");
      break;
    case Command::kSimulate:
      if (simulators.empty()) throw ConfigError("simulators must not be empty");
      require_file(index_path(), "index");
      require_file(paths.topics, "topics");
      if (needs_rel) require_file(paths.qrels, "qrels");
      break;
    case Command::kRun:
      require_file(index_path(), "index");
      if (!paths.uqv.empty()) require_file(paths.uqv, "uqv");
      if (paths.uqv.empty() && !fs::is_regular_file(simulated_path()))
        throw ConfigError("no queries to run: set paths.uqv or run simulate first");
      break;
    case Command::kEvaluate:
      require_file(paths.qrels, "qrels");
      break;
    case Command::kCompare:
      require_file(paths.qrels, "qrels");
      require_file(index_path(), "index");
      if (!paths.uqv.empty()) require_file(paths.uqv, "uqv");
      if (e.reference.empty()) throw ConfigError("evaluation.reference is required");
      if (retrieval.systems.size() < 2)
        throw ConfigError("retrieval.systems needs at least two mu values");
      if (!e.sources.empty() && !sources.contains(e.reference))
        throw ConfigError("evaluation.reference " + e.reference +
                          " is not among evaluation.sources");
      break;
  }
}

std::string ExperimentConfig::index_path() const {
  if (!paths.index.empty()) return paths.index;
  return (fs::path(paths.output) / "index.bin").string();
}

std::string ExperimentConfig::simulated_path() const {
  return (fs::path(paths.output) / "simulated.tsv").string();
}

std::string ExperimentConfig::run_path(const std::string& source, bool pooled) const {
  return (fs::path(paths.output) / "runs" /
          (source + (pooled ? ".pooled.run" : ".perquery.run")))
      .string();
}

std::string ExperimentConfig::eval_path(const std::string& source, bool pooled) const {
  return (fs::path(paths.output) / "eval" /
          (source + (pooled ? ".pooled.csv" : ".perquery.csv")))
      .string();
}

std::string ExperimentConfig::report_path() const {
  return (fs::path(paths.output) / "compare.json").string();
}

}  // namespace uqvsim
