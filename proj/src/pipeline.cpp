#include "uqvsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "uqvsim/error.hpp"
#include "uqvsim/evaluation.hpp"
#include "uqvsim/language_model.hpp"
#include "uqvsim/simulator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace uqvsim {

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed) {
        const auto i = next++;
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

void check_writable(const std::string& path, bool force) {
  if (fs::exists(path) && !force)
    throw ConfigError("refusing to overwrite " + path + " (use --force)");
}

std::ofstream open_output(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

std::string iteration_of(std::size_t query_index) {
  return "Q" + std::to_string(query_index - 1);
}

std::vector<TermSequence> normalized(const std::vector<std::string>& queries) {
  std::vector<TermSequence> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(normalize(q));
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

QueryVariantSet load_queries(const ExperimentConfig& config,
                             std::vector<std::string>* sources) {
  QueryVariantSet all;
  if (!config.paths.uqv.empty()) all = parse_uqv(config.paths.uqv);
  if (fs::is_regular_file(config.simulated_path()))
    all.merge(parse_uqv(config.simulated_path()));
  const auto available = all.sources();
  std::vector<std::string> chosen = config.evaluation.sources;
  if (chosen.empty()) {
    chosen = available;
  } else {
    for (const auto& s : chosen)
      if (std::find(available.begin(), available.end(), s) == available.end())
        throw ConfigError("unknown source id " + s);
  }
  QueryVariantSet filtered;
  for (const auto& [key, queries] : all.groups())
    if (std::find(chosen.begin(), chosen.end(), key.second) != chosen.end())
      filtered.set(key.first, key.second, queries);
  if (sources) *sources = chosen;
  return filtered;
}

// ---------------------------------------------------------------------------

CommandResult cmd_index(const ExperimentConfig& config) {
  config.validate(Command::kIndex);
  const auto path = config.index_path();
  const auto stats_path = path + ".stats.json";
  check_writable(path, config.force);
  check_writable(stats_path, config.force);

  const auto docs = read_corpus(config.paths.corpus);
  if (docs.empty()) throw DataError("corpus is empty: " + config.paths.corpus);
  const auto index = PostingsIndex::build(docs);
  index.validate();

  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  index.save(path);
  write_text(stats_path, index.stats_json() + "\n");

  CommandResult result;
  result.outputs = {path, stats_path};
  result.summary = "documents " + std::to_string(index.num_docs()) + ", vocabulary " +
                   std::to_string(index.vocabulary_size()) + ", tokens " +
                   std::to_string(index.total_tokens());
  return result;
}

CommandResult cmd_simulate(const ExperimentConfig& config) {
  config.validate(Command::kSimulate);
  const auto out_path = config.simulated_path();
  check_writable(out_path, config.force);

  const auto index = PostingsIndex::load(config.index_path());
  const auto topics = parse_topics(config.paths.topics);
  CommandResult result;
  Qrels qrels;
  if (!config.paths.qrels.empty() && fs::is_regular_file(config.paths.qrels))
    qrels = parse_qrels(config.paths.qrels, &result.warnings);

  QueryVariantSet simulated;
  for (const auto& spec : config.simulators) {
    std::vector<std::optional<SimulatedSession>> sessions(topics.size());
    std::vector<Warnings> warnings(topics.size());
    parallel_for(topics.size(), config.threads, [&](std::size_t i) {
      const auto& topic = topics[i];
      if (spec.source != CandidateSource::kTopic && qrels.num_relevant(topic.id) == 0) {
        warnings[i].push_back(spec.label + ", topic " + topic.id +
                              ": skipped, no relevant documents");
        return;
      }
      try {
        sessions[i] = simulate(spec, topic, qrels, index, &warnings[i]);
      } catch (const DataError& e) {
        if (spec.source == CandidateSource::kTopic) throw;
        warnings[i].push_back(spec.label + ", topic " + topic.id + ": skipped, " + e.what());
      }
    });
    for (std::size_t i = 0; i < topics.size(); ++i) {
      for (auto& w : warnings[i]) result.warnings.push_back(std::move(w));
      if (!sessions[i]) continue;
      if (sessions[i]->queries.empty()) {
        result.warnings.push_back(spec.label + ", topic " + topics[i].id +
                                  ": no queries generated");
        continue;
      }
      std::vector<std::string> queries;
      for (const auto& q : sessions[i]->queries) queries.push_back(join_terms(q));
      simulated.set(topics[i].id, spec.label, std::move(queries));
    }
  }

  auto out = open_output(out_path);
  write_uqv(out, simulated);
  result.outputs = {out_path};
  result.summary = std::to_string(simulated.groups().size()) + " simulated sessions";
  return result;
}

CommandResult cmd_run(const ExperimentConfig& config) {
  config.validate(Command::kRun);
  std::vector<std::string> sources;
  const auto queries = load_queries(config, &sources);
  for (const auto& s : sources) {
    check_writable(config.run_path(s, false), config.force);
    check_writable(config.run_path(s, true), config.force);
  }
  const auto index = PostingsIndex::load(config.index_path());
  const auto& model = config.retrieval.model;
  const auto depth = config.retrieval.depth;
  const auto session_depth = config.retrieval.session_depth;
  const auto fetch = std::max(depth, session_depth);

  CommandResult result;
  for (const auto& source : sources) {
    const auto topics = queries.topics(source);
    std::vector<std::string> per_query_text(topics.size());
    std::vector<std::string> pooled_text(topics.size());
    std::vector<Warnings> warnings(topics.size());
    parallel_for(topics.size(), config.threads, [&](std::size_t t) {
      const auto& topic = topics[t];
      const auto session = normalized(*queries.queries(topic, source));
      std::vector<RankedList> lists;
      std::ostringstream per_query;
      for (std::size_t i = 0; i < session.size(); ++i) {
        auto list = model.search(index, session[i], fetch, topic);
        if (list.empty_query)
          warnings[t].push_back(source + ", topic " + topic + ": query " +
                                std::to_string(i + 1) + " has no indexable terms");
        RankedList truncated = list;
        if (truncated.entries.size() > depth) truncated.entries.resize(depth);
        truncated.cutoff = depth;
        write_run(per_query, truncated, source, iteration_of(i + 1));
        lists.push_back(std::move(list));
      }
      std::ostringstream pooled;
      write_run(pooled, pool_rankings(lists, session_depth, topic), source, "Q0");
      per_query_text[t] = per_query.str();
      pooled_text[t] = pooled.str();
    });
    for (auto& w : warnings)
      for (auto& line : w) result.warnings.push_back(std::move(line));
    for (bool pooled : {false, true}) {
      const auto path = config.run_path(source, pooled);
      auto out = open_output(path);
      for (const auto& text : pooled ? pooled_text : per_query_text) out << text;
      result.outputs.push_back(path);
    }
  }
  result.summary = std::to_string(sources.size()) + " sources retrieved with " + model.name();
  return result;
}

CommandResult cmd_evaluate(const ExperimentConfig& config) {
  config.validate(Command::kEvaluate);
  std::vector<std::string> sources;
  const auto queries = load_queries(config, &sources);
  for (const auto& s : sources) {
    check_writable(config.eval_path(s, false), config.force);
    check_writable(config.eval_path(s, true), config.force);
  }
  CommandResult result;
  const auto qrels = parse_qrels(config.paths.qrels, &result.warnings);
  const auto& measures = config.evaluation.measures;

  for (const auto& source : sources) {
    std::map<std::pair<std::string, std::string>, RankedList> per_query;
    for (auto& entry : read_run(config.run_path(source, false)))
      per_query.emplace(std::pair{entry.topic, entry.iteration}, std::move(entry.list));
    std::map<std::string, RankedList> pooled;
    for (auto& entry : read_run(config.run_path(source, true)))
      pooled.emplace(entry.topic, std::move(entry.list));

    EvalMatrix pq;
    EvalMatrix pl;
    pq.source = pl.source = source;
    pq.model = pl.model = config.retrieval.model.name();
    pq.cutoff = config.retrieval.depth;
    pl.cutoff = config.retrieval.session_depth;
    for (const auto& m : measures) {
      pq.add_measure(m);
      pl.add_measure(m);
    }
    const auto topics = queries.topics(source);
    for (const auto& topic : topics) {
      if (!qrels.has_topic(topic)) {
        pq.unjudged.push_back(topic);
        pl.unjudged.push_back(topic);
        result.warnings.push_back(source + ", topic " + topic +
                                  ": no judgments, scored 0");
      }
      const auto n = queries.queries(topic, source)->size();
      std::vector<RankedList> session;
      for (std::size_t i = 1; i <= n; ++i) {
        auto it = per_query.find({topic, iteration_of(i)});
        RankedList list = it != per_query.end() ? it->second : RankedList{topic, {}};
        for (const auto& m : measures) pq.set(topic, i, m, evaluate(m, list, qrels, topic));
        session.push_back(std::move(list));
      }
      auto it = pooled.find(topic);
      const RankedList pooled_list = it != pooled.end() ? it->second : RankedList{topic, {}};
      for (const auto& m : measures) {
        const double value =
            m.kind == MeasureId::Kind::kSDCG
                ? sdcg(session, qrels, topic, m.b, m.bq, config.retrieval.session_depth)
                : evaluate(m, pooled_list, qrels, topic);
        pl.set(topic, n, m, value);
      }
    }
    for (const auto& [key, list] : per_query)
      if (std::find(topics.begin(), topics.end(), key.first) == topics.end())
        result.warnings.push_back(source + ": run topic " + key.first +
                                  " has no queries, ignored");
    pq.validate(topics);
    pl.validate(topics);
    for (bool pooled_mode : {false, true}) {
      const auto path = config.eval_path(source, pooled_mode);
      auto out = open_output(path);
      write_eval_matrix(out, pooled_mode ? pl : pq);
      result.outputs.push_back(path);
    }
  }
  result.summary = std::to_string(sources.size()) + " sources evaluated";
  return result;
}

// ---------------------------------------------------------------------------

namespace {

/// Scores of the first `n` queries of a session pooled at `depth`.
double session_score(const MeasureId& m, const std::vector<RankedList>& lists,
                     std::size_t depth, const Qrels& qrels, const std::string& topic) {
  if (m.kind == MeasureId::Kind::kSDCG) return sdcg(lists, qrels, topic, m.b, m.bq, depth);
  return evaluate(m, pool_rankings(lists, depth, topic), qrels, topic);
}

TopicScores first_query_scores(const EvalMatrix& matrix, const std::string& measure) {
  TopicScores scores;
  for (const auto& topic : matrix.topics()) {
    auto v = matrix.get(topic, 1, measure);
    if (!v) throw DataError(matrix.source + ", topic " + topic + ": no " + measure +
                            " score for the first query");
    scores[topic] = *v;
  }
  return scores;
}

json optional_number(std::optional<double> v) {
  return v ? json(*v) : json(nullptr);
}

struct SourceData {
  std::string source;
  std::map<std::string, std::vector<TermSequence>> sessions;
  std::optional<SessionRankings> rankings;
  /// (topic, query index) -> system labels ordered by the test measure.
  std::map<std::pair<std::string, std::size_t>, std::vector<std::string>> orderings;
};

}  // namespace

CommandResult cmd_compare(const ExperimentConfig& config) {
  config.validate(Command::kCompare);
  std::vector<std::string> sources;
  const auto queries = load_queries(config, &sources);
  const auto& ev = config.evaluation;
  if (std::find(sources.begin(), sources.end(), ev.reference) == sources.end())
    throw ConfigError("reference source " + ev.reference + " has no queries");
  const auto report_path = config.report_path();
  check_writable(report_path, config.force);

  CommandResult result;
  const auto qrels = parse_qrels(config.paths.qrels, &result.warnings);
  std::map<std::string, EvalMatrix> matrices;
  for (const auto& s : sources) {
    const auto path = config.eval_path(s, false);
    if (!fs::is_regular_file(path))
      throw DataError("source " + s + " has not been evaluated: " + path + " is missing");
    matrices.emplace(s, read_eval_matrix(path));
  }
  const auto index = PostingsIndex::load(config.index_path());
  const auto& model = config.retrieval.model;

  std::size_t max_depth = ev.isoquant_max_depth;
  for (auto d : ev.depths) max_depth = std::max(max_depth, d);

  std::vector<RetrievalModel> systems;
  for (double mu : config.retrieval.systems) systems.push_back(RetrievalModel::qld_with(mu));

  std::vector<SourceData> data(sources.size());
  parallel_for(sources.size(), config.threads, [&](std::size_t s) {
    auto& d = data[s];
    d.source = sources[s];
    for (const auto& topic : queries.topics(d.source))
      d.sessions[topic] = normalized(*queries.queries(topic, d.source));
    d.rankings.emplace(d.sessions, index, model, max_depth);
    for (const auto& [topic, session] : d.sessions) {
      for (std::size_t i = 0; i < session.size(); ++i) {
        std::map<std::string, double> scores;
        for (const auto& system : systems)
          scores[system.name()] =
              evaluate(ev.test_measure,
                       system.search(index, session[i], config.retrieval.depth, topic),
                       qrels, topic);
        d.orderings[{topic, i + 1}] = system_ordering(scores);
      }
    }
  });
  const auto ref_pos = static_cast<std::size_t>(
      std::find(sources.begin(), sources.end(), ev.reference) - sources.begin());
  const SourceData& ref = data[ref_pos];

  json report;
  report["reference"] = ev.reference;
  report["model"] = model.name();
  report["sources"] = sources;

  // ARP tables
  json arp_table = json::object();
  for (const auto& s : sources) {
    const auto& matrix = matrices.at(s);
    json entry;
    const std::pair<const char*, ArpMode> modes[] = {
        {"all", ArpMode::kAll}, {"first", ArpMode::kFirst}, {"best", ArpMode::kBest}};
    for (const auto& [name, mode] : modes) {
      json row;
      row["q"] = mode == ArpMode::kAll ? matrix.rows().size() : matrix.topics().size();
      for (const auto& [measure, value] : arp(matrix, mode)) row[measure] = value;
      entry[name] = row;
    }
    arp_table[s] = entry;
  }
  report["arp"] = arp_table;

  // paired t-tests on the first queries
  {
    const auto measure = ev.test_measure.name();
    std::map<std::string, TopicScores> firsts;
    for (const auto& s : sources) firsts[s] = first_query_scores(matrices.at(s), measure);
    json grid = json::object();
    for (const auto& a : sources) {
      json row = json::object();
      for (const auto& b : sources) row[b] = paired_ttest(firsts.at(a), firsts.at(b));
      grid[a] = row;
    }
    const auto pairs = sources.size() * (sources.size() - 1) / 2;
    report["ttest"] = {{"measure", measure},
                       {"bonferroni_alpha", 0.05 / static_cast<double>(std::max<std::size_t>(pairs, 1))},
                       {"p_values", grid}};
  }

  // RMSE by per-query depth of the pooled sessions
  {
    json curves = json::object();
    auto topic_scores = [&](const SourceData& d, const MeasureId& m, std::size_t depth) {
      TopicScores scores;
      for (const auto& [topic, lists] : d.rankings->rankings())
        scores[topic] = session_score(m, lists, depth, qrels, topic);
      return scores;
    };
    for (const auto& d : data) {
      json per_measure = json::object();
      for (const auto& m : ev.rmse_measures) {
        json values = json::array();
        for (auto depth : ev.depths)
          values.push_back(rmse(topic_scores(d, m, depth), topic_scores(ref, m, depth)));
        per_measure[m.name()] = values;
      }
      curves[d.source] = per_measure;
    }
    report["rmse_by_depth"] = {{"depths", ev.depths}, {"curves", curves}};
  }

  // Kendall's tau of the system orderings per reformulation
  {
    json curves = json::object();
    std::size_t longest = 0;
    for (const auto& d : data)
      for (const auto& [topic, session] : d.sessions) longest = std::max(longest, session.size());
    for (const auto& d : data) {
      json values = json::array();
      for (std::size_t i = 1; i <= longest; ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& [key, ordering] : d.orderings) {
          if (key.second != i) continue;
          auto it = ref.orderings.find(key);
          if (it == ref.orderings.end()) continue;
          sum += kendall_tau(ordering, it->second);
          ++count;
        }
        values.push_back(count ? json(sum / static_cast<double>(count)) : json(nullptr));
      }
      curves[d.source] = values;
    }
    json labels = json::array();
    for (const auto& s : systems) labels.push_back(s.name());
    report["kendall_tau"] = {{"measure", ev.test_measure.name()},
                             {"systems", labels},
                             {"by_query", curves}};
  }

  // sDCG per session length and depth
  {
    json curves = json::object();
    for (const auto& d : data) {
      json per_length = json::object();
      for (auto length : ev.session_lengths) {
        json values = json::array();
        for (auto depth : ev.depths) {
          double sum = 0.0;
          for (const auto& [topic, lists] : d.rankings->rankings()) {
            const std::vector<RankedList> prefix(
                lists.begin(), lists.begin() + std::min(length, lists.size()));
            sum += sdcg(prefix, qrels, topic, ev.sdcg_b, ev.sdcg_bq, depth);
          }
          const auto topics = d.rankings->rankings().size();
          values.push_back(topics ? sum / static_cast<double>(topics) : 0.0);
        }
        per_length[std::to_string(length)] = values;
      }
      curves[d.source] = per_length;
    }
    report["sdcg"] = {{"b", ev.sdcg_b}, {"bq", ev.sdcg_bq}, {"depths", ev.depths},
                      {"curves", curves}};
  }

  // isoquants and MSLE against the reference
  {
    std::vector<std::vector<Isoquant>> isoquants(data.size());
    parallel_for(data.size(), config.threads, [&](std::size_t s) {
      for (double level : ev.gain_levels)
        isoquants[s].push_back(
            isoquant(*data[s].rankings, qrels, level, ev.isoquant_max_queries));
    });
    json points = json::object();
    json errors = json::object();
    for (std::size_t s = 0; s < data.size(); ++s) {
      json per_level = json::object();
      json msle_row = json::object();
      for (std::size_t l = 0; l < ev.gain_levels.size(); ++l) {
        const auto key = format_number(ev.gain_levels[l]);
        json depths = json::array();
        for (const auto& d : isoquants[s][l].depths)
          depths.push_back(d ? json(*d) : json(nullptr));
        per_level[key] = depths;
        try {
          const auto m = msle(isoquants[s][l], isoquants[ref_pos][l]);
          msle_row[key] = {{"value", m.value},
                           {"shared_points", m.shared_points},
                           {"excluded", m.excluded}};
        } catch (const DataError& e) {
          msle_row[key] = {{"value", nullptr}, {"reason", e.what()}};
        }
      }
      points[data[s].source] = per_level;
      errors[data[s].source] = msle_row;
    }
    report["isoquants"] = {{"gain_levels", ev.gain_levels},
                           {"max_queries", ev.isoquant_max_queries},
                           {"max_depth", ev.isoquant_max_depth},
                           {"points", points},
                           {"msle", errors}};
  }

  // Jaccard similarity of the query terms, averaged over shared topics
  {
    json matrix = json::object();
    for (const auto& a : sources) {
      json row = json::object();
      for (const auto& b : sources) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& topic : queries.topics(a)) {
          const auto* qb = queries.queries(topic, b);
          if (!qb) continue;
          sum += jaccard_terms(*queries.queries(topic, a), *qb);
          ++count;
        }
        row[b] = optional_number(count ? std::optional(sum / static_cast<double>(count))
                                       : std::nullopt);
      }
      matrix[a] = row;
    }
    report["jaccard"] = matrix;
  }

  auto out = open_output(report_path);
  out << report.dump(2) << '\n';
  result.outputs = {report_path};
  result.summary = std::to_string(sources.size()) + " sources compared with " + ev.reference;
  return result;
}

}  // namespace uqvsim
