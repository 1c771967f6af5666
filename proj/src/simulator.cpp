#include "uqvsim/simulator.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "uqvsim/error.hpp"

namespace uqvsim {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kS1: return "S1";
    case Strategy::kS2: return "S2";
    case Strategy::kS2P: return "S2P";
    case Strategy::kS3: return "S3";
    case Strategy::kS3P: return "S3P";
    case Strategy::kS4: return "S4";
    case Strategy::kS4P: return "S4P";
    case Strategy::kS4PP: return "S4PP";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  std::string canonical;
  for (char c : name) {
    if (c == '\'') {
      canonical.push_back('P');
    } else {
      canonical.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  for (auto s : {Strategy::kS1, Strategy::kS2, Strategy::kS2P, Strategy::kS3,
                 Strategy::kS3P, Strategy::kS4, Strategy::kS4P, Strategy::kS4PP}) {
    if (canonical == to_string(s)) return s;
  }
  throw ConfigError("unknown strategy: " + std::string(name));
}

bool is_qcm(Strategy strategy) {
  return strategy == Strategy::kS4 || strategy == Strategy::kS4P ||
         strategy == Strategy::kS4PP;
}

QcmParams QcmParams::preset(Strategy strategy) {
  QcmParams p;
  switch (strategy) {
    case Strategy::kS4:
      p.alpha = 2.2;
      p.beta = 0.2;
      p.epsilon = 0.05;
      p.delta = 0.6;
      break;
    case Strategy::kS4P:
      p.alpha = 2.2;
      p.beta = 0.2;
      p.epsilon = 0.25;
      p.delta = 0.1;
      break;
    case Strategy::kS4PP:
      p.alpha = 0.2;
      p.beta = 0.2;
      p.epsilon = 0.025;
      p.delta = 0.5;
      break;
    default:
      throw ConfigError("no QCM preset for strategy " +
                        std::string(to_string(strategy)));
  }
  return p;
}

void QcmParams::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && epsilon >= 0.0 && delta >= 0.0))
    throw ConfigError("QCM weights must be non-negative");
  if (ngram_sizes.empty()) throw ConfigError("QCM needs at least one n-gram size");
  for (auto n : ngram_sizes)
    if (n == 0) throw ConfigError("QCM n-gram sizes must be >= 1");
  const auto largest = *std::max_element(ngram_sizes.begin(), ngram_sizes.end());
  if (vocab_cap != 0 && vocab_cap < largest)
    throw ConfigError("QCM vocabulary cap smaller than the largest n-gram size");
}

StrategyId StrategyId::conventional(Strategy kind) {
  if (is_qcm(kind))
    throw ConfigError(std::string(to_string(kind)) + " needs QCM parameters");
  return {kind, std::nullopt};
}

StrategyId StrategyId::with_preset(Strategy kind) {
  if (!is_qcm(kind)) return conventional(kind);
  return {kind, QcmParams::preset(kind)};
}

SimulatorSpec SimulatorSpec::from_label(const std::string& label) {
  const auto sep = label.find('_');
  if (sep == std::string::npos)
    throw ConfigError("simulator label must look like TTS_<strategy> or "
                      "KIS_<strategy>: " + label);
  const auto family = label.substr(0, sep);
  const auto strategy = parse_strategy(label.substr(sep + 1));
  SimulatorSpec spec;
  spec.label = label;
  spec.strategy = StrategyId::with_preset(strategy);
  if (family == "TTS") {
    spec.source = is_qcm(strategy) ? CandidateSource::kTopicPlusRel
                                   : CandidateSource::kTopic;
  } else if (family == "KIS") {
    spec.source = CandidateSource::kRel;
  } else {
    throw ConfigError("unknown simulator family in label " + label);
  }
  return spec;
}

void SimulatorSpec::validate() const {
  if (label.empty()) throw ConfigError("simulator label must not be empty");
  if (n_queries == 0) throw ConfigError(label + ": n_queries must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError(label + ": lambda must lie in [0, 1]");
  const bool qcm = is_qcm(strategy.kind);
  if (qcm != strategy.qcm.has_value())
    throw ConfigError(label + ": QCM parameters must be given exactly for S4 strategies");
  if (qcm) strategy.qcm->validate();
  if (qcm && source == CandidateSource::kTopic)
    throw ConfigError(label + ": S4 strategies draw from rel or topic_plus_rel terms");
  if (!qcm && source == CandidateSource::kTopicPlusRel)
    throw ConfigError(label + ": topic_plus_rel terms are only used by S4 strategies");
  if (label.starts_with("TTS_")) {
    const auto expected = qcm ? CandidateSource::kTopicPlusRel : CandidateSource::kTopic;
    if (source != expected)
      throw ConfigError(label + ": TTS simulators use " +
                        std::string(to_string(expected)) + " terms");
  } else if (label.starts_with("KIS_")) {
    if (source != CandidateSource::kRel)
      throw ConfigError(label + ": KIS simulators use rel terms");
  }
}

// ---------------------------------------------------------------------------

std::vector<TermSequence> generate_conventional(const CandidateList& candidates,
                                                Strategy strategy, std::size_t n,
                                                Warnings* warnings) {
  const auto& t = candidates.terms;
  std::vector<TermSequence> queries;
  for (std::size_t i = 1; i <= n; ++i) {
    TermSequence q;
    // Index (1-based) of the last candidate the i-th query needs.
    std::size_t needed = 0;
    switch (strategy) {
      case Strategy::kS1: needed = i; break;
      case Strategy::kS2: needed = i + 1; break;
      case Strategy::kS2P: needed = i + 2; break;
      case Strategy::kS3: needed = i; break;
      case Strategy::kS3P: needed = i + 2; break;
      default:
        throw ConfigError(std::string(to_string(strategy)) +
                          " is not a conventional strategy");
    }
    if (needed > t.size()) break;
    switch (strategy) {
      case Strategy::kS1:
        q = {t[i - 1].term};
        break;
      case Strategy::kS2:
        q = {t[0].term, t[i].term};
        break;
      case Strategy::kS2P:
        q = {t[0].term, t[1].term, t[i + 1].term};
        break;
      case Strategy::kS3:
      case Strategy::kS3P:
        for (std::size_t j = 0; j < needed; ++j) q.push_back(t[j].term);
        break;
      default:
        break;
    }
    queries.push_back(std::move(q));
  }
  if (queries.size() < n && warnings) {
    warnings->push_back(std::string(to_string(strategy)) + ": only " +
                        std::to_string(queries.size()) + " of " + std::to_string(n) +
                        " queries from " + std::to_string(t.size()) + " candidates");
  }
  return queries;
}

// ---------------------------------------------------------------------------

namespace {

// Calls visit(indices) for every k-subset of [0, m) in lexicographic order.
template <typename Visit>
void for_each_combination(std::size_t m, std::size_t k, Visit&& visit) {
  if (k == 0 || k > m) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<std::size_t> sorted_unique_sizes(const std::vector<std::size_t>& sizes) {
  std::set<std::size_t> s(sizes.begin(), sizes.end());
  return {s.begin(), s.end()};
}

TermSequence unique_by_stem(const TermSequence& terms) {
  TermSequence out;
  std::unordered_set<std::string> keys;
  for (const auto& t : terms)
    if (keys.insert(stem(t)).second) out.push_back(t);
  return out;
}

// Theta of a term that is part of the candidate query.
double member_theta(const std::string& key, bool in_reference,
                    const QcmContext& ctx) {
  const auto& p = ctx.params();
  if (ctx.in_title(key)) return p.alpha * (1.0 - ctx.prob(key));
  if (in_reference) return 0.0;
  if (ctx.in_topic(key)) return 1.0 - p.beta * ctx.prob(key);
  return p.epsilon * ctx.idf(key);
}

// Theta of a reference term the candidate dropped.
double removed_theta(const std::string& key, const QcmContext& ctx) {
  return -ctx.params().delta * ctx.prob(key);
}

}  // namespace

std::vector<TermSequence> enumerate_query_candidates(
    const CandidateList& candidates, const std::vector<std::size_t>& sizes,
    std::size_t cap) {
  const std::size_t m = std::min(cap, candidates.size());
  std::vector<TermSequence> out;
  for (auto size : sorted_unique_sizes(sizes)) {
    for_each_combination(m, size, [&](const std::vector<std::size_t>& idx) {
      TermSequence q;
      q.reserve(idx.size());
      for (auto i : idx) q.push_back(candidates.terms[i].term);
      out.push_back(std::move(q));
    });
  }
  return out;
}

QcmContext::QcmContext(const TermSequence& title, const TermSequence& topic_terms,
                       const TermDistribution& cqg, const PostingsIndex& index,
                       const QcmParams& params)
    : title_(unique_by_stem(title)), cqg_(&cqg), index_(&index), params_(params) {
  for (const auto& t : title_) title_keys_.insert(stem(t));
  for (const auto& t : topic_terms) topic_keys_.insert(stem(t));
}

QcmContext::QcmContext(const Topic& topic, const TermDistribution& cqg,
                       const PostingsIndex& index, const QcmParams& params)
    : QcmContext(normalize(topic.title), candidates_topic(topic).surface_terms(),
                 cqg, index, params) {}

double QcmContext::idf(const std::string& key) const {
  return uqvsim::idf(*index_, key);
}

double qcm_theta(const Term& term, const TermSequence& candidate,
                 const TermSequence& reference, const QcmContext& context) {
  const auto key = stem(term);
  auto contains = [&](const TermSequence& seq) {
    return std::any_of(seq.begin(), seq.end(),
                       [&](const Term& t) { return stem(t) == key; });
  };
  const bool in_reference = contains(reference);
  if (contains(candidate)) return member_theta(key, in_reference, context);
  if (in_reference) return removed_theta(key, context);
  return 0.0;
}

double qcm_query_score(const TermSequence& candidate,
                       const TermSequence& reference, const QcmContext& context) {
  if (candidate.empty()) throw DataError("cannot score an empty query");
  std::unordered_set<std::string> candidate_keys;
  for (const auto& t : candidate) candidate_keys.insert(stem(t));
  std::vector<std::string> reference_keys;
  std::unordered_set<std::string> reference_set;
  for (const auto& t : reference) {
    auto key = stem(t);
    if (reference_set.insert(key).second) reference_keys.push_back(std::move(key));
  }

  double sum = 0.0;
  for (const auto& t : candidate) {
    const auto key = stem(t);
    sum += member_theta(key, reference_set.contains(key), context);
  }
  for (const auto& key : reference_keys)
    if (!candidate_keys.contains(key)) sum += removed_theta(key, context);
  return sum / static_cast<double>(candidate.size());
}

std::vector<TermSequence> simulate_qcm(const CandidateList& pool,
                                       const QcmContext& context,
                                       std::size_t n_queries, Warnings* warnings) {
  const auto& params = context.params();
  params.validate();
  const std::size_t m = pool.size();
  const auto sizes = sorted_unique_sizes(params.ngram_sizes);

  std::vector<std::string> keys(m);
  std::unordered_map<std::string, std::size_t> pool_index;
  for (std::size_t i = 0; i < m; ++i) {
    keys[i] = pool.terms[i].key;
    pool_index.emplace(keys[i], i);
  }

  // Reference terms as (key, pool index or m when outside the pool).
  std::vector<std::pair<std::string, std::size_t>> reference;
  for (const auto& t : context.title()) {
    auto key = stem(t);
    auto it = pool_index.find(key);
    reference.emplace_back(key, it == pool_index.end() ? m : it->second);
  }

  std::set<std::vector<std::size_t>> emitted;
  std::vector<TermSequence> session;
  std::vector<char> in_candidate(m + 1, 0);
  std::vector<char> in_reference(m, 0);
  std::vector<double> theta(m);
  std::vector<double> penalty;

  auto lexicographically_less = [&](const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [&](std::size_t x, std::size_t y) { return pool.terms[x].term < pool.terms[y].term; });
  };

  for (std::size_t step = 0; step < n_queries; ++step) {
    std::fill(in_reference.begin(), in_reference.end(), 0);
    penalty.clear();
    for (const auto& [key, idx] : reference) {
      if (idx < m) in_reference[idx] = 1;
      penalty.push_back(removed_theta(key, context));
    }
    for (std::size_t i = 0; i < m; ++i)
      theta[i] = member_theta(keys[i], in_reference[i] != 0, context);

    std::optional<std::vector<std::size_t>> best;
    double best_score = 0.0;
    for (auto size : sizes) {
      for_each_combination(m, size, [&](const std::vector<std::size_t>& idx) {
        for (auto i : idx) in_candidate[i] = 1;
        double sum = 0.0;
        for (auto i : idx) sum += theta[i];
        for (std::size_t r = 0; r < reference.size(); ++r)
          if (!in_candidate[reference[r].second]) sum += penalty[r];
        for (auto i : idx) in_candidate[i] = 0;
        const double score = sum / static_cast<double>(idx.size());

        bool take = !best.has_value() || score > best_score;
        if (!take && score == best_score) {
          take = idx.size() < best->size() ||
                 (idx.size() == best->size() && lexicographically_less(idx, *best));
        }
        if (take && !emitted.contains(idx)) {
          best = idx;
          best_score = score;
        }
      });
    }
    if (!best) {
      if (warnings)
        warnings->push_back("candidate pool exhausted after " +
                            std::to_string(session.size()) + " of " +
                            std::to_string(n_queries) + " queries");
      break;
    }
    emitted.insert(*best);
    TermSequence query;
    reference.clear();
    for (auto i : *best) {
      query.push_back(pool.terms[i].term);
      reference.emplace_back(keys[i], i);
    }
    session.push_back(std::move(query));
  }
  return session;
}

namespace {

std::string label_prefix(const SimulatorSpec& spec, const Topic& topic) {
  return spec.label + ", topic " + topic.id + ": ";
}

void prefix_new_warnings(Warnings* warnings, std::size_t from,
                         const std::string& prefix) {
  if (!warnings) return;
  for (std::size_t i = from; i < warnings->size(); ++i)
    (*warnings)[i] = prefix + (*warnings)[i];
}

}  // namespace

SimulatedSession simulate_qcm(const SimulatorSpec& spec, const Topic& topic,
                              const Qrels& qrels, const PostingsIndex& index,
                              Warnings* warnings) {
  spec.validate();
  if (!is_qcm(spec.strategy.kind))
    throw ConfigError(spec.label + ": not an S4-family simulator");
  const auto& params = *spec.strategy.qcm;
  const auto cqg = cqg_model(topic_model(index, qrels, topic.id),
                             background_model(index), spec.lambda);
  const auto rel = candidates_rel(cqg);
  CandidateList pool = spec.source == CandidateSource::kRel
                           ? rel
                           : candidates_topic_plus_rel(topic, rel, spec.k);
  std::size_t cap = params.vocab_cap;
  if (cap == 0)
    cap = spec.source == CandidateSource::kRel ? kDefaultRelVocabCap : pool.size();
  if (pool.terms.size() > cap) pool.terms.resize(cap);

  const QcmContext context(topic, cqg, index, params);
  const auto before = warnings ? warnings->size() : 0;
  SimulatedSession session{topic.id, simulate_qcm(pool, context, spec.n_queries, warnings),
                           spec};
  prefix_new_warnings(warnings, before, label_prefix(spec, topic));
  return session;
}

SimulatedSession simulate(const SimulatorSpec& spec, const Topic& topic,
                          const Qrels& qrels, const PostingsIndex& index,
                          Warnings* warnings) {
  if (is_qcm(spec.strategy.kind))
    return simulate_qcm(spec, topic, qrels, index, warnings);
  spec.validate();
  const CandidateList candidates =
      spec.source == CandidateSource::kRel
          ? candidates_rel(index, qrels, topic.id, spec.lambda)
          : candidates_topic(topic);
  const auto before = warnings ? warnings->size() : 0;
  SimulatedSession session{
      topic.id,
      generate_conventional(candidates, spec.strategy.kind, spec.n_queries, warnings),
      spec};
  prefix_new_warnings(warnings, before, label_prefix(spec, topic));
  return session;
}

// ---------------------------------------------------------------------------

RankedList pool_rankings(const std::vector<RankedList>& rankings,
                         std::size_t depth, const std::string& topic_id) {
  RankedList pooled;
  pooled.topic_id = topic_id;
  std::unordered_set<std::string> seen;
  for (const auto& list : rankings) {
    const auto n = std::min(depth, list.entries.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (seen.insert(list.entries[i].doc_id).second)
        pooled.entries.push_back(list.entries[i]);
    }
  }
  pooled.cutoff = depth * rankings.size();
  return pooled;
}

SessionRun run_session(const std::vector<TermSequence>& queries,
                       const Retriever& retrieve, std::size_t depth,
                       const std::string& topic_id) {
  if (depth == 0) throw ConfigError("per-query depth must be >= 1");
  SessionRun run;
  for (const auto& q : queries) {
    auto list = retrieve(q, depth);
    list.topic_id = topic_id;
    run.per_query.push_back(std::move(list));
  }
  run.pooled = pool_rankings(run.per_query, depth, topic_id);
  return run;
}

SessionRun run_session(const std::vector<TermSequence>& queries,
                       const PostingsIndex& index, const RetrievalModel& model,
                       std::size_t depth, const std::string& topic_id) {
  return run_session(
      queries,
      [&](const TermSequence& q, std::size_t d) { return model.search(index, q, d, topic_id); },
      depth, topic_id);
}

}  // namespace uqvsim
