#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "uqvsim/collection.hpp"
#include "uqvsim/index.hpp"
#include "uqvsim/language_model.hpp"

namespace uqvsim {

/// Query modification strategies. S2P/S3P/S4P/S4PP are the primed variants.
enum class Strategy { kS1, kS2, kS2P, kS3, kS3P, kS4, kS4P, kS4PP };

std::string_view to_string(Strategy strategy);
/// Accepts S1, S2, S2P, S3, S3P, S4, S4P, S4PP; prime marks (S2', S4'') are
/// accepted as aliases. Throws ConfigError otherwise.
Strategy parse_strategy(std::string_view name);
bool is_qcm(Strategy strategy);

/// Weights of the term-level reformulation score and the candidate n-gram
/// enumeration settings.
struct QcmParams {
  double alpha = 0.0;    // reward for title terms
  double beta = 0.0;     // damping of added topic terms
  double epsilon = 0.0;  // idf weight of added non-topic terms
  double delta = 0.0;    // penalty weight of removed terms
  std::vector<std::size_t> ngram_sizes = {3, 4, 5};
  /// Number of top candidate terms considered; 0 selects the default for the
  /// candidate source (20 for rel, the whole list otherwise).
  std::size_t vocab_cap = 0;

  /// Presets for kS4, kS4P and kS4PP.
  static QcmParams preset(Strategy strategy);
  void validate() const;
};

struct StrategyId {
  Strategy kind = Strategy::kS1;
  std::optional<QcmParams> qcm;  // set exactly for the S4 family

  static StrategyId conventional(Strategy kind);
  static StrategyId with_preset(Strategy kind);
  std::string name() const { return std::string(to_string(kind)); }
};

inline constexpr std::size_t kDefaultTopicPlusRelK = 4;
inline constexpr std::size_t kDefaultRelVocabCap = 20;

/// Declarative description of one simulator.
struct SimulatorSpec {
  std::string label;
  CandidateSource source = CandidateSource::kTopic;
  std::size_t k = kDefaultTopicPlusRelK;  // used by kTopicPlusRel
  StrategyId strategy;
  std::size_t n_queries = 10;
  double lambda = kDefaultLambda;

  /// TTS_<strategy> / KIS_<strategy> with the pairing of candidate source and
  /// strategy family used throughout: conventional TTS -> topic terms,
  /// conventional KIS -> rel terms, S4-family TTS -> topic+rel (k = 4),
  /// S4-family KIS -> rel terms. Throws ConfigError for other labels.
  static SimulatorSpec from_label(const std::string& label);
  void validate() const;
};

struct SimulatedSession {
  std::string topic_id;
  std::vector<TermSequence> queries;
  SimulatorSpec provenance;
};

// ---------------------------------------------------------------------------
// Conventional strategies

/// Query patterns over candidates t1, t2, ...:
///   S1  {t_i}            S2  {t1, t_{i+1}}       S2P {t1, t2, t_{i+2}}
///   S3  {t1..t_i}        S3P {t1..t_{i+2}}
/// Stops early, with a warning, when the candidates run out.
std::vector<TermSequence> generate_conventional(const CandidateList& candidates,
                                                Strategy strategy, std::size_t n,
                                                Warnings* warnings = nullptr);

// ---------------------------------------------------------------------------
// QCM-scored strategies

/// Every combination of the top-`cap` candidates whose size is in `sizes`,
/// each rendered in candidate-list order. Sizes ascending, combinations in
/// lexicographic index order within a size.
std::vector<TermSequence> enumerate_query_candidates(
    const CandidateList& candidates, const std::vector<std::size_t>& sizes,
    std::size_t cap);

/// Everything the term score needs to know about a topic. All membership
/// tests compare stems.
class QcmContext {
 public:
  /// `title` is the normalized title; `topic_terms` is T_topic.
  QcmContext(const TermSequence& title, const TermSequence& topic_terms,
             const TermDistribution& cqg, const PostingsIndex& index,
             const QcmParams& params);
  QcmContext(const Topic& topic, const TermDistribution& cqg,
             const PostingsIndex& index, const QcmParams& params);

  /// Unique title terms; the reference of the first formulation.
  const TermSequence& title() const { return title_; }
  bool in_title(const std::string& key) const { return title_keys_.contains(key); }
  bool in_topic(const std::string& key) const { return topic_keys_.contains(key); }
  double prob(const std::string& key) const { return cqg_->prob(key); }
  double idf(const std::string& key) const;
  const QcmParams& params() const { return params_; }

 private:
  TermSequence title_;
  std::unordered_set<std::string> title_keys_;
  std::unordered_set<std::string> topic_keys_;
  const TermDistribution* cqg_;
  const PostingsIndex* index_;
  QcmParams params_;
};

/// Term score of `term` for the reformulation reference -> candidate.
/// For a term of the candidate the first matching case wins:
///   title term                 alpha (1 - P(t|D_rel))
///   added, in topic text       1 - beta P(t|D_rel)
///   added, not in topic text   epsilon idf(t)
///   otherwise (kept)           0
/// A reference term missing from the candidate scores -delta P(t|D_rel).
double qcm_theta(const Term& term, const TermSequence& candidate,
                 const TermSequence& reference, const QcmContext& context);

/// (sum of theta over candidate terms + sum of theta over removed reference
/// terms) / |candidate|. Throws DataError for an empty candidate.
double qcm_query_score(const TermSequence& candidate,
                       const TermSequence& reference, const QcmContext& context);

/// Greedy session over an explicit candidate pool: at step i every
/// combination is scored against the reference (the title for i = 1, the
/// previous query afterwards) and the best one not yet emitted is chosen.
/// Ties go to the shorter, then lexicographically smaller query.
std::vector<TermSequence> simulate_qcm(const CandidateList& pool,
                                       const QcmContext& context,
                                       std::size_t n_queries,
                                       Warnings* warnings = nullptr);

/// Builds the candidate pool and QCM context for `spec` and runs the greedy
/// selection.
SimulatedSession simulate_qcm(const SimulatorSpec& spec, const Topic& topic,
                              const Qrels& qrels, const PostingsIndex& index,
                              Warnings* warnings = nullptr);

/// Any simulator: conventional strategies or the QCM family.
SimulatedSession simulate(const SimulatorSpec& spec, const Topic& topic,
                          const Qrels& qrels, const PostingsIndex& index,
                          Warnings* warnings = nullptr);

// ---------------------------------------------------------------------------
// Sessions

struct SessionRun {
  /// Rankings of the individual queries, each at the requested depth.
  std::vector<RankedList> per_query;
  /// Concatenation in query order, keeping only the first retrieval of each
  /// document. Each entry keeps its original retrieval score, so scores are
  /// non-increasing within a query's segment only.
  RankedList pooled;
};

using Retriever = std::function<RankedList(const TermSequence& query,
                                           std::size_t depth)>;

SessionRun run_session(const std::vector<TermSequence>& queries,
                       const Retriever& retrieve, std::size_t depth,
                       const std::string& topic_id);
SessionRun run_session(const std::vector<TermSequence>& queries,
                       const PostingsIndex& index, const RetrievalModel& model,
                       std::size_t depth, const std::string& topic_id);

/// Pools already-retrieved per-query rankings, truncating each to `depth`.
RankedList pool_rankings(const std::vector<RankedList>& rankings,
                         std::size_t depth, const std::string& topic_id);

}  // namespace uqvsim
