#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uqvsim/collection.hpp"
#include "uqvsim/index.hpp"
#include "uqvsim/measure.hpp"

namespace uqvsim {

/// Per-topic scores of one query source, keyed by topic id.
using TopicScores = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Single-ranking measures. Relevance is binary at grade >= 1 for AP and P@k;
// nDCG uses the raw grades as gains.

/// (1/R) * sum of P@i over ranks i holding a relevant document. Returns 0 and
/// sets *no_relevant when the topic has no relevant documents.
double average_precision(const RankedList& run, const Qrels& qrels,
                         const std::string& topic, bool* no_relevant = nullptr);

/// DCG with gain = grade and discount 1/log2(i + 1), divided by the DCG of
/// the ideal ordering of all judged grades. cutoff 0 means the whole run.
double ndcg(const RankedList& run, const Qrels& qrels, const std::string& topic,
            std::size_t cutoff = 0, bool* no_relevant = nullptr);

/// Relevant documents among the first k, divided by k.
double precision_at(const RankedList& run, const Qrels& qrels,
                    const std::string& topic, std::size_t k);

/// Dispatches on `measure`; sDCG treats the run as a one-query session.
double evaluate(const MeasureId& measure, const RankedList& run,
                const Qrels& qrels, const std::string& topic);

// ---------------------------------------------------------------------------
// Aggregation and reproducibility measures

enum class ArpMode { kAll, kFirst, kBest };

/// Mean per measure. kAll averages every (topic, query) cell, kFirst the cells
/// of query 1, kBest the per-topic maxima (taken per measure).
std::map<std::string, double> arp(const EvalMatrix& matrix, ArpMode mode);

/// Root mean squared topic-paired difference. Topic sets must match.
double rmse(const TopicScores& simulated, const TopicScores& reference);

/// Two-sided paired t-test p-value with n - 1 degrees of freedom. All-zero
/// differences give p = 1; requires n >= 2 and matching topic sets.
double paired_ttest(const TopicScores& simulated, const TopicScores& reference);

/// Regularized incomplete beta function I_x(a, b), accurate to about 1e-10.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// (concordant - discordant) / (n (n - 1) / 2) over two orderings of the same
/// systems.
double kendall_tau(const std::vector<std::string>& order_a,
                   const std::vector<std::string>& order_b);

/// System labels by score descending, ties by label ascending.
std::vector<std::string> system_ordering(const std::map<std::string, double>& scores);

// ---------------------------------------------------------------------------
// Sessions

/// Session DCG: sum over queries j of (1 + log_bq j)^-1 times the sum over
/// ranks i <= depth of grade / max(1, log_b i). A document already shown by an
/// earlier query contributes nothing again; ranks are the query's own ranks.
double sdcg(const std::vector<RankedList>& session, const Qrels& qrels,
            const std::string& topic, double b, double bq, std::size_t depth);

/// Minimal uniform per-query browsing depth per number of queries that reaches
/// a fixed gain level. depths[q - 1] is nullopt when unreachable (a miss).
struct Isoquant {
  double gain_level = 0.0;
  std::vector<std::optional<std::size_t>> depths;

  bool operator==(const Isoquant&) const = default;
};

/// Mean nDCG over topics of the sessions made of the first `queries`
/// formulations with `depth` documents each.
using GainFunction = std::function<double(std::size_t queries, std::size_t depth)>;

/// For q = 1..max_queries, the least depth d <= max_depth with gain(q, d) >=
/// gain_level, located by exponential then binary search.
Isoquant isoquant(const GainFunction& gain, double gain_level,
                  std::size_t max_queries, std::size_t max_depth);

/// Per-topic rankings of each formulation, retrieved once at a maximum depth
/// and pooled for any (queries, depth) prefix.
class SessionRankings {
 public:
  /// `sessions` maps topic ids to query sequences; topics without judgments
  /// still count towards the mean (with nDCG 0).
  SessionRankings(const std::map<std::string, std::vector<TermSequence>>& sessions,
                  const PostingsIndex& index, const RetrievalModel& model,
                  std::size_t max_depth);

  /// Mean over topics of nDCG (no cutoff) of the pooled sessions.
  double mean_ndcg(const Qrels& qrels, std::size_t queries, std::size_t depth) const;
  /// Longest session length over all topics.
  std::size_t max_queries() const;
  std::size_t max_depth() const { return max_depth_; }
  const std::map<std::string, std::vector<RankedList>>& rankings() const {
    return rankings_;
  }

 private:
  std::map<std::string, std::vector<RankedList>> rankings_;
  std::size_t max_depth_;
};

Isoquant isoquant(const SessionRankings& sessions, const Qrels& qrels,
                  double gain_level, std::size_t max_queries);

struct MsleResult {
  double value = 0.0;
  /// Query counts left out because either isoquant misses there.
  std::vector<std::size_t> excluded;
  std::size_t shared_points = 0;
};

/// Mean over shared points of (ln(1 + d_a) - ln(1 + d_b))^2. Throws DataError
/// when the query-count domains differ or no point is shared.
MsleResult msle(const Isoquant& a, const Isoquant& b);

/// Jaccard similarity of the unique normalized terms of two query lists,
/// after truncating the longer list to the length of the shorter.
double jaccard_terms(const std::vector<std::string>& queries_a,
                     const std::vector<std::string>& queries_b);

}  // namespace uqvsim
