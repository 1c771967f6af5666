#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uqvsim/collection.hpp"
#include "uqvsim/index.hpp"

namespace uqvsim {

/// Weight of the background model in the CQG mixture.
inline constexpr double kDefaultLambda = 0.4;

/// A normalized term -> probability table. Construction checks that every
/// probability is positive and that they sum to 1 within 1e-9.
class TermDistribution {
 public:
  using Table = std::unordered_map<std::string, double>;

  TermDistribution() = default;
  explicit TermDistribution(Table probs);

  /// 0 outside the support.
  double prob(std::string_view term) const;
  std::size_t support_size() const { return probs_.size(); }
  const Table& probs() const { return probs_; }

  /// Entries by probability descending, ties by term ascending.
  std::vector<std::pair<std::string, double>> sorted() const;

  /// `term,probability` lines in sorted() order, with a header row.
  void write_csv(std::ostream& out) const;

 private:
  Table probs_;
};

/// P(t) = cf(t) / total_tokens over the index vocabulary.
TermDistribution background_model(const PostingsIndex& index);

/// Maximum-likelihood model of the concatenated relevant documents of a
/// topic. Judged-relevant documents missing from the index are ignored; throws
/// DataError when none remain.
TermDistribution topic_model(const PostingsIndex& index, const Qrels& qrels,
                             const std::string& topic_id);

/// (1 - lambda) P_topic + lambda P_background, pointwise over the union of
/// both supports. Terms whose mixed probability is 0 are not in the support.
TermDistribution cqg_model(const TermDistribution& topic,
                           const TermDistribution& background, double lambda);

/// ln(N / df) with df floored at 0.5 for unseen terms.
double idf(const PostingsIndex& index, std::string_view stemmed_term);

enum class CandidateSource { kTopic, kRel, kTopicPlusRel };

std::string_view to_string(CandidateSource source);

struct CandidateTerm {
  std::string term;  // surface form used in query strings
  std::string key;   // stemmed form used for all membership tests
  double weight = 0.0;

  bool operator==(const CandidateTerm&) const = default;
};

struct CandidateList {
  std::vector<CandidateTerm> terms;
  CandidateSource source = CandidateSource::kTopic;
  std::size_t k = 0;  // only meaningful for kTopicPlusRel

  std::size_t size() const { return terms.size(); }
  TermSequence surface_terms() const;
};

/// Unique normalized terms of title, description and narrative, in
/// first-occurrence order. Weights descend from n to 1.
CandidateList candidates_topic(const Topic& topic);

/// The whole CQG support ordered by probability descending, ties broken
/// lexicographically. Terms are index stems; weights are probabilities.
CandidateList candidates_rel(const TermDistribution& cqg);
CandidateList candidates_rel(const PostingsIndex& index, const Qrels& qrels,
                             const std::string& topic_id,
                             double lambda = kDefaultLambda);

/// Topic terms that occur in `rel` together with the top-k `rel` terms that do
/// not occur in the topic text, ordered by CQG probability descending. Topic
/// terms keep their surface form; one entry per stem.
CandidateList candidates_topic_plus_rel(const Topic& topic,
                                        const CandidateList& rel, std::size_t k);

}  // namespace uqvsim
