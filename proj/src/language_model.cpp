#include "uqvsim/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "uqvsim/error.hpp"

namespace uqvsim {
namespace {

constexpr double kNormalizationTolerance = 1e-9;

// Neumaier summation; vocabularies run into the millions of terms.
double accurate_sum(const TermDistribution::Table& probs) {
  double sum = 0.0;
  double compensation = 0.0;
  for (const auto& [term, p] : probs) {
    const double t = sum + p;
    if (std::abs(sum) >= std::abs(p)) {
      compensation += (sum - t) + p;
    } else {
      compensation += (p - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

bool by_weight_then_term(const CandidateTerm& a, const CandidateTerm& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.term < b.term;
}

}  // namespace

TermDistribution::TermDistribution(Table probs) : probs_(std::move(probs)) {
  for (const auto& [term, p] : probs_) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw InvariantError("non-positive probability for term " + term);
  }
  if (!probs_.empty()) {
    const double sum = accurate_sum(probs_);
    if (std::abs(sum - 1.0) > kNormalizationTolerance)
      throw InvariantError("term distribution sums to " + std::to_string(sum));
  }
}

double TermDistribution::prob(std::string_view term) const {
  auto it = probs_.find(std::string(term));
  return it == probs_.end() ? 0.0 : it->second;
}

std::vector<std::pair<std::string, double>> TermDistribution::sorted() const {
  std::vector<std::pair<std::string, double>> entries(probs_.begin(), probs_.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return entries;
}

void TermDistribution::write_csv(std::ostream& out) const {
  out << "term,probability\n";
  char buf[40];
  for (const auto& [term, p] : sorted()) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << term << ',' << buf << '\n';
  }
}

TermDistribution background_model(const PostingsIndex& index) {
  if (index.total_tokens() == 0)
    throw DataError("background model needs a non-empty index");
  const double total = static_cast<double>(index.total_tokens());
  TermDistribution::Table probs;
  probs.reserve(index.vocabulary_size());
  for (std::uint32_t t = 0; t < index.vocabulary_size(); ++t)
    probs.emplace(index.terms()[t], static_cast<double>(index.cf(t)) / total);
  return TermDistribution(std::move(probs));
}

TermDistribution topic_model(const PostingsIndex& index, const Qrels& qrels,
                             const std::string& topic_id) {
  std::unordered_map<std::uint32_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& doc : qrels.relevant(topic_id)) {
    auto ordinal = index.ordinal(doc);
    if (!ordinal) continue;
    for (const auto& entry : index.doc_terms(*ordinal)) {
      counts[entry.doc] += entry.tf;
      total += entry.tf;
    }
  }
  if (total == 0)
    throw DataError("topic " + topic_id +
                    " has no judged-relevant documents with indexed text");
  TermDistribution::Table probs;
  probs.reserve(counts.size());
  for (const auto& [term, count] : counts)
    probs.emplace(index.terms()[term],
                  static_cast<double>(count) / static_cast<double>(total));
  return TermDistribution(std::move(probs));
}

TermDistribution cqg_model(const TermDistribution& topic,
                           const TermDistribution& background, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DataError("CQG mixture weight lambda must lie in [0, 1]");
  TermDistribution::Table mixed;
  mixed.reserve(background.support_size() + topic.support_size());
  auto add = [&](const std::string& term) {
    if (mixed.contains(term)) return;
    const double p = (1.0 - lambda) * topic.prob(term) + lambda * background.prob(term);
    if (p > 0.0) mixed.emplace(term, p);
  };
  for (const auto& [term, _] : topic.probs()) add(term);
  for (const auto& [term, _] : background.probs()) add(term);
  return TermDistribution(std::move(mixed));
}

double idf(const PostingsIndex& index, std::string_view stemmed_term) {
  if (index.num_docs() == 0) throw DataError("idf is undefined for an empty index");
  const double df = index.df(stemmed_term);
  return std::log(static_cast<double>(index.num_docs()) / (df > 0 ? df : 0.5));
}

std::string_view to_string(CandidateSource source) {
  switch (source) {
    case CandidateSource::kTopic:
      return "topic";
    case CandidateSource::kRel:
      return "rel";
    case CandidateSource::kTopicPlusRel:
      return "topic_plus_rel";
  }
  return "?";
}

TermSequence CandidateList::surface_terms() const {
  TermSequence out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.term);
  return out;
}

CandidateList candidates_topic(const Topic& topic) {
  const auto text = topic.title + "\n" + topic.description + "\n" + topic.narrative;
  const auto terms = unique_terms(normalize(text));
  if (terms.empty())
    throw DataError("topic " + topic.id + " has no terms after stopword removal");
  CandidateList list;
  list.source = CandidateSource::kTopic;
  const double n = static_cast<double>(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    list.terms.push_back({terms[i], stem(terms[i]), n - static_cast<double>(i)});
  return list;
}

CandidateList candidates_rel(const TermDistribution& cqg) {
  CandidateList list;
  list.source = CandidateSource::kRel;
  for (auto& [term, p] : cqg.sorted()) list.terms.push_back({term, term, p});
  return list;
}

CandidateList candidates_rel(const PostingsIndex& index, const Qrels& qrels,
                             const std::string& topic_id, double lambda) {
  return candidates_rel(
      cqg_model(topic_model(index, qrels, topic_id), background_model(index), lambda));
}

CandidateList candidates_topic_plus_rel(const Topic& topic,
                                        const CandidateList& rel, std::size_t k) {
  std::unordered_map<std::string, double> rel_weight;
  for (const auto& t : rel.terms) rel_weight.emplace(t.key, t.weight);

  CandidateList list;
  list.source = CandidateSource::kTopicPlusRel;
  list.k = k;
  std::unordered_set<std::string> topic_keys;
  for (const auto& t : candidates_topic(topic).terms) {
    if (!topic_keys.insert(t.key).second) continue;
    if (auto it = rel_weight.find(t.key); it != rel_weight.end())
      list.terms.push_back({t.term, t.key, it->second});
  }
  std::size_t added = 0;
  for (const auto& t : rel.terms) {
    if (added == k) break;
    if (topic_keys.contains(t.key)) continue;
    list.terms.push_back(t);
    ++added;
  }
  std::stable_sort(list.terms.begin(), list.terms.end(), by_weight_then_term);
  return list;
}

}  // namespace uqvsim
