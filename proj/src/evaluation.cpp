#include "uqvsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "uqvsim/error.hpp"
#include "uqvsim/simulator.hpp"

namespace uqvsim {

double average_precision(const RankedList& run, const Qrels& qrels,
                         const std::string& topic, bool* no_relevant) {
  const auto& judged = qrels.judgments(topic);
  const auto total_relevant = qrels.num_relevant(topic);
  if (no_relevant) *no_relevant = total_relevant == 0;
  if (total_relevant == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < run.entries.size(); ++i) {
    auto it = judged.find(run.entries[i].doc_id);
    if (it == judged.end() || it->second < kRelevanceThreshold) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total_relevant);
}

double ndcg(const RankedList& run, const Qrels& qrels, const std::string& topic,
            std::size_t cutoff, bool* no_relevant) {
  const auto& judged = qrels.judgments(topic);
  std::vector<int> ideal;
  for (const auto& [doc, grade] : judged)
    if (grade > 0) ideal.push_back(grade);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (cutoff > 0 && ideal.size() > cutoff) ideal.resize(cutoff);

  double ideal_dcg = 0.0;
  for (std::size_t i = 0; i < ideal.size(); ++i)
    ideal_dcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  if (no_relevant) *no_relevant = ideal_dcg == 0.0;
  if (ideal_dcg == 0.0) return 0.0;

  const auto n = cutoff > 0 ? std::min(cutoff, run.entries.size()) : run.entries.size();
  double dcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = judged.find(run.entries[i].doc_id);
    if (it == judged.end() || it->second <= 0) continue;
    dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal_dcg;
}

double precision_at(const RankedList& run, const Qrels& qrels,
                    const std::string& topic, std::size_t k) {
  if (k == 0) throw DataError("P@k requires k >= 1");
  const auto& judged = qrels.judgments(topic);
  const auto n = std::min(k, run.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = judged.find(run.entries[i].doc_id);
    if (it != judged.end() && it->second >= kRelevanceThreshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double evaluate(const MeasureId& measure, const RankedList& run,
                const Qrels& qrels, const std::string& topic) {
  switch (measure.kind) {
    case MeasureId::Kind::kAP:
      return average_precision(run, qrels, topic);
    case MeasureId::Kind::kNDCG:
      return ndcg(run, qrels, topic, measure.cutoff);
    case MeasureId::Kind::kPrecision:
      return precision_at(run, qrels, topic, measure.cutoff);
    case MeasureId::Kind::kSDCG:
      return sdcg({run}, qrels, topic, measure.b, measure.bq, run.entries.size());
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

std::map<std::string, double> arp(const EvalMatrix& matrix, ArpMode mode) {
  if (matrix.empty()) throw DataError("cannot average an empty evaluation matrix");
  std::map<std::string, double> means;
  const auto topics = matrix.topics();
  if (mode == ArpMode::kFirst) {
    for (const auto& topic : topics)
      if (!matrix.rows().contains({topic, 1}))
        throw DataError("topic " + topic + " has no score for its first query");
  }
  for (const auto& measure : matrix.measures()) {
    double sum = 0.0;
    std::size_t count = 0;
    if (mode == ArpMode::kAll || mode == ArpMode::kFirst) {
      for (const auto& [key, row] : matrix.rows()) {
        if (mode == ArpMode::kFirst && key.second != 1) continue;
        if (auto v = matrix.get(key.first, key.second, measure)) {
          sum += *v;
          ++count;
        }
      }
    } else {
      std::map<std::string, double> best;
      for (const auto& [key, row] : matrix.rows()) {
        auto v = matrix.get(key.first, key.second, measure);
        if (!v) continue;
        auto [it, inserted] = best.emplace(key.first, *v);
        if (!inserted) it->second = std::max(it->second, *v);
      }
      for (const auto& [topic, v] : best) {
        sum += v;
        ++count;
      }
    }
    if (count > 0) means[measure] = sum / static_cast<double>(count);
  }
  return means;
}

namespace {

void require_same_topics(const TopicScores& a, const TopicScores& b) {
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  for (const auto& [topic, _] : a)
    if (!b.contains(topic)) only_a.push_back(topic);
  for (const auto& [topic, _] : b)
    if (!a.contains(topic)) only_b.push_back(topic);
  if (only_a.empty() && only_b.empty()) return;
  std::string message = "topic sets differ;";
  auto list = [&](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    message += std::string(" only in ") + what + ":";
    for (const auto& id : ids) message += " " + id;
    message += ";";
  };
  list("first", only_a);
  list("second", only_b);
  throw DataError(message);
}

}  // namespace

double rmse(const TopicScores& simulated, const TopicScores& reference) {
  require_same_topics(simulated, reference);
  if (simulated.empty()) throw DataError("RMSE over an empty topic set");
  double sum = 0.0;
  for (const auto& [topic, value] : simulated) {
    const double diff = value - reference.at(topic);
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(simulated.size()));
}

double paired_ttest(const TopicScores& simulated, const TopicScores& reference) {
  require_same_topics(simulated, reference);
  const auto n = simulated.size();
  if (n < 2) throw DataError("paired t-test needs at least two topics");
  std::vector<double> diffs;
  diffs.reserve(n);
  for (const auto& [topic, value] : simulated) diffs.push_back(value - reference.at(topic));
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double variance = ss / static_cast<double>(n - 1);
  if (variance == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / std::sqrt(variance / static_cast<double>(n));
  return student_t_two_sided_p(t, static_cast<double>(n - 1));
}

double kendall_tau(const std::vector<std::string>& order_a,
                   const std::vector<std::string>& order_b) {
  const auto n = order_a.size();
  std::unordered_map<std::string, std::size_t> position_b;
  for (std::size_t i = 0; i < order_b.size(); ++i)
    if (!position_b.emplace(order_b[i], i).second)
      throw DataError("system " + order_b[i] + " ranked twice");
  std::unordered_set<std::string> seen_a;
  for (const auto& s : order_a) {
    if (!seen_a.insert(s).second) throw DataError("system " + s + " ranked twice");
    if (!position_b.contains(s))
      throw DataError("system " + s + " missing from the second ordering");
  }
  if (order_b.size() != n)
    throw DataError("system orderings cover different systems");
  if (n < 2) throw DataError("Kendall's tau needs at least two systems");

  long long concordant = 0;
  long long discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // a ranks order_a[i] above order_a[j]; does b agree?
      if (position_b[order_a[i]] < position_b[order_a[j]]) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

std::vector<std::string> system_ordering(const std::map<std::string, double>& scores) {
  if (scores.size() < 2) throw DataError("a system ordering needs at least two systems");
  std::vector<std::pair<std::string, double>> entries(scores.begin(), scores.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> order;
  for (auto& [label, _] : entries) order.push_back(label);
  return order;
}

// ---------------------------------------------------------------------------

double sdcg(const std::vector<RankedList>& session, const Qrels& qrels,
            const std::string& topic, double b, double bq, std::size_t depth) {
  if (!(b > 1.0) || !(bq > 1.0)) throw DataError("sDCG requires b > 1 and bq > 1");
  const auto& judged = qrels.judgments(topic);
  const double log_b = std::log(b);
  const double log_bq = std::log(bq);
  std::unordered_set<std::string> seen;
  double total = 0.0;
  for (std::size_t j = 0; j < session.size(); ++j) {
    const double query_discount = 1.0 / (1.0 + std::log(static_cast<double>(j + 1)) / log_bq);
    const auto& entries = session[j].entries;
    const auto n = std::min(depth, entries.size());
    double gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& doc = entries[i].doc_id;
      if (!seen.insert(doc).second) continue;
      auto it = judged.find(doc);
      if (it == judged.end() || it->second <= 0) continue;
      const double rank_discount =
          std::max(1.0, std::log(static_cast<double>(i + 1)) / log_b);
      gain += it->second / rank_discount;
    }
    total += query_discount * gain;
  }
  return total;
}

Isoquant isoquant(const GainFunction& gain, double gain_level,
                  std::size_t max_queries, std::size_t max_depth) {
  if (!(gain_level > 0.0 && gain_level < 1.0))
    throw DataError("isoquant gain level must lie in (0, 1)");
  if (max_depth == 0) throw DataError("isoquant needs max_depth >= 1");
  Isoquant iso;
  iso.gain_level = gain_level;
  for (std::size_t q = 1; q <= max_queries; ++q) {
    std::size_t failing = 0;  // largest depth known to miss the level
    std::size_t depth = 1;
    std::optional<std::size_t> reaching;
    while (true) {
      if (gain(q, depth) >= gain_level) {
        reaching = depth;
        break;
      }
      failing = depth;
      if (depth == max_depth) break;
      depth = std::min(depth * 2, max_depth);
    }
    if (reaching) {
      std::size_t hi = *reaching;
      std::size_t lo = failing;
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (gain(q, mid) >= gain_level) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      reaching = hi;
    }
    iso.depths.push_back(reaching);
  }
  return iso;
}

SessionRankings::SessionRankings(
    const std::map<std::string, std::vector<TermSequence>>& sessions,
    const PostingsIndex& index, const RetrievalModel& model, std::size_t max_depth)
    : max_depth_(max_depth) {
  if (max_depth == 0) throw DataError("max_depth must be >= 1");
  for (const auto& [topic, queries] : sessions) {
    auto& lists = rankings_[topic];
    for (const auto& q : queries) lists.push_back(model.search(index, q, max_depth, topic));
  }
}

double SessionRankings::mean_ndcg(const Qrels& qrels, std::size_t queries,
                                  std::size_t depth) const {
  if (rankings_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [topic, lists] : rankings_) {
    const auto n = std::min(queries, lists.size());
    const std::vector<RankedList> prefix(lists.begin(), lists.begin() + n);
    sum += ndcg(pool_rankings(prefix, depth, topic), qrels, topic);
  }
  return sum / static_cast<double>(rankings_.size());
}

std::size_t SessionRankings::max_queries() const {
  std::size_t longest = 0;
  for (const auto& [topic, lists] : rankings_) longest = std::max(longest, lists.size());
  return longest;
}

Isoquant isoquant(const SessionRankings& sessions, const Qrels& qrels,
                  double gain_level, std::size_t max_queries) {
  return isoquant(
      [&](std::size_t q, std::size_t d) { return sessions.mean_ndcg(qrels, q, d); },
      gain_level, max_queries, sessions.max_depth());
}

MsleResult msle(const Isoquant& a, const Isoquant& b) {
  if (a.depths.size() != b.depths.size())
    throw DataError("isoquants cover different query-count ranges");
  MsleResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.depths.size(); ++i) {
    if (!a.depths[i] || !b.depths[i]) {
      result.excluded.push_back(i + 1);
      continue;
    }
    const double diff = std::log1p(static_cast<double>(*a.depths[i])) -
                        std::log1p(static_cast<double>(*b.depths[i]));
    sum += diff * diff;
    ++result.shared_points;
  }
  if (result.shared_points == 0)
    throw DataError("isoquants share no reachable points");
  result.value = sum / static_cast<double>(result.shared_points);
  return result;
}

double jaccard_terms(const std::vector<std::string>& queries_a,
                     const std::vector<std::string>& queries_b) {
  if (queries_a.empty() || queries_b.empty())
    throw DataError("Jaccard similarity needs non-empty query lists");
  const auto n = std::min(queries_a.size(), queries_b.size());
  auto terms_of = [n](const std::vector<std::string>& queries) {
    std::set<std::string> terms;
    for (std::size_t i = 0; i < n; ++i)
      for (auto& t : normalize(queries[i])) terms.insert(std::move(t));
    return terms;
  };
  const auto a = terms_of(queries_a);
  const auto b = terms_of(queries_b);
  if (a.empty() && b.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& t : a) shared += b.contains(t) ? 1 : 0;
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

}  // namespace uqvsim
