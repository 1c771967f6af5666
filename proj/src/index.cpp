#include "uqvsim/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "uqvsim/error.hpp"

namespace uqvsim {

PostingsIndex PostingsIndex::build(std::span<const Document> docs) {
  PostingsIndex index;
  // Ordered map so that term ids come out in lexicographic order.
  std::map<std::string, std::vector<Posting>> postings;

  for (const auto& doc : docs) {
    const auto ordinal = static_cast<std::uint32_t>(index.doc_ids_.size());
    if (!index.doc_ordinal_.emplace(doc.id, ordinal).second)
      throw DataError("duplicate document id: " + doc.id);
    index.doc_ids_.push_back(doc.id);

    std::map<std::string, std::uint32_t> counts;
    std::uint32_t length = 0;
    for (const auto& token : normalize(doc.contents)) {
      ++counts[stem(token)];
      ++length;
    }
    index.doc_len_.push_back(length);
    for (auto& [term, tf] : counts) postings[term].push_back({ordinal, tf});
  }

  index.terms_.reserve(postings.size());
  index.postings_.reserve(postings.size());
  for (auto& [term, list] : postings) {
    index.terms_.push_back(term);
    index.postings_.push_back(std::move(list));
  }
  index.finalize();
  return index;
}

// Derives lookup tables, collection frequencies and the forward index from
// doc_ids_, doc_len_, terms_ and postings_.
void PostingsIndex::finalize() {
  doc_ordinal_.clear();
  for (std::uint32_t i = 0; i < doc_ids_.size(); ++i)
    doc_ordinal_.emplace(doc_ids_[i], i);
  term_ids_.clear();
  cf_.assign(terms_.size(), 0);
  forward_.assign(doc_ids_.size(), {});
  total_tokens_ = 0;
  for (std::uint32_t t = 0; t < terms_.size(); ++t) {
    term_ids_.emplace(terms_[t], t);
    for (const auto& p : postings_[t]) {
      cf_[t] += p.tf;
      forward_[p.doc].push_back({t, p.tf});
    }
    total_tokens_ += cf_[t];
  }
}

double PostingsIndex::avg_doc_len() const {
  if (num_docs() == 0) throw DataError("index contains no documents");
  return static_cast<double>(total_tokens_) / static_cast<double>(num_docs());
}

std::optional<std::uint32_t> PostingsIndex::ordinal(
    std::string_view doc_id) const {
  auto it = doc_ordinal_.find(std::string(doc_id));
  if (it == doc_ordinal_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> PostingsIndex::term_id(
    std::string_view stemmed) const {
  auto it = term_ids_.find(std::string(stemmed));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> PostingsIndex::postings(
    std::string_view stemmed) const {
  if (auto id = term_id(stemmed)) return postings_[*id];
  return {};
}

std::uint64_t PostingsIndex::cf(std::string_view stemmed) const {
  if (auto id = term_id(stemmed)) return cf_[*id];
  return 0;
}

std::uint32_t PostingsIndex::tf(std::string_view stemmed,
                                std::uint32_t ordinal) const {
  auto list = postings(stemmed);
  auto it = std::lower_bound(
      list.begin(), list.end(), ordinal,
      [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
  if (it == list.end() || it->doc != ordinal) return 0;
  return it->tf;
}

void PostingsIndex::validate() const {
  const auto n = num_docs();
  if (doc_len_.size() != n || forward_.size() != n)
    throw InvariantError("per-document tables disagree in size");
  if (!std::is_sorted(terms_.begin(), terms_.end()) ||
      std::adjacent_find(terms_.begin(), terms_.end()) != terms_.end())
    throw InvariantError("vocabulary is not strictly sorted");
  std::vector<std::uint64_t> lengths(n, 0);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& list = postings_[t];
    if (list.empty() || list.size() > n || cf_[t] < list.size())
      throw InvariantError("df/cf bounds violated for term " + terms_[t]);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].tf == 0 || list[i].doc >= n)
        throw InvariantError("bad posting for term " + terms_[t]);
      if (i > 0 && list[i - 1].doc >= list[i].doc)
        throw InvariantError("postings not strictly sorted for " + terms_[t]);
      lengths[list[i].doc] += list[i].tf;
    }
  }
  for (std::size_t d = 0; d < n; ++d) {
    if (lengths[d] != doc_len_[d])
      throw InvariantError("term frequencies do not sum to the length of " +
                           doc_ids_[d]);
  }
}

void Bm25Params::validate() const {
  if (!(k1 >= 0.0)) throw ConfigError("BM25 k1 must be >= 0");
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("BM25 b must be in [0, 1]");
}

void QldParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("QLD mu must be > 0");
}

namespace {

struct QueryTerm {
  std::uint32_t id;
  std::span<const Posting> postings;
};

// Stems the query and resolves each position against the vocabulary; query
// positions whose term is not indexed are dropped (they match no document and
// carry zero weight in both models).
std::vector<QueryTerm> resolve(const PostingsIndex& index,
                               const TermSequence& query) {
  std::vector<QueryTerm> resolved;
  for (const auto& term : query) {
    if (auto id = index.term_id(stem(term)))
      resolved.push_back({*id, index.postings(*id)});
  }
  return resolved;
}

std::vector<std::uint32_t> candidate_docs(const std::vector<QueryTerm>& terms) {
  std::vector<std::uint32_t> docs;
  for (const auto& term : terms)
    for (const auto& p : term.postings) docs.push_back(p.doc);
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
  return docs;
}

// tf of the term in each candidate doc, by merging two ordinal-sorted lists.
std::vector<std::uint32_t> tf_column(std::span<const Posting> postings,
                                     const std::vector<std::uint32_t>& docs) {
  std::vector<std::uint32_t> tfs(docs.size(), 0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < docs.size() && p < postings.size(); ++i) {
    while (p < postings.size() && postings[p].doc < docs[i]) ++p;
    if (p < postings.size() && postings[p].doc == docs[i])
      tfs[i] = postings[p].tf;
  }
  return tfs;
}

RankedList rank(const PostingsIndex& index, const std::vector<std::uint32_t>& docs,
                const std::vector<double>& scores, std::size_t cutoff,
                std::string topic_id) {
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.doc_id(docs[a]) < index.doc_id(docs[b]);
  };
  const std::size_t keep = std::min(cutoff, order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);

  RankedList list;
  list.topic_id = std::move(topic_id);
  list.cutoff = cutoff;
  list.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i)
    list.entries.push_back({index.doc_id(docs[order[i]]), scores[order[i]]});
  return list;
}

void require_documents(const PostingsIndex& index) {
  if (index.num_docs() == 0) throw DataError("cannot search an empty index");
}

}  // namespace

RankedList bm25_search(const PostingsIndex& index, const TermSequence& query,
                       const Bm25Params& params, std::size_t cutoff,
                       std::string topic_id) {
  require_documents(index);
  params.validate();
  if (query.empty()) {
    RankedList list{std::move(topic_id), {}, cutoff, true};
    return list;
  }
  const auto terms = resolve(index, query);
  const auto docs = candidate_docs(terms);
  const double n = static_cast<double>(index.num_docs());
  const double avgdl = index.avg_doc_len();

  std::vector<double> scores(docs.size(), 0.0);
  for (const auto& term : terms) {
    const double df = static_cast<double>(term.postings.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const auto tfs = tf_column(term.postings, docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (tfs[i] == 0) continue;
      const double tf = tfs[i];
      const double dl = index.doc_len(docs[i]);
      const double norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
      scores[i] += idf * tf / (tf + norm);
    }
  }
  return rank(index, docs, scores, cutoff, std::move(topic_id));
}

RankedList qld_search(const PostingsIndex& index, const TermSequence& query,
                      const QldParams& params, std::size_t cutoff,
                      std::string topic_id) {
  require_documents(index);
  params.validate();
  if (query.empty()) {
    RankedList list{std::move(topic_id), {}, cutoff, true};
    return list;
  }
  const auto terms = resolve(index, query);
  const auto docs = candidate_docs(terms);
  const double total = static_cast<double>(index.total_tokens());

  std::vector<double> scores(docs.size(), 0.0);
  for (const auto& term : terms) {
    const double background = static_cast<double>(index.cf(term.id)) / total;
    const double smoothing = params.mu * background;
    const auto tfs = tf_column(term.postings, docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const double dl = index.doc_len(docs[i]);
      scores[i] += std::log((tfs[i] + smoothing) / (dl + params.mu));
    }
  }
  return rank(index, docs, scores, cutoff, std::move(topic_id));
}

RankedList RetrievalModel::search(const PostingsIndex& index,
                                  const TermSequence& query, std::size_t cutoff,
                                  std::string topic_id) const {
  if (kind == Kind::kQld)
    return qld_search(index, query, qld, cutoff, std::move(topic_id));
  return bm25_search(index, query, bm25, cutoff, std::move(topic_id));
}

std::string RetrievalModel::name() const {
  char buf[96];
  if (kind == Kind::kQld) {
    std::snprintf(buf, sizeof buf, "qld(mu=%g)", qld.mu);
  } else {
    std::snprintf(buf, sizeof buf, "bm25(k1=%g,b=%g)", bm25.k1, bm25.b);
  }
  return buf;
}

void RetrievalModel::validate() const {
  if (kind == Kind::kQld) {
    qld.validate();
  } else {
    bm25.validate();
  }
}

}  // namespace uqvsim
