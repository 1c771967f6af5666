#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uqvsim/text.hpp"

namespace uqvsim {

struct Document {
  std::string id;
  std::string contents;
};

/// Reads a JSON-lines corpus: one object per line with string fields "id" and
/// "contents". Blank lines are skipped.
std::vector<Document> read_corpus(std::istream& in,
                                  const std::string& source = "<corpus>");
std::vector<Document> read_corpus(const std::string& path);

struct Posting {
  std::uint32_t doc;  // ordinal into PostingsIndex::doc_ids()
  std::uint32_t tf;
};

/// Immutable inverted index over stemmed terms.
///
/// Document ordinals follow input order. Postings lists are sorted by ordinal
/// and the vocabulary is kept in lexicographic order so that iteration over
/// terms is deterministic.
class PostingsIndex {
 public:
  PostingsIndex() = default;

  /// Normalizes and stems every document. Throws DataError naming the first
  /// repeated doc id.
  static PostingsIndex build(std::span<const Document> docs);

  std::size_t num_docs() const { return doc_ids_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }
  std::uint64_t total_tokens() const { return total_tokens_; }
  /// total_tokens / N; throws DataError on an empty index.
  double avg_doc_len() const;

  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::string& doc_id(std::uint32_t ordinal) const {
    return doc_ids_[ordinal];
  }
  std::uint32_t doc_len(std::uint32_t ordinal) const {
    return doc_len_[ordinal];
  }
  std::optional<std::uint32_t> ordinal(std::string_view doc_id) const;

  /// Sorted stemmed vocabulary.
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<std::uint32_t> term_id(std::string_view stemmed) const;

  /// Empty span for terms outside the vocabulary.
  std::span<const Posting> postings(std::string_view stemmed) const;
  std::span<const Posting> postings(std::uint32_t term_id) const {
    return postings_[term_id];
  }
  std::uint32_t df(std::string_view stemmed) const {
    return static_cast<std::uint32_t>(postings(stemmed).size());
  }
  std::uint64_t cf(std::string_view stemmed) const;
  std::uint64_t cf(std::uint32_t term_id) const { return cf_[term_id]; }
  std::uint32_t tf(std::string_view stemmed, std::uint32_t ordinal) const;

  /// (term id, tf) pairs of one document, sorted by term id.
  std::span<const Posting> doc_terms(std::uint32_t ordinal) const {
    return forward_[ordinal];
  }

  /// Checks every structural invariant; throws InvariantError on violation.
  void validate() const;

  /// Binary container: magic "UQVSIDX\0", u32 format version, then
  /// little-endian length-prefixed documents and postings.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static PostingsIndex load(std::istream& in);
  static PostingsIndex load(const std::string& path);

  /// Human-readable statistics as a JSON object.
  std::string stats_json() const;

 private:
  void finalize();

  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::uint32_t> doc_ordinal_;
  std::vector<std::uint32_t> doc_len_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::uint64_t> cf_;
  std::vector<std::vector<Posting>> forward_;  // Posting::doc holds a term id
  std::uint64_t total_tokens_ = 0;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// A ranking for one topic. Entries produced by a single search are ordered by
/// score descending with ties broken by ascending doc id. Pooled session lists
/// keep (query, rank) order instead; see run_session.
struct RankedList {
  std::string topic_id;
  std::vector<ScoredDoc> entries;
  std::size_t cutoff = 0;
  /// Set when the query had no terms left after normalization.
  bool empty_query = false;

  bool operator==(const RankedList&) const = default;
};

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;

  void validate() const;
};

struct QldParams {
  double mu = 1000.0;

  void validate() const;
};

/// Lucene-style BM25:
///   sum over query positions of ln(1 + (N - df + .5)/(df + .5)) *
///   tf / (tf + k1 (1 - b + b dl/avgdl)).
/// The query holds normalized, unstemmed terms; stemming happens here.
RankedList bm25_search(const PostingsIndex& index, const TermSequence& query,
                       const Bm25Params& params, std::size_t cutoff,
                       std::string topic_id = {});

/// Query likelihood with Dirichlet smoothing:
///   sum over query positions of ln((tf + mu P_bg(t)) / (dl + mu)).
/// Terms with zero collection frequency are skipped.
RankedList qld_search(const PostingsIndex& index, const TermSequence& query,
                      const QldParams& params, std::size_t cutoff,
                      std::string topic_id = {});

/// One of the two retrieval models with its parameters.
struct RetrievalModel {
  enum class Kind { kBm25, kQld };

  Kind kind = Kind::kBm25;
  Bm25Params bm25;
  QldParams qld;

  static RetrievalModel bm25_default() { return {}; }
  static RetrievalModel qld_with(double mu) {
    RetrievalModel m;
    m.kind = Kind::kQld;
    m.qld.mu = mu;
    return m;
  }

  RankedList search(const PostingsIndex& index, const TermSequence& query,
                    std::size_t cutoff, std::string topic_id = {}) const;
  /// e.g. "bm25(k1=0.9,b=0.4)" or "qld(mu=1000)".
  std::string name() const;
  void validate() const;
};

}  // namespace uqvsim
