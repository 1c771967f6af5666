#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uqvsim/collection.hpp"
#include "uqvsim/index.hpp"

namespace uqvsim::synthetic {

/// Shape of a generated test collection. Every topic owns a small
/// discriminative vocabulary that its relevant documents use heavily; the
/// topic text mixes a few of those terms with "theme" terms shared with
/// distractor documents.
struct Options {
  std::size_t num_docs = 500;
  std::size_t num_topics = 20;
  std::size_t relevant_per_topic = 12;
  std::size_t distractors_per_topic = 6;
  std::size_t discriminative_terms = 10;
  std::size_t background_terms = 400;
  std::size_t min_doc_length = 80;
  std::size_t max_doc_length = 160;
  std::size_t uqv_queries = 10;
  std::uint64_t seed = 20220401;
};

struct Collection {
  std::vector<Document> docs;
  std::vector<Topic> topics;
  Qrels qrels;
  /// Two synthetic users: UQV_1 (uqv_queries per topic) and UQV_2 (fewer).
  QueryVariantSet uqv;
};

Collection generate(const Options& options = {});

/// Writes corpus.jsonl, topics.jsonl, qrels.txt and uqv.tsv into `dir`.
void write(const Collection& collection, const std::string& dir);

}  // namespace uqvsim::synthetic
