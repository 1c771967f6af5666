#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uqvsim/index.hpp"
#include "uqvsim/measure.hpp"

namespace uqvsim {

/// Non-fatal diagnostics collected by parsers.
using Warnings = std::vector<std::string>;

struct Topic {
  std::string id;
  std::string title;
  std::string description;
  std::string narrative;

  bool operator==(const Topic&) const = default;
};

/// JSON-lines topics with fields "id", "title" and optional "description" and
/// "narrative". Fields are whitespace-trimmed; ids must be unique.
std::vector<Topic> parse_topics(std::istream& in,
                                const std::string& source = "<topics>");
std::vector<Topic> parse_topics(const std::string& path);
void write_topics(std::ostream& out, const std::vector<Topic>& topics);

inline constexpr int kRelevanceThreshold = 1;

/// Graded relevance judgments. Documents with grade >= kRelevanceThreshold
/// form a topic's relevant set.
class Qrels {
 public:
  using Judgments = std::map<std::string, int>;  // doc id -> grade

  void set(const std::string& topic, const std::string& doc, int grade);
  std::optional<int> grade(const std::string& topic,
                           const std::string& doc) const;
  /// Unjudged documents count as grade 0.
  int gain(const std::string& topic, const std::string& doc) const {
    return grade(topic, doc).value_or(0);
  }
  bool has_topic(const std::string& topic) const {
    return judgments_.contains(topic);
  }
  /// Empty map for unjudged topics.
  const Judgments& judgments(const std::string& topic) const;
  /// Relevant doc ids of a topic in ascending order.
  std::vector<std::string> relevant(const std::string& topic) const;
  std::size_t num_relevant(const std::string& topic) const;
  std::vector<std::string> topics() const;

  const std::map<std::string, Judgments>& all() const { return judgments_; }
  bool operator==(const Qrels&) const = default;

 private:
  std::map<std::string, Judgments> judgments_;
};

/// Four-column qrels, `topic iteration docid grade`, whitespace separated.
/// Repeated (topic, doc) pairs keep the last grade and add a warning.
Qrels parse_qrels(std::istream& in, const std::string& source = "<qrels>",
                  Warnings* warnings = nullptr);
Qrels parse_qrels(const std::string& path, Warnings* warnings = nullptr);
void write_qrels(std::ostream& out, const Qrels& qrels);

/// Query formulations grouped by (topic, source). Sources are real users
/// (e.g. UQV_5) or simulator labels; lists hold q_1, q_2, ... in order.
class QueryVariantSet {
 public:
  using Key = std::pair<std::string, std::string>;  // (topic, source)

  /// Throws DataError for an empty list or an empty query string.
  void set(const std::string& topic, const std::string& source,
           std::vector<std::string> queries);
  /// nullptr when the (topic, source) pair is absent.
  const std::vector<std::string>* queries(const std::string& topic,
                                          const std::string& source) const;
  std::vector<std::string> sources() const;
  std::vector<std::string> topics(const std::string& source) const;
  /// Adds every group of `other`, replacing groups with the same key.
  void merge(const QueryVariantSet& other);

  const std::map<Key, std::vector<std::string>>& groups() const {
    return groups_;
  }
  bool empty() const { return groups_.empty(); }
  bool operator==(const QueryVariantSet&) const = default;

 private:
  std::map<Key, std::vector<std::string>> groups_;
};

/// Tab-separated `topic<TAB>source<TAB>seq<TAB>query`, seq starting at 1 and
/// contiguous within each (topic, source) group; input order is free.
QueryVariantSet parse_uqv(std::istream& in, const std::string& source = "<uqv>");
QueryVariantSet parse_uqv(const std::string& path);
void write_uqv(std::ostream& out, const QueryVariantSet& set);

/// Scores indexed by (topic, query index, measure). Missing entries are
/// simply absent; a NaN value is treated as missing on write.
class EvalMatrix {
 public:
  using RowKey = std::pair<std::string, std::size_t>;  // (topic, query index)
  using Row = std::map<std::string, double>;           // measure -> value

  std::string source;
  std::string model;
  std::size_t cutoff = 0;
  /// Topics scored without any judgments; their scores are 0 by convention.
  std::vector<std::string> unjudged;

  void set(const std::string& topic, std::size_t query_index,
           const MeasureId& measure, double value);
  std::optional<double> get(const std::string& topic, std::size_t query_index,
                            const std::string& measure) const;
  /// Registers a column without adding values.
  void add_measure(const MeasureId& measure);
  /// Creates an (initially empty) row.
  void add_row(const std::string& topic, std::size_t query_index) {
    rows_[{topic, query_index}];
  }

  /// Measure names in column order (first insertion order).
  const std::vector<std::string>& measures() const { return measures_; }
  const std::map<RowKey, Row>& rows() const { return rows_; }
  std::vector<std::string> topics() const;
  bool empty() const { return rows_.empty(); }

  /// Every topic must occur in `known_topics` and every value must fall in
  /// its measure's range. Throws DataError otherwise.
  void validate(const std::vector<std::string>& known_topics) const;

  bool operator==(const EvalMatrix&) const = default;

 private:
  std::vector<std::string> measures_;
  std::map<RowKey, Row> rows_;
};

/// CSV with optional leading `# key=value` metadata lines (source, model,
/// cutoff, unjudged as a comma-separated list), a mandatory header `topic,query,<measure>...`, and values printed
/// with 10 significant digits. Missing values are empty cells.
void write_eval_matrix(std::ostream& out, const EvalMatrix& matrix);
EvalMatrix read_eval_matrix(std::istream& in, const std::string& source = "<csv>");
EvalMatrix read_eval_matrix(const std::string& path);

/// Writes `topic iteration docid rank score tag` lines, rank from 1 in list
/// order, score with 6 decimals.
void write_run(std::ostream& out, const RankedList& list, const std::string& tag,
               const std::string& iteration = "Q0");

/// One ranking read back from a run file.
struct RunEntry {
  std::string topic;
  std::string iteration;
  RankedList list;
};

/// Groups lines by (topic, iteration) and orders each group by the rank
/// column. Groups appear in first-seen order.
std::vector<RunEntry> read_run(std::istream& in, const std::string& source = "<run>");
std::vector<RunEntry> read_run(const std::string& path);

}  // namespace uqvsim
