#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace uqvsim {

/// A normalized token: lowercase, free of whitespace and punctuation, never a
/// stopword. Only `normalize` and `stem` create terms from raw text, so any
/// Term in circulation satisfies these properties.
using Term = std::string;

/// Terms in first-occurrence order of their source text. Duplicates allowed.
using TermSequence = std::vector<Term>;

class StopwordList {
 public:
  /// The frozen English list shipped in resources/stopwords_en.txt.
  static const StopwordList& english();

  /// Parses a plain-text list: one word per line, '#' starts a comment.
  static StopwordList parse(std::string_view text);
  static StopwordList load(const std::string& path);

  bool contains(std::string_view word) const {
    return words_.contains(std::string(word));
  }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Lowercases ASCII letters, splits on every byte that is neither an ASCII
/// letter, an ASCII digit nor part of a multi-byte UTF-8 sequence, and drops
/// stopwords. Single-character tokens are kept.
TermSequence normalize(std::string_view text,
                       const StopwordList& stopwords = StopwordList::english());

/// Removes repeated terms, keeping the first occurrence.
TermSequence unique_terms(const TermSequence& seq);

/// Porter stemmer, iterated to a fixed point so that stem(stem(t)) == stem(t).
Term stem(std::string_view term);

/// Stems every term of the sequence, keeping order and duplicates.
TermSequence stem_all(const TermSequence& seq);

/// Joins terms with single spaces.
std::string join_terms(const TermSequence& seq);

}  // namespace uqvsim
