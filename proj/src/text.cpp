#include "uqvsim/text.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "uqvsim/error.hpp"

namespace uqvsim {

namespace detail {
extern const char* const kEnglishStopwords;
}

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

char ascii_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace

const StopwordList& StopwordList::english() {
  static const StopwordList list = parse(detail::kEnglishStopwords);
  return list;
}

StopwordList StopwordList::parse(std::string_view text) {
  StopwordList list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::string word;
    for (unsigned char c : line) {
      if (c == ' ' || c == '\t' || c == '\r') continue;
      word.push_back(ascii_lower(c));
    }
    if (!word.empty()) list.words_.insert(std::move(word));
    pos = eol + 1;
  }
  return list;
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword list: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

TermSequence normalize(std::string_view text, const StopwordList& stopwords) {
  TermSequence terms;
  std::string token;
  auto flush = [&] {
    if (!token.empty() && !stopwords.contains(token))
      terms.push_back(token);
    token.clear();
  };
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      token.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

TermSequence unique_terms(const TermSequence& seq) {
  TermSequence out;
  std::unordered_set<std::string_view> seen;
  for (const auto& term : seq) {
    if (seen.insert(term).second) out.push_back(term);
  }
  return out;
}

TermSequence stem_all(const TermSequence& seq) {
  TermSequence out;
  out.reserve(seq.size());
  for (const auto& term : seq) out.push_back(stem(term));
  return out;
}

std::string join_terms(const TermSequence& seq) {
  std::string out;
  for (const auto& term : seq) {
    if (!out.empty()) out.push_back(' ');
    out += term;
  }
  return out;
}

}  // namespace uqvsim
