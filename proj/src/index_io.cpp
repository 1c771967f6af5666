#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "uqvsim/error.hpp"
#include "uqvsim/index.hpp"

namespace uqvsim {

std::vector<Document> read_corpus(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = source + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    if (!record.is_object()) throw DataError(where + ": expected an object");
    auto id = record.find("id");
    auto contents = record.find("contents");
    if (id == record.end() || !(id->is_string() || id->is_number_integer()))
      throw DataError(where + ": missing \"id\"");
    if (contents == record.end() || !contents->is_string())
      throw DataError(where + ": missing \"contents\"");
    docs.push_back({id->is_string() ? id->get<std::string>() : id->dump(),
                    contents->get<std::string>()});
  }
  return docs;
}

std::vector<Document> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path);
  return read_corpus(in, path);
}

namespace {

constexpr std::array<char, 8> kMagic = {'U', 'Q', 'V', 'S', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) {
    std::array<char, 4> bytes;
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(bytes.data(), bytes.size());
  }
  void u64(std::uint64_t v) {
    std::array<char, 8> bytes;
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(bytes.data(), bytes.size());
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw DataError("index file truncated");
  }
  std::uint32_t u32() {
    std::array<unsigned char, 4> b;
    bytes(reinterpret_cast<char*>(b.data()), b.size());
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    std::array<unsigned char, 8> b;
    bytes(reinterpret_cast<char*>(b.data()), b.size());
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::string str() {
    std::string s(u32(), '\0');
    if (!s.empty()) bytes(s.data(), s.size());
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace

void PostingsIndex::save(std::ostream& out) const {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u32(kFormatVersion);
  w.u64(doc_ids_.size());
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    w.str(doc_ids_[d]);
    w.u32(doc_len_[d]);
  }
  w.u64(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    w.str(terms_[t]);
    w.u32(static_cast<std::uint32_t>(postings_[t].size()));
    for (const auto& p : postings_[t]) {
      w.u32(p.doc);
      w.u32(p.tf);
    }
  }
  if (!out) throw DataError("failed writing index");
}

void PostingsIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create index file: " + path);
  save(out);
}

PostingsIndex PostingsIndex::load(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic;
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw DataError("not an index file (bad magic header)");
  if (auto version = r.u32(); version != kFormatVersion)
    throw DataError("unsupported index format version " +
                    std::to_string(version));

  PostingsIndex index;
  const auto n = r.u64();
  for (std::uint64_t d = 0; d < n; ++d) {
    index.doc_ids_.push_back(r.str());
    index.doc_len_.push_back(r.u32());
  }
  const auto vocabulary = r.u64();
  for (std::uint64_t t = 0; t < vocabulary; ++t) {
    index.terms_.push_back(r.str());
    const auto count = r.u32();
    if (count > n) throw DataError("corrupt index file: postings list too long");
    std::vector<Posting> list(count);
    for (auto& p : list) {
      p.doc = r.u32();
      p.tf = r.u32();
      if (p.doc >= n) throw DataError("corrupt index file: posting out of range");
    }
    index.postings_.push_back(std::move(list));
  }
  index.finalize();
  if (index.doc_ordinal_.size() != index.doc_ids_.size())
    throw DataError("index file contains duplicate document ids");
  try {
    index.validate();
  } catch (const InvariantError& e) {
    throw DataError(std::string("corrupt index file: ") + e.what());
  }
  return index;
}

PostingsIndex PostingsIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index file: " + path);
  return load(in);
}

std::string PostingsIndex::stats_json() const {
  nlohmann::ordered_json stats;
  stats["format_version"] = kFormatVersion;
  stats["documents"] = num_docs();
  stats["vocabulary"] = vocabulary_size();
  stats["total_tokens"] = total_tokens_;
  stats["avg_doc_len"] = num_docs() == 0 ? 0.0 : avg_doc_len();
  return stats.dump(2);
}

}  // namespace uqvsim
