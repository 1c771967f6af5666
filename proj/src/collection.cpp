#include "uqvsim/collection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uqvsim/error.hpp"

namespace uqvsim {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    auto end = line.find_first_of(" \t\r", pos);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
  return in;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

std::string json_string_field(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (it->is_string()) return trim(it->get<std::string>());
  if (it->is_number_integer()) return it->dump();
  throw DataError(std::string("field \"") + key + "\" must be a string");
}

}  // namespace

// ---------------------------------------------------------------------------
// Topics

std::vector<Topic> parse_topics(std::istream& in, const std::string& source) {
  std::vector<Topic> topics;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto at = where(source, line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(at + ": invalid JSON: " + e.what());
    }
    if (!record.is_object()) throw DataError(at + ": expected a JSON object");
    Topic topic;
    try {
      topic.id = json_string_field(record, "id");
      topic.title = json_string_field(record, "title");
      topic.description = json_string_field(record, "description");
      topic.narrative = json_string_field(record, "narrative");
    } catch (const DataError& e) {
      throw DataError(at + ": " + e.what());
    }
    if (topic.id.empty()) throw DataError(at + ": topic record without \"id\"");
    if (topic.title.empty())
      throw DataError(at + ": topic " + topic.id + " has no \"title\"");
    if (!ids.insert(topic.id).second)
      throw DataError(at + ": duplicate topic id " + topic.id);
    topics.push_back(std::move(topic));
  }
  return topics;
}

std::vector<Topic> parse_topics(const std::string& path) {
  auto in = open_input(path, "topics");
  return parse_topics(in, path);
}

void write_topics(std::ostream& out, const std::vector<Topic>& topics) {
  for (const auto& t : topics) {
    nlohmann::ordered_json record;
    record["id"] = t.id;
    record["title"] = t.title;
    record["description"] = t.description;
    record["narrative"] = t.narrative;
    out << record.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Qrels

void Qrels::set(const std::string& topic, const std::string& doc, int grade) {
  if (grade < 0) throw DataError("negative relevance grade for " + doc);
  judgments_[topic][doc] = grade;
}

std::optional<int> Qrels::grade(const std::string& topic,
                                const std::string& doc) const {
  auto t = judgments_.find(topic);
  if (t == judgments_.end()) return std::nullopt;
  auto d = t->second.find(doc);
  if (d == t->second.end()) return std::nullopt;
  return d->second;
}

const Qrels::Judgments& Qrels::judgments(const std::string& topic) const {
  static const Judgments kEmpty;
  auto it = judgments_.find(topic);
  return it == judgments_.end() ? kEmpty : it->second;
}

std::vector<std::string> Qrels::relevant(const std::string& topic) const {
  std::vector<std::string> docs;
  for (const auto& [doc, grade] : judgments(topic))
    if (grade >= kRelevanceThreshold) docs.push_back(doc);
  return docs;
}

std::size_t Qrels::num_relevant(const std::string& topic) const {
  std::size_t n = 0;
  for (const auto& [doc, grade] : judgments(topic))
    if (grade >= kRelevanceThreshold) ++n;
  return n;
}

std::vector<std::string> Qrels::topics() const {
  std::vector<std::string> ids;
  for (const auto& [topic, _] : judgments_) ids.push_back(topic);
  return ids;
}

Qrels parse_qrels(std::istream& in, const std::string& source,
                  Warnings* warnings) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const auto at = where(source, line_no);
    if (fields.size() != 4)
      throw DataError(at + ": expected 4 columns, found " +
                      std::to_string(fields.size()));
    int grade = 0;
    if (!parse_int(fields[3], grade))
      throw DataError(at + ": grade is not an integer: " + std::string(fields[3]));
    if (grade < 0) throw DataError(at + ": negative grade");
    const std::string topic(fields[0]);
    const std::string doc(fields[2]);
    if (auto previous = qrels.grade(topic, doc); previous && warnings) {
      warnings->push_back(at + ": duplicate judgment for (" + topic + ", " +
                          doc + "), grade " + std::to_string(*previous) +
                          " replaced by " + std::to_string(grade));
    }
    qrels.set(topic, doc, grade);
  }
  return qrels;
}

Qrels parse_qrels(const std::string& path, Warnings* warnings) {
  auto in = open_input(path, "qrels");
  return parse_qrels(in, path, warnings);
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [topic, docs] : qrels.all())
    for (const auto& [doc, grade] : docs)
      out << topic << " 0 " << doc << ' ' << grade << '\n';
}

// ---------------------------------------------------------------------------
// Query variants

void QueryVariantSet::set(const std::string& topic, const std::string& source,
                          std::vector<std::string> queries) {
  if (queries.empty())
    throw DataError("empty query list for topic " + topic + ", source " + source);
  for (const auto& q : queries)
    if (trim(q).empty())
      throw DataError("empty query string for topic " + topic + ", source " +
                      source);
  groups_[{topic, source}] = std::move(queries);
}

const std::vector<std::string>* QueryVariantSet::queries(
    const std::string& topic, const std::string& source) const {
  auto it = groups_.find({topic, source});
  return it == groups_.end() ? nullptr : &it->second;
}

std::vector<std::string> QueryVariantSet::sources() const {
  std::set<std::string> names;
  for (const auto& [key, _] : groups_) names.insert(key.second);
  return {names.begin(), names.end()};
}

std::vector<std::string> QueryVariantSet::topics(const std::string& source) const {
  std::vector<std::string> ids;
  for (const auto& [key, _] : groups_)
    if (key.second == source) ids.push_back(key.first);
  return ids;
}

void QueryVariantSet::merge(const QueryVariantSet& other) {
  for (const auto& [key, queries] : other.groups_) groups_[key] = queries;
}

QueryVariantSet parse_uqv(std::istream& in, const std::string& source) {
  std::map<QueryVariantSet::Key, std::map<std::size_t, std::string>> staged;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto at = where(source, line_no);
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (int i = 0; i < 3; ++i) {
      auto tab = rest.find('\t');
      if (tab == std::string_view::npos)
        throw DataError(at + ": expected 4 tab-separated columns");
      fields.push_back(rest.substr(0, tab));
      rest = rest.substr(tab + 1);
    }
    fields.push_back(rest);
    const auto topic = trim(fields[0]);
    const auto user = trim(fields[1]);
    if (topic.empty() || user.empty())
      throw DataError(at + ": empty topic or source column");
    std::size_t seq = 0;
    if (!parse_int(trim(fields[2]), seq) || seq == 0)
      throw DataError(at + ": sequence number must be a positive integer");
    auto query = trim(fields[3]);
    if (query.empty()) throw DataError(at + ": empty query string");
    auto& group = staged[{topic, user}];
    if (!group.emplace(seq, std::move(query)).second)
      throw DataError(at + ": repeated sequence number " + std::to_string(seq) +
                      " for topic " + topic + ", source " + user);
  }

  QueryVariantSet set;
  for (auto& [key, by_seq] : staged) {
    std::vector<std::string> queries;
    std::size_t expected = 1;
    for (auto& [seq, query] : by_seq) {
      if (seq != expected)
        throw DataError(source + ": non-contiguous sequence numbers for topic " +
                        key.first + ", source " + key.second + " (missing " +
                        std::to_string(expected) + ")");
      queries.push_back(std::move(query));
      ++expected;
    }
    set.set(key.first, key.second, std::move(queries));
  }
  return set;
}

QueryVariantSet parse_uqv(const std::string& path) {
  auto in = open_input(path, "query variants");
  return parse_uqv(in, path);
}

void write_uqv(std::ostream& out, const QueryVariantSet& set) {
  for (const auto& [key, queries] : set.groups()) {
    for (std::size_t i = 0; i < queries.size(); ++i)
      out << key.first << '\t' << key.second << '\t' << (i + 1) << '\t'
          << queries[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Evaluation matrices

void EvalMatrix::add_measure(const MeasureId& measure) {
  const auto name = measure.name();
  if (std::find(measures_.begin(), measures_.end(), name) == measures_.end())
    measures_.push_back(name);
}

void EvalMatrix::set(const std::string& topic, std::size_t query_index,
                     const MeasureId& measure, double value) {
  add_measure(measure);
  rows_[{topic, query_index}][measure.name()] = value;
}

std::optional<double> EvalMatrix::get(const std::string& topic,
                                      std::size_t query_index,
                                      const std::string& measure) const {
  auto row = rows_.find({topic, query_index});
  if (row == rows_.end()) return std::nullopt;
  auto cell = row->second.find(measure);
  if (cell == row->second.end() || std::isnan(cell->second)) return std::nullopt;
  return cell->second;
}

std::vector<std::string> EvalMatrix::topics() const {
  std::vector<std::string> ids;
  for (const auto& [key, _] : rows_)
    if (ids.empty() || ids.back() != key.first) ids.push_back(key.first);
  return ids;
}

void EvalMatrix::validate(const std::vector<std::string>& known_topics) const {
  const std::set<std::string> known(known_topics.begin(), known_topics.end());
  for (const auto& [key, row] : rows_) {
    if (!known.contains(key.first))
      throw DataError("evaluation matrix references unknown topic " + key.first);
    for (const auto& [name, value] : row) {
      if (std::isnan(value)) continue;
      const auto measure = MeasureId::parse(name);
      if (value < measure.min_value() || value > measure.max_value())
        throw DataError("value " + std::to_string(value) + " of " + name +
                        " out of range for topic " + key.first);
    }
  }
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cells;
}

}  // namespace

void write_eval_matrix(std::ostream& out, const EvalMatrix& matrix) {
  for (const auto& field : {matrix.source, matrix.model}) {
    if (field.find_first_of("\n\r") != std::string::npos)
      throw DataError("metadata must not contain line breaks");
  }
  out << "# source=" << matrix.source << '\n';
  out << "# model=" << matrix.model << '\n';
  out << "# cutoff=" << matrix.cutoff << '\n';
  if (!matrix.unjudged.empty()) {
    out << "# unjudged=";
    for (std::size_t i = 0; i < matrix.unjudged.size(); ++i)
      out << (i ? "," : "") << matrix.unjudged[i];
    out << '\n';
  }
  out << "topic,query";
  for (const auto& m : matrix.measures()) out << ',' << m;
  out << '\n';
  for (const auto& [key, row] : matrix.rows()) {
    if (key.first.find_first_of(",\n\r") != std::string::npos)
      throw DataError("topic id not representable in CSV: " + key.first);
    out << key.first << ',' << key.second;
    for (const auto& m : matrix.measures()) {
      out << ',';
      auto cell = row.find(m);
      if (cell != row.end() && !std::isnan(cell->second))
        out << format_value(cell->second);
    }
    out << '\n';
  }
}

EvalMatrix read_eval_matrix(std::istream& in, const std::string& source) {
  EvalMatrix matrix;
  std::string line;
  std::size_t line_no = 0;
  std::vector<MeasureId> columns;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto at = where(source, line_no);
    if (!have_header) {
      if (line.starts_with("#")) {
        auto body = trim(std::string_view(line).substr(1));
        auto eq = body.find('=');
        if (eq == std::string::npos) continue;
        auto key = body.substr(0, eq);
        auto value = body.substr(eq + 1);
        if (key == "source") {
          matrix.source = value;
        } else if (key == "model") {
          matrix.model = value;
        } else if (key == "cutoff") {
          if (!parse_int(value, matrix.cutoff))
            throw DataError(at + ": cutoff is not an integer");
        } else if (key == "unjudged") {
          matrix.unjudged = split_csv(std::string(value));
        }
        continue;
      }
      if (trim(line).empty()) continue;
      auto header = split_csv(line);
      if (header.size() < 2 || header[0] != "topic" || header[1] != "query")
        throw DataError(at + ": header must start with topic,query");
      std::set<std::string> seen;
      for (std::size_t i = 2; i < header.size(); ++i) {
        try {
          columns.push_back(MeasureId::parse(header[i]));
          matrix.add_measure(columns.back());
        } catch (const DataError& e) {
          throw DataError(at + ": " + e.what());
        }
        if (!seen.insert(header[i]).second)
          throw DataError(at + ": duplicated measure column " + header[i]);
      }
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != columns.size() + 2)
      throw DataError(at + ": expected " + std::to_string(columns.size() + 2) +
                      " cells, found " + std::to_string(cells.size()));
    const auto& topic = cells[0];
    std::size_t index = 0;
    if (topic.empty()) throw DataError(at + ": empty topic id");
    if (!parse_int(cells[1], index))
      throw DataError(at + ": query index is not an integer");
    if (matrix.rows().contains({topic, index}))
      throw DataError(at + ": duplicated key (" + topic + ", " +
                      std::to_string(index) + ")");
    matrix.add_row(topic, index);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = cells[c + 2];
      if (cell.empty()) continue;
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(at + ": not a number: " + cell);
      matrix.set(topic, index, columns[c], value);
    }
  }
  if (!have_header) throw DataError(source + ": missing CSV header row");
  return matrix;
}

EvalMatrix read_eval_matrix(const std::string& path) {
  auto in = open_input(path, "evaluation matrix");
  return read_eval_matrix(in, path);
}

// ---------------------------------------------------------------------------
// Run files

void write_run(std::ostream& out, const RankedList& list, const std::string& tag,
               const std::string& iteration) {
  char score[48];
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    std::snprintf(score, sizeof score, "%.6f", list.entries[i].score);
    out << list.topic_id << ' ' << iteration << ' ' << list.entries[i].doc_id
        << ' ' << (i + 1) << ' ' << score << ' ' << tag << '\n';
  }
}

std::vector<RunEntry> read_run(std::istream& in, const std::string& source) {
  std::vector<RunEntry> runs;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::vector<std::vector<std::pair<std::size_t, ScoredDoc>>> ranked;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const auto at = where(source, line_no);
    if (fields.size() != 6)
      throw DataError(at + ": expected 6 columns, found " +
                      std::to_string(fields.size()));
    std::size_t rank = 0;
    if (!parse_int(fields[3], rank) || rank == 0)
      throw DataError(at + ": rank must be a positive integer");
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(fields[4].data(),
                                     fields[4].data() + fields[4].size(), score);
    if (ec != std::errc() || ptr != fields[4].data() + fields[4].size())
      throw DataError(at + ": score is not a number");
    const std::pair<std::string, std::string> key{std::string(fields[0]),
                                                  std::string(fields[1])};
    auto [it, inserted] = slot.emplace(key, runs.size());
    if (inserted) {
      runs.push_back({key.first, key.second, {}});
      runs.back().list.topic_id = key.first;
      ranked.emplace_back();
    }
    ranked[it->second].push_back({rank, {std::string(fields[2]), score}});
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& entries = ranked[i];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::set<std::string> seen;
    for (auto& [rank, doc] : entries) {
      if (!seen.insert(doc.doc_id).second)
        throw DataError(source + ": document " + doc.doc_id +
                        " ranked twice for topic " + runs[i].topic);
      runs[i].list.entries.push_back(std::move(doc));
    }
    runs[i].list.cutoff = runs[i].list.entries.size();
  }
  return runs;
}

std::vector<RunEntry> read_run(const std::string& path) {
  auto in = open_input(path, "run file");
  return read_run(in, path);
}

}  // namespace uqvsim
