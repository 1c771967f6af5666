#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "uqvsim/error.hpp"
#include "uqvsim/language_model.hpp"

namespace uqvsim {
namespace {

TEST(TermDistribution, RejectsBadTables) {
  EXPECT_THROW(TermDistribution({{"a", 0.5}, {"b", 0.4}}), InvariantError);
  EXPECT_THROW(TermDistribution({{"a", 1.0}, {"b", 0.0}}), InvariantError);
  EXPECT_NO_THROW(TermDistribution({{"a", 0.5}, {"b", 0.5}}));
}

TEST(TermDistribution, SortedAndCsv) {
  const TermDistribution d({{"b", 0.25}, {"a", 0.25}, {"c", 0.5}});
  const auto sorted = d.sorted();
  EXPECT_EQ(sorted[0].first, "c");
  EXPECT_EQ(sorted[1].first, "a");
  EXPECT_EQ(sorted[2].first, "b");
  EXPECT_EQ(d.prob("zzz"), 0.0);
  std::ostringstream out;
  d.write_csv(out);
  EXPECT_EQ(out.str().substr(0, 22), "term,probability\nc,0.5");
}

TEST(Cqg, MixtureExample) {
  const TermDistribution topic({{"t", 0.5}, {"u", 0.5}});
  const TermDistribution background({{"t", 0.1}, {"v", 0.9}});
  const auto cqg = cqg_model(topic, background, 0.4);
  EXPECT_NEAR(cqg.prob("t"), 0.34, 1e-12);
  EXPECT_NEAR(cqg.prob("u"), 0.30, 1e-12);
  EXPECT_NEAR(cqg.prob("v"), 0.36, 1e-12);
  EXPECT_THROW(cqg_model(topic, background, 1.5), DataError);
}

TEST(Cqg, LambdaExtremes) {
  const TermDistribution topic({{"t", 1.0}});
  const TermDistribution background({{"t", 0.2}, {"v", 0.8}});
  EXPECT_EQ(cqg_model(topic, background, 0.0).support_size(), 1u);
  EXPECT_NEAR(cqg_model(topic, background, 1.0).prob("v"), 0.8, 1e-12);
}

TEST(Models, FromIndex) {
  const std::vector<Document> docs{{"d1", "apple apple pear"}, {"d2", "pear plum"}, {"d3", "fig"}};
  const auto index = PostingsIndex::build(docs);
  const auto bg = background_model(index);
  EXPECT_NEAR(bg.prob("pear"), 2.0 / 6.0, 1e-12);
  Qrels qrels;
  qrels.set("1", "d1", 1);
  qrels.set("1", "d2", 0);
  qrels.set("1", "missing", 2);
  const auto tm = topic_model(index, qrels, "1");
  EXPECT_NEAR(tm.prob("appl"), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(tm.prob("plum"), 0.0);
  qrels.set("2", "missing", 1);
  EXPECT_THROW(topic_model(index, qrels, "2"), DataError);
  EXPECT_THROW(background_model(PostingsIndex::build({})), DataError);
}

TEST(Idf, Examples) {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({"d" + std::to_string(i), i == 0 ? "rare" : "common"});
  const auto ten = PostingsIndex::build(docs);
  EXPECT_NEAR(idf(ten, "rare"), std::log(10.0), 1e-12);
  EXPECT_NEAR(idf(ten, "common"), std::log(10.0 / 9.0), 1e-12);
  for (int i = 10; i < 100; ++i) docs.push_back({"d" + std::to_string(i), "common"});
  const auto hundred = PostingsIndex::build(docs);
  EXPECT_NEAR(idf(hundred, "unseen"), std::log(200.0), 1e-12);
}

TEST(Candidates, TopicTermsInOrder) {
  const Topic topic{"1", "Women in Parliaments", "Find women members.", "Parliaments with quotas."};
  const auto list = candidates_topic(topic);
  EXPECT_EQ(list.surface_terms(),
            (TermSequence{"women", "parliaments", "find", "members", "quotas"}));
  EXPECT_EQ(list.terms[0].weight, 5.0);
  EXPECT_EQ(list.terms[4].weight, 1.0);
  EXPECT_EQ(list.terms[1].key, "parliament");
  EXPECT_THROW(candidates_topic(Topic{"2", "the of", "", ""}), DataError);
}

TEST(Candidates, RelOrderedByProbability) {
  const TermDistribution cqg({{"b", 0.3}, {"a", 0.3}, {"c", 0.4}});
  const auto list = candidates_rel(cqg);
  EXPECT_EQ(list.surface_terms(), (TermSequence{"c", "a", "b"}));
  EXPECT_EQ(list.source, CandidateSource::kRel);
}

TEST(Candidates, TopicPlusRel) {
  const Topic topic{"1", "Parliaments women", "", ""};
  const TermDistribution cqg(
      {{"parliament", 0.1}, {"vote", 0.4}, {"seat", 0.3}, {"elect", 0.2}});
  const auto rel = candidates_rel(cqg);
  const auto list = candidates_topic_plus_rel(topic, rel, 2);
  // "women" is absent from the rel list; "parliaments" keeps its surface form.
  EXPECT_EQ(list.surface_terms(), (TermSequence{"vote", "seat", "parliaments"}));
  EXPECT_EQ(list.k, 2u);
  EXPECT_EQ(candidates_topic_plus_rel(topic, rel, 0).size(), 1u);
  EXPECT_EQ(candidates_topic_plus_rel(topic, rel, 10).size(), 4u);
}

TEST(Candidates, SourceNames) {
  EXPECT_EQ(to_string(CandidateSource::kTopic), "topic");
  EXPECT_EQ(to_string(CandidateSource::kTopicPlusRel), "topic_plus_rel");
}

}  // namespace
}  // namespace uqvsim
