#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "uqvsim/error.hpp"
#include "uqvsim/simulator.hpp"

namespace uqvsim {
namespace {

CandidateList symbolic(std::size_t n) {
  CandidateList list;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto t = "t" + std::to_string(i);
    list.terms.push_back({t, t, static_cast<double>(n - i + 1)});
  }
  return list;
}

TermSequence ts(std::initializer_list<int> ids) {
  TermSequence out;
  for (int i : ids) out.push_back("t" + std::to_string(i));
  return out;
}

TEST(Conventional, PatternsOverTwelveCandidates) {
  const auto c = symbolic(12);
  const auto s1 = generate_conventional(c, Strategy::kS1, 10);
  const auto s2 = generate_conventional(c, Strategy::kS2, 10);
  const auto s2p = generate_conventional(c, Strategy::kS2P, 10);
  const auto s3 = generate_conventional(c, Strategy::kS3, 10);
  const auto s3p = generate_conventional(c, Strategy::kS3P, 10);
  for (int i = 1; i <= 10; ++i) {
    EXPECT_EQ(s1[i - 1], ts({i}));
    EXPECT_EQ(s2[i - 1], ts({1, i + 1}));
    EXPECT_EQ(s2p[i - 1], ts({1, 2, i + 2}));
    TermSequence prefix;
    for (int j = 1; j <= i; ++j) prefix.push_back("t" + std::to_string(j));
    EXPECT_EQ(s3[i - 1], prefix);
    prefix.push_back("t" + std::to_string(i + 1));
    prefix.push_back("t" + std::to_string(i + 2));
    EXPECT_EQ(s3p[i - 1], prefix);
  }
}

TEST(Conventional, Examples) {
  const auto c = symbolic(5);
  EXPECT_EQ(generate_conventional(c, Strategy::kS2, 3),
            (std::vector<TermSequence>{ts({1, 2}), ts({1, 3}), ts({1, 4})}));
  EXPECT_EQ(generate_conventional(c, Strategy::kS3P, 2),
            (std::vector<TermSequence>{ts({1, 2, 3}), ts({1, 2, 3, 4})}));
}

TEST(Conventional, TruncatesWithWarning) {
  Warnings warnings;
  const auto out = generate_conventional(symbolic(1), Strategy::kS1, 3, &warnings);
  EXPECT_EQ(out, (std::vector<TermSequence>{ts({1})}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(generate_conventional(symbolic(2), Strategy::kS2P, 3).empty());
  EXPECT_THROW(generate_conventional(symbolic(5), Strategy::kS4, 3), ConfigError);
}

TEST(Strategy, ParseAndPresets) {
  EXPECT_EQ(parse_strategy("S2'"), Strategy::kS2P);
  EXPECT_EQ(parse_strategy("s4''"), Strategy::kS4PP);
  EXPECT_EQ(parse_strategy("S3P"), Strategy::kS3P);
  EXPECT_THROW(parse_strategy("S5"), ConfigError);

  const auto s4 = QcmParams::preset(Strategy::kS4);
  EXPECT_EQ(s4.alpha, 2.2);
  EXPECT_EQ(s4.beta, 0.2);
  EXPECT_EQ(s4.epsilon, 0.05);
  EXPECT_EQ(s4.delta, 0.6);
  const auto s4p = QcmParams::preset(Strategy::kS4P);
  EXPECT_EQ(s4p.alpha, 2.2);
  EXPECT_EQ(s4p.beta, 0.2);
  EXPECT_EQ(s4p.epsilon, 0.25);
  EXPECT_EQ(s4p.delta, 0.1);
  const auto s4pp = QcmParams::preset(Strategy::kS4PP);
  EXPECT_EQ(s4pp.alpha, 0.2);
  EXPECT_EQ(s4pp.beta, 0.2);
  EXPECT_EQ(s4pp.epsilon, 0.025);
  EXPECT_EQ(s4pp.delta, 0.5);
  EXPECT_THROW(QcmParams::preset(Strategy::kS2), ConfigError);
}

TEST(Strategy, ParamValidation) {
  QcmParams p = QcmParams::preset(Strategy::kS4);
  EXPECT_NO_THROW(p.validate());
  p.vocab_cap = 4;
  EXPECT_THROW(p.validate(), ConfigError);
  p.vocab_cap = 0;
  p.ngram_sizes = {};
  EXPECT_THROW(p.validate(), ConfigError);
  p.ngram_sizes = {0, 2};
  EXPECT_THROW(p.validate(), ConfigError);
  p.ngram_sizes = {3};
  p.delta = -1;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(SimulatorSpec, LabelsPickSources) {
  EXPECT_EQ(SimulatorSpec::from_label("TTS_S1").source, CandidateSource::kTopic);
  EXPECT_EQ(SimulatorSpec::from_label("KIS_S2P").source, CandidateSource::kRel);
  const auto tts4 = SimulatorSpec::from_label("TTS_S4");
  EXPECT_EQ(tts4.source, CandidateSource::kTopicPlusRel);
  EXPECT_EQ(tts4.k, 4u);
  ASSERT_TRUE(tts4.strategy.qcm.has_value());
  EXPECT_EQ(SimulatorSpec::from_label("KIS_S4''").strategy.qcm->alpha, 0.2);
  EXPECT_THROW(SimulatorSpec::from_label("ABC_S1"), ConfigError);
  EXPECT_THROW(SimulatorSpec::from_label("S1"), ConfigError);

  auto spec = SimulatorSpec::from_label("TTS_S1");
  spec.source = CandidateSource::kRel;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SimulatorSpec::from_label("KIS_S1");
  spec.n_queries = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SimulatorSpec::from_label("KIS_S4");
  spec.strategy.qcm.reset();
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_query_candidates(symbolic(5), {3, 4, 5}, 5).size(), 16u);
  EXPECT_EQ(enumerate_query_candidates(symbolic(3), {1}, 3),
            (std::vector<TermSequence>{ts({1}), ts({2}), ts({3})}));
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(enumerate_query_candidates(symbolic(30), {5}, 20).size(), 15504u);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(Enumerate, OrderAndCap) {
  const auto out = enumerate_query_candidates(symbolic(4), {3, 2}, 3);
  EXPECT_EQ(out, (std::vector<TermSequence>{ts({1, 2}), ts({1, 3}), ts({2, 3}), ts({1, 2, 3})}));
  EXPECT_TRUE(enumerate_query_candidates(symbolic(2), {3}, 5).empty());
}

struct ThetaWorld {
  PostingsIndex index = PostingsIndex::build(std::vector<Document>{
      {"d1", "women parliaments votes"}, {"d2", "seats"}, {"d3", "stone"}, {"d4", "stone"}});
  TermDistribution cqg{{{"women", 0.3}, {"vote", 0.3}, {"parliament", 0.25}, {"seat", 0.15}}};
};

TEST(Theta, HandExamples) {
  ThetaWorld w;
  const QcmContext ctx({"women"}, {"women", "parliaments", "votes"}, w.cqg, w.index,
                       QcmParams::preset(Strategy::kS4));
  EXPECT_NEAR(qcm_theta("women", {"women"}, {}, ctx), 1.54, 1e-12);
  EXPECT_NEAR(qcm_theta("votes", {"women", "votes"}, {"women"}, ctx), 0.94, 1e-12);
  EXPECT_NEAR(qcm_theta("votes", {"women"}, {"votes"}, ctx), -0.18, 1e-12);
  // Kept non-title term, and a term in neither query.
  EXPECT_EQ(qcm_theta("votes", {"votes"}, {"votes"}, ctx), 0.0);
  EXPECT_EQ(qcm_theta("seats", {"women"}, {"women"}, ctx), 0.0);
  // Added non-topic term: epsilon idf.
  EXPECT_NEAR(qcm_theta("stone", {"stone"}, {}, ctx), 0.05 * std::log(4.0 / 2.0), 1e-12);
  // The title case wins even for a title term that was removed and re-added.
  EXPECT_NEAR(qcm_theta("women", {"women"}, {"votes"}, ctx), 1.54, 1e-12);
}

TEST(QueryScore, HandExamples) {
  ThetaWorld w;
  const QcmContext ctx({"women", "parliaments"}, {"women", "parliaments", "votes"}, w.cqg,
                       w.index, QcmParams::preset(Strategy::kS4));
  EXPECT_NEAR(qcm_query_score({"women", "parliaments"}, {"women", "parliaments"}, ctx),
              (2.2 * 0.7 + 2.2 * 0.75) / 2.0, 1e-12);
  EXPECT_NEAR(qcm_query_score({"votes", "stone"}, {"votes"}, ctx),
              0.05 * std::log(2.0) / 2.0, 1e-12);
  EXPECT_THROW(qcm_query_score({}, {"women"}, ctx), DataError);
  // Dropping a high-probability reference term costs more than a low one.
  EXPECT_GT(qcm_query_score({"women", "votes"}, {"women", "votes", "seats"}, ctx),
            qcm_query_score({"women", "seats"}, {"women", "votes", "seats"}, ctx));
}

TEST(QueryScore, MatchesOracleOnRandomTriples) {
  std::mt19937 rng(2022);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = oracle::random_qcm_fixture(rng);
    const QcmContext ctx(f.title, f.topic, f.cqg, f.index, f.params);
    EXPECT_NEAR(qcm_query_score(f.candidate, f.reference, ctx),
                oracle::qcm_score(f.candidate, f.reference, f.inputs), 1e-12)
        << "trial " << trial;
  }
}

// Exhaustive greedy selection written against the oracle scorer.
std::vector<TermSequence> greedy_oracle(const CandidateList& pool, const TermSequence& title,
                                        const oracle::QcmInputs& in,
                                        const std::vector<std::size_t>& sizes, std::size_t n) {
  const auto all = enumerate_query_candidates(pool, sizes, pool.size());
  std::vector<TermSequence> out;
  std::set<std::set<std::string>> used;
  TermSequence reference = title;
  for (std::size_t step = 0; step < n; ++step) {
    const TermSequence* best = nullptr;
    double best_score = 0.0;
    for (const auto& q : all) {
      if (used.contains(std::set<std::string>(q.begin(), q.end()))) continue;
      const double s = oracle::qcm_score(q, reference, in);
      bool take = best == nullptr || s > best_score + 1e-12;
      if (!take && std::abs(s - best_score) <= 1e-12)
        take = q.size() < best->size() || (q.size() == best->size() && q < *best);
      if (take) {
        best = &q;
        best_score = s;
      }
    }
    if (!best) break;
    used.insert(std::set<std::string>(best->begin(), best->end()));
    out.push_back(*best);
    reference = *best;
  }
  return out;
}

TEST(Greedy, MatchesExhaustiveOracle) {
  const std::vector<Document> docs{{"d1", "women parliaments quota"}, {"d2", "votes seats"},
                                   {"d3", "quota reform"}, {"d4", "women"}, {"d5", "reform"}};
  const auto index = PostingsIndex::build(docs);
  const TermDistribution cqg({{"women", 0.28}, {"parliament", 0.22}, {"quota", 0.18},
                              {"vote", 0.12}, {"seat", 0.11}, {"reform", 0.09}});
  const TermSequence title{"women", "parliaments"};
  const TermSequence topic{"women", "parliaments", "votes", "quota"};
  CandidateList pool;
  for (const auto& t : std::vector<std::string>{"women", "parliaments", "quota", "votes", "seats", "reform"})
    pool.terms.push_back({t, stem(t), cqg.prob(stem(t))});

  for (auto strategy : {Strategy::kS4, Strategy::kS4P, Strategy::kS4PP}) {
    auto params = QcmParams::preset(strategy);
    params.ngram_sizes = {2, 3};
    const QcmContext ctx(title, topic, cqg, index, params);
    oracle::QcmInputs in;
    for (const auto& t : title) in.title.insert(stem(t));
    for (const auto& t : topic) in.topic.insert(stem(t));
    for (const auto& [t, p] : cqg.probs()) in.prob[t] = p;
    for (const auto& t : index.terms()) in.df[t] = index.df(t);
    in.num_docs = 5;
    in.alpha = params.alpha;
    in.beta = params.beta;
    in.epsilon = params.epsilon;
    in.delta = params.delta;
    const auto got = simulate_qcm(pool, ctx, 3);
    EXPECT_EQ(got, greedy_oracle(pool, title, in, params.ngram_sizes, 3)) << to_string(strategy);
    EXPECT_EQ(got, simulate_qcm(pool, ctx, 3));
  }
}

TEST(Greedy, DegenerateParamsPickLeastShortest) {
  const std::vector<Document> docs{{"d1", "a b c d"}};
  const auto index = PostingsIndex::build(docs);
  const TermDistribution cqg({{"a", 0.25}, {"b", 0.25}, {"c", 0.25}, {"d", 0.25}});
  CandidateList pool;
  for (const auto& t : std::vector<std::string>{"d", "c", "b", "a"}) pool.terms.push_back({t, t, 0.25});
  QcmParams params;
  params.ngram_sizes = {2, 3};
  const QcmContext ctx({"a"}, {"a"}, cqg, index, params);
  const auto got = simulate_qcm(pool, ctx, 2);
  EXPECT_EQ(got, (std::vector<TermSequence>{{"b", "a"}, {"c", "a"}}));
}

TEST(Greedy, SingleQueryAndExhaustion) {
  const std::vector<Document> docs{{"d1", "a b c"}};
  const auto index = PostingsIndex::build(docs);
  const TermDistribution cqg({{"a", 0.5}, {"b", 0.3}, {"c", 0.2}});
  CandidateList pool;
  for (const auto& t : std::vector<std::string>{"a", "b", "c"}) pool.terms.push_back({t, t, cqg.prob(t)});
  auto params = QcmParams::preset(Strategy::kS4);
  params.ngram_sizes = {3};
  const QcmContext ctx({"a"}, {"a"}, cqg, index, params);
  EXPECT_EQ(simulate_qcm(pool, ctx, 1).size(), 1u);
  Warnings warnings;
  EXPECT_EQ(simulate_qcm(pool, ctx, 3, &warnings).size(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Simulate, SyntheticSessionsAreWellFormed) {
  synthetic::Options opt;
  opt.num_docs = 150;
  opt.num_topics = 3;
  const auto c = synthetic::generate(opt);
  const auto index = PostingsIndex::build(c.docs);
  for (const char* label : {"TTS_S1", "TTS_S3P", "KIS_S2P", "TTS_S4", "KIS_S4P", "KIS_S4PP"}) {
    for (const auto& topic : c.topics) {
      const auto spec = SimulatorSpec::from_label(label);
      const auto session = simulate(spec, topic, c.qrels, index);
      EXPECT_EQ(session.topic_id, topic.id);
      EXPECT_LE(session.queries.size(), spec.n_queries);
      EXPECT_FALSE(session.queries.empty()) << label;
      std::set<std::set<std::string>> seen;
      for (const auto& q : session.queries) {
        EXPECT_FALSE(q.empty());
        EXPECT_TRUE(seen.insert({q.begin(), q.end()}).second) << label;
      }
    }
  }
}

TEST(Session, OneQueryEqualsPlainSearch) {
  const std::vector<Document> docs{{"a", "x y"}, {"b", "y z"}, {"c", "x"}};
  const auto index = PostingsIndex::build(docs);
  const auto model = RetrievalModel::bm25_default();
  const auto run = run_session({{"x", "y"}}, index, model, 10, "T");
  EXPECT_EQ(run.pooled.entries, model.search(index, {"x", "y"}, 10, "T").entries);
  EXPECT_THROW(run_session({{"x"}}, index, model, 0, "T"), ConfigError);
}

TEST(Session, IdenticalQueriesAddNothing) {
  const std::vector<Document> docs{{"a", "x y"}, {"b", "y z"}, {"c", "x"}};
  const auto index = PostingsIndex::build(docs);
  const auto model = RetrievalModel::bm25_default();
  const auto run = run_session({{"x"}, {"x"}}, index, model, 10, "T");
  EXPECT_EQ(run.pooled.entries, run.per_query[0].entries);
}

TEST(Session, HandPooling) {
  auto list = [](std::vector<std::string> ids) {
    RankedList l;
    double s = 10;
    for (auto& id : ids) l.entries.push_back({id, s--});
    return l;
  };
  const auto pooled = pool_rankings({list({"a", "b", "c"}), list({"c", "d", "a", "e"})}, 3, "T");
  std::vector<std::string> ids;
  for (const auto& e : pooled.entries) ids.push_back(e.doc_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(pooled.entries[3].score, 9.0);
}

TEST(Session, RandomizedPoolingInvariants) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RankedList> lists;
    for (int q = 0; q < 10; ++q) {
      std::vector<int> ids(300);
      std::iota(ids.begin(), ids.end(), 0);
      std::shuffle(ids.begin(), ids.end(), rng);
      RankedList l;
      for (int i = 0; i < 120; ++i) l.entries.push_back({"d" + std::to_string(ids[i]), 200.0 - i});
      lists.push_back(l);
    }
    const auto pooled = pool_rankings(lists, 100, "T");
    std::set<std::string> seen;
    std::size_t q = 0, r = 0;
    for (const auto& e : pooled.entries) {
      EXPECT_TRUE(seen.insert(e.doc_id).second);
      // Locate the entry at or after the current (query, rank) cursor.
      while (q < lists.size() && (r >= 100 || lists[q].entries[r].doc_id != e.doc_id)) {
        if (++r >= 100) {
          ++q;
          r = 0;
        }
      }
      ASSERT_LT(q, lists.size());
    }
  }
}

}  // namespace
}  // namespace uqvsim
