#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "uqvsim/config.hpp"
#include "uqvsim/error.hpp"

namespace uqvsim {
namespace {

namespace fs = std::filesystem;

TEST(Config, Defaults) {
  const auto c = ExperimentConfig::parse("");
  EXPECT_EQ(c.retrieval.model.kind, RetrievalModel::Kind::kBm25);
  EXPECT_EQ(c.retrieval.model.bm25.k1, 0.9);
  EXPECT_EQ(c.retrieval.model.bm25.b, 0.4);
  EXPECT_EQ(c.retrieval.model.qld.mu, 1000.0);
  EXPECT_EQ(c.retrieval.depth, 1000u);
  EXPECT_EQ(c.retrieval.session_depth, 100u);
  EXPECT_EQ(c.retrieval.systems, (std::vector<double>{50, 250, 500, 1250, 2500, 5000}));
  EXPECT_EQ(c.lambda, 0.4);
  EXPECT_EQ(c.evaluation.sdcg_b, 2.0);
  EXPECT_EQ(c.evaluation.sdcg_bq, 4.0);
  EXPECT_EQ(c.evaluation.gain_levels, (std::vector<double>{0.3, 0.4, 0.5}));
  EXPECT_EQ(c.threads, 1u);
}

TEST(Config, ParsesEverySection) {
  const auto c = ExperimentConfig::parse(R"(
paths: {corpus: data/corpus.jsonl, qrels: /abs/qrels.txt, output: out}
retrieval: {model: qld, mu: 500, depth: 50, session_depth: 20, systems: [10, 20]}
language_model: {lambda: 0.3}
simulators:
  - TTS_S1
  - KIS_S2'
  - {label: MY_S4, strategy: S4, source: rel, alpha: 1.5, ngram_sizes: [2, 3], vocab_cap: 8}
  - {label: TTS_S4P, n_queries: 4, k: 6}
evaluation:
  measures: [AP, nDCG@10, P@5]
  reference: UQV_1
  sources: [UQV_1, TTS_S1]
  test_measure: AP
  depths: [5, 10]
threads: 3
)", "/base");
  EXPECT_EQ(c.paths.corpus, "/base/data/corpus.jsonl");
  EXPECT_EQ(c.paths.qrels, "/abs/qrels.txt");
  EXPECT_EQ(c.index_path(), "/base/out/index.bin");
  EXPECT_EQ(c.run_path("X", true), "/base/out/runs/X.pooled.run");
  EXPECT_EQ(c.eval_path("X", false), "/base/out/eval/X.perquery.csv");
  EXPECT_EQ(c.report_path(), "/base/out/compare.json");
  EXPECT_EQ(c.retrieval.model.name(), "qld(mu=500)");
  EXPECT_EQ(c.retrieval.depth, 50u);
  EXPECT_EQ(c.lambda, 0.3);
  ASSERT_EQ(c.simulators.size(), 4u);
  EXPECT_EQ(c.simulators[0].lambda, 0.3);
  EXPECT_EQ(c.simulators[1].strategy.kind, Strategy::kS2P);
  EXPECT_EQ(c.simulators[2].source, CandidateSource::kRel);
  EXPECT_EQ(c.simulators[2].strategy.qcm->alpha, 1.5);
  EXPECT_EQ(c.simulators[2].strategy.qcm->delta, 0.6);
  EXPECT_EQ(c.simulators[2].strategy.qcm->vocab_cap, 8u);
  EXPECT_EQ(c.simulators[3].n_queries, 4u);
  EXPECT_EQ(c.simulators[3].k, 6u);
  EXPECT_EQ(c.evaluation.measures[1].name(), "nDCG@10");
  EXPECT_EQ(c.evaluation.test_measure.name(), "AP");
  EXPECT_EQ(c.threads, 3u);
}

TEST(Config, RejectsBadInput) {
  for (const char* yaml : {
           "bogus: 1",
           "paths: {corpse: x}",
           "retrieval: {model: tfidf}",
           "retrieval: {depth: many}",
           "simulators: TTS_S1",
           "simulators: [XYZ_S1]",
           "simulators: [TTS_S9]",
           "simulators: [{label: TTS_S1, alpha: 1}]",
           "simulators: [{strategy: S1}]",
           "simulators: [{label: custom, strategy: S1}]",
           "evaluation: {measures: [MAP]}",
           "paths: [1, 2",
       })
    EXPECT_THROW(ExperimentConfig::parse(yaml), ConfigError) << yaml;
}

TEST(Config, Validate) {
  const auto dir = fs::temp_directory_path() / "uqvsim_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "corpus.jsonl") << "{\"id\":\"a\",\"contents\":\"x\"}\n";
  const std::string base = dir.string();
  EXPECT_NO_THROW(ExperimentConfig::parse("paths: {corpus: corpus.jsonl}", base)
                      .validate(Command::kIndex));
  EXPECT_THROW(ExperimentConfig::parse("paths: {corpus: nope.jsonl}", base)
                   .validate(Command::kIndex),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("paths: {corpus: corpus.jsonl}\nretrieval: {depth: 0}", base)
                   .validate(Command::kIndex),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("paths: {corpus: corpus.jsonl}\nsimulators: [TTS_S1, TTS_S1]", base)
                   .validate(Command::kIndex),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("paths: {corpus: corpus.jsonl}\nthreads: 0", base)
                   .validate(Command::kIndex),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("paths: {corpus: corpus.jsonl}\nevaluation: {gain_levels: [1.5]}", base)
                   .validate(Command::kIndex),
               ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("", base).validate(Command::kEvaluate), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("", base).validate(Command::kSimulate), ConfigError);
  fs::remove_all(dir);
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  const auto dir = fs::temp_directory_path() / "uqvsim_config_load";
  fs::create_directories(dir);
  std::ofstream(dir / "exp.yaml") << "paths: {corpus: c.jsonl}\n";
  const auto c = ExperimentConfig::load((dir / "exp.yaml").string());
  EXPECT_EQ(c.paths.corpus, (dir / "c.jsonl").string());
  EXPECT_THROW(ExperimentConfig::load((dir / "missing.yaml").string()), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace uqvsim
