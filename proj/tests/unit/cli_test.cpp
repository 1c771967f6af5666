#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "synthetic.hpp"
#include "uqvsim/collection.hpp"
#include "uqvsim/config.hpp"
#include "uqvsim/error.hpp"
#include "uqvsim/pipeline.hpp"

namespace uqvsim {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("uqvsim_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    synthetic::Options opt;
    opt.num_docs = 160;
    opt.num_topics = 4;
    opt.uqv_queries = 4;
    synthetic::write(synthetic::generate(opt), (root_ / "data").string());
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  /// Writes a config into its own directory and returns its path.
  fs::path config(const std::string& name, const std::string& extra = "",
                  const std::string& uqv = "../data/uqv.tsv",
                  const std::string& retrieval = "{depth: 50, session_depth: 20}") {
    const auto dir = root_ / name;
    fs::create_directories(dir);
    std::ofstream(dir / "exp.yaml") << "paths:\n"
                                       "  corpus: ../data/corpus.jsonl\n"
                                       "  topics: ../data/topics.jsonl\n"
                                       "  qrels: ../data/qrels.txt\n"
                                    << (uqv.empty() ? "" : "  uqv: " + uqv + "\n")
                                    << "  output: out\n"
                                    << "retrieval: " << retrieval << "\n"
                                    << "evaluation:\n"
                                       "  depths: [5, 10]\n"
                                       "  session_lengths: [2, 3]\n"
                                       "  isoquant_max_queries: 3\n"
                                       "  isoquant_max_depth: 20\n"
                                    << extra;
    return dir / "exp.yaml";
  }

  static int cli(const std::string& args) {
    const std::string cmd = std::string(UQVSIM_CLI_PATH) + " " + args + " > " +
                            (root_ / "last.out").string() + " 2> " +
                            (root_ / "last.err").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string last_err() { return slurp(root_ / "last.err"); }

  static int all_steps(const fs::path& cfg, bool simulate = true) {
    for (const char* step : {"index", "simulate", "run", "evaluate", "compare"}) {
      if (!simulate && std::string(step) == "simulate") continue;
      const int code = cli(std::string(step) + " --config " + cfg.string());
      if (code != 0) return code;
    }
    return 0;
  }

  static fs::path root_;
};

fs::path Cli::root_;

TEST_F(Cli, FullPipeline) {
  const auto cfg = config("full",
                          "  reference: UQV_1\n"
                          "simulators: [TTS_S1, KIS_S2P, TTS_S4]\n"
                          "threads: 3\n");
  ASSERT_EQ(all_steps(cfg), 0) << last_err();
  const auto out = cfg.parent_path() / "out";
  for (const char* f : {"index.bin", "index.bin.stats.json", "simulated.tsv", "compare.json",
                        "runs/KIS_S2P.pooled.run", "eval/UQV_2.perquery.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto report = nlohmann::json::parse(slurp(out / "compare.json"));
  for (const char* key : {"arp", "ttest", "rmse_by_depth", "kendall_tau", "sdcg", "isoquants", "jaccard"})
    EXPECT_TRUE(report.contains(key)) << key;
  EXPECT_EQ(report["reference"], "UQV_1");
  const auto sim = parse_uqv((out / "simulated.tsv").string());
  EXPECT_EQ(sim.sources(), (std::vector<std::string>{"KIS_S2P", "TTS_S1", "TTS_S4"}));

  // Deterministic across thread counts.
  const auto again = config("full_single",
                            "  reference: UQV_1\n"
                            "simulators: [TTS_S1, KIS_S2P, TTS_S4]\n"
                            "threads: 1\n");
  ASSERT_EQ(all_steps(again), 0) << last_err();
  const auto out2 = again.parent_path() / "out";
  for (const char* f : {"simulated.tsv", "runs/TTS_S4.perquery.run", "runs/UQV_1.pooled.run",
                        "eval/KIS_S2P.pooled.csv", "compare.json"})
    EXPECT_EQ(slurp(out / f), slurp(out2 / f)) << f;
}

TEST_F(Cli, SelfComparisonIdentities) {
  const auto cfg = config("self", "  reference: UQV_1\n  sources: [UQV_1]\n");
  ASSERT_EQ(all_steps(cfg, false), 0) << last_err();
  const auto report = nlohmann::json::parse(slurp(cfg.parent_path() / "out/compare.json"));
  for (const auto& [measure, curve] : report["rmse_by_depth"]["curves"]["UQV_1"].items())
    for (const auto& v : curve) EXPECT_EQ(v.get<double>(), 0.0) << measure;
  EXPECT_EQ(report["ttest"]["p_values"]["UQV_1"]["UQV_1"].get<double>(), 1.0);
  for (const auto& v : report["kendall_tau"]["by_query"]["UQV_1"]) EXPECT_EQ(v.get<double>(), 1.0);
  EXPECT_EQ(report["jaccard"]["UQV_1"]["UQV_1"].get<double>(), 1.0);
  for (const auto& [level, entry] : report["isoquants"]["msle"]["UQV_1"].items())
    if (!entry["value"].is_null()) EXPECT_EQ(entry["value"].get<double>(), 0.0) << level;
}

TEST_F(Cli, OneQueryGivesIdenticalModes) {
  const auto dir = root_ / "onequery";
  fs::create_directories(dir);
  {
    const auto full = parse_uqv((root_ / "data/uqv.tsv").string());
    QueryVariantSet one;
    for (const auto& [key, qs] : full.groups())
      if (key.second == "UQV_1") one.set(key.first, "ONE", {qs.front()});
    std::ofstream out(dir / "one.tsv");
    write_uqv(out, one);
  }
  const auto cfg = config("onequery", "", "one.tsv", "{depth: 20, session_depth: 20}");
  for (const char* step : {"index", "run", "evaluate"})
    ASSERT_EQ(cli(std::string(step) + " --config " + cfg.string()), 0) << last_err();
  const auto out = dir / "out";
  EXPECT_EQ(slurp(out / "runs/ONE.perquery.run"), slurp(out / "runs/ONE.pooled.run"));
  EXPECT_EQ(slurp(out / "eval/ONE.perquery.csv"), slurp(out / "eval/ONE.pooled.csv"));
}

TEST_F(Cli, ExitCodes) {
  // Usage errors and config errors exit 1.
  EXPECT_EQ(cli("--config " + (root_ / "nope.yaml").string()), 1);
  EXPECT_EQ(cli("index --config " + (root_ / "nope.yaml").string()), 1);
  const auto bad = config("bad", "bogus_key: 1\n");
  EXPECT_EQ(cli("index --config " + bad.string()), 1);
  EXPECT_NE(last_err().find("bogus_key"), std::string::npos);
  const auto dup = config("dup", "simulators: [TTS_S1, TTS_S1]\n");
  EXPECT_EQ(cli("index --config " + dup.string()), 1);
  const auto zero = config("zero", "threads: 0\n");
  EXPECT_EQ(cli("index --config " + zero.string()), 1);

  // Refusing to overwrite is a config error; --force proceeds.
  const auto ok = config("force");
  ASSERT_EQ(cli("index --config " + ok.string()), 0) << last_err();
  EXPECT_EQ(cli("index --config " + ok.string()), 1);
  EXPECT_NE(last_err().find("--force"), std::string::npos);
  EXPECT_EQ(cli("index --force --config " + ok.string()), 0);

  // Malformed data exits 2.
  const auto broken = root_ / "broken";
  fs::create_directories(broken);
  std::ofstream(broken / "corpus.jsonl") << "{\"id\": 5}\n";
  std::ofstream(broken / "exp.yaml") << "paths: {corpus: corpus.jsonl, output: out}\n";
  EXPECT_EQ(cli("index --config " + (broken / "exp.yaml").string()), 2);
}

TEST_F(Cli, MissingQrelsIsConfigError) {
  const auto cfg = config("noqrels");
  std::string text = slurp(cfg);
  text.replace(text.find("../data/qrels.txt"), 17, "../data/missing.txt");
  std::ofstream(cfg) << text;
  ASSERT_EQ(cli("index --config " + cfg.string()), 0);
  ASSERT_EQ(cli("run --config " + cfg.string()), 0) << last_err();
  EXPECT_EQ(cli("evaluate --config " + cfg.string()), 1);
  EXPECT_NE(last_err().find("qrels"), std::string::npos);
}

TEST_F(Cli, MismatchedTopicSetsAreDataError) {
  const auto dir = root_ / "mismatch";
  fs::create_directories(dir);
  {
    auto set = parse_uqv((root_ / "data/uqv.tsv").string());
    set.set("301", "PART", {"first query"});
    set.set("302", "PART", {"second query"});
    std::ofstream out(dir / "part.tsv");
    write_uqv(out, set);
  }
  const auto cfg = config("mismatch", "  reference: UQV_1\n", "part.tsv");
  ASSERT_EQ(all_steps(cfg, false), 2);
  EXPECT_NE(last_err().find("303"), std::string::npos) << last_err();
}

TEST_F(Cli, OutputOverride) {
  const auto cfg = config("override");
  const auto elsewhere = root_ / "override_out";
  ASSERT_EQ(cli("index --config " + cfg.string() + " --output " + elsewhere.string()), 0);
  EXPECT_TRUE(fs::exists(elsewhere / "index.bin"));
  EXPECT_FALSE(fs::exists(cfg.parent_path() / "out/index.bin"));
}

TEST(Pipeline, ParallelForRethrows) {
  std::atomic<int> count{0};
  parallel_for(100, 4, [&](std::size_t) { ++count; });
  EXPECT_EQ(count.load(), 100);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw DataError("boom");
                            }),
               DataError);
}

}  // namespace
}  // namespace uqvsim
