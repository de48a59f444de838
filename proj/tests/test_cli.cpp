#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "kgc/cli/app.hpp"
#include "kgc/embed/table.hpp"
#include "kgc/kg/io.hpp"
#include "kgc/kg/ops.hpp"
#include "toy.hpp"

using namespace kgc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result kgc_run(std::vector<std::string> args) {
  args.insert(args.begin(), "kgc");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Dataset directory with train/dev/test files and a matching embedding pair.
fs::path make_dataset(const std::string& tag) {
  const auto dir = kgc::testing::scratch_dir(tag);
  auto g = kgc::testing::random_kg(30, 2, 160, 3);
  g = apply_split(g, make_random_split(g, {0.8, 0.1, 0.1}, 3));
  write_tsv(dir / "train.txt", g, Split::Train);
  write_tsv(dir / "dev.txt", g, Split::Dev);
  write_tsv(dir / "test.txt", g, Split::Test);
  write_embedding_file(dir / "emb.bin", kgc::testing::gaussian_table(g.num_nodes(), 6, 4));
  write_phrase_file(dir / "emb.txt", g.phrases());
  return dir;
}

std::vector<std::string> small_model_flags() {
  return {"--variant", "gcn+convtranse", "--epochs", "2", "--dim", "8", "--channels", "2",
          "--kernel", "3", "--eval-every", "1", "--lr", "0.003"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, UnknownSubcommandAndFlagAreUsageErrors) {
  const auto bogus = kgc_run({"frobnicate"});
  EXPECT_EQ(bogus.code, cli::kExitUsage);
  EXPECT_NE((bogus.out + bogus.err).find("Usage"), std::string::npos);
  const auto flag = kgc_run({"stats", "--no-such-flag"});
  EXPECT_EQ(flag.code, cli::kExitUsage);
  EXPECT_EQ(kgc_run({}).code, cli::kExitUsage);
}

TEST(Cli, MissingFilesFailBeforeWork) {
  const auto dir = kgc::testing::scratch_dir("cli-missing");
  const auto r = kgc_run({"train", "--data", (dir / "nope").string(), "--out-dir",
                          (dir / "out").string(), "--variant", "convtranse"});
  EXPECT_NE(r.code, cli::kExitOk);
  EXPECT_FALSE(fs::exists(dir / "out" / "model.kgc"));
}

TEST(Cli, StatsPrintsCounts) {
  const auto dir = make_dataset("cli-stats");
  const auto r = kgc_run({"stats", "--data", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto g = load_dataset(dir);
  EXPECT_NE(r.out.find(std::to_string(g.num_nodes())), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(std::to_string(g.edges(Split::Train).size())), std::string::npos);
}

TEST(Cli, SplitWritesThreeFiles) {
  const auto dir = kgc::testing::scratch_dir("cli-split");
  const auto g = kgc::testing::random_kg(20, 2, 100, 1);
  write_tsv(dir / "all.tsv", g, Split::Train);
  const auto r = kgc_run({"split", "--input", (dir / "all.tsv").string(), "--out-dir",
                          (dir / "out").string(), "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(dir / "out" / "train.txt") + line_count(dir / "out" / "dev.txt") +
                line_count(dir / "out" / "test.txt"),
            100u);
}

TEST(Cli, DensifyNeedsExactlyOneCriterion) {
  const auto dir = make_dataset("cli-densify");
  const std::vector<std::string> base{"densify", "--data", dir.string(), "--embeddings",
                                      (dir / "emb.bin").string(), "--out-dir",
                                      (dir / "d").string()};
  EXPECT_EQ(kgc_run(base).code, cli::kExitUsage);
  EXPECT_EQ(kgc_run(concat(base, {"--tau", "0.5", "--cap", "10"})).code, cli::kExitUsage);
  const auto r = kgc_run(concat(base, {"--cap", "10"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(line_count(dir / "d" / "sim_pairs.tsv"), 10u);
  EXPECT_NE(r.out.find("criterion=cap"), std::string::npos);
}

TEST(Cli, TrainTwiceGivesIdenticalHistory) {
  const auto dir = make_dataset("cli-determinism");
  auto train = [&](const std::string& out) {
    return kgc_run(concat({"train", "--data", dir.string(), "--out-dir", (dir / out).string(),
                           "--seed", "7"},
                          small_model_flags()));
  };
  const auto a = train("a"), b = train("b");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto ha = slurp(dir / "a" / "history.csv");
  EXPECT_FALSE(ha.empty());
  EXPECT_EQ(ha, slurp(dir / "b" / "history.csv"));
  EXPECT_EQ(slurp(dir / "a" / "model.kgc"), slurp(dir / "b" / "model.kgc"));
  EXPECT_NE(a.err.find("\"seed\": 7"), std::string::npos) << a.err;
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = make_dataset("cli-override");
  nlohmann::json cfg = {{"train", {{"variant", "convtranse"}, {"epochs", 3}, {"dim", 8},
                                   {"channels", 2}, {"kernel", 3}, {"eval_every", 1},
                                   {"seed", 1}}},
                        {"data", dir.string()},
                        {"out_dir", (dir / "out").string()}};
  std::ofstream(dir / "c.json") << cfg.dump(2);
  const auto r = kgc_run({"train", "--config", (dir / "c.json").string(), "--epochs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto saved = nlohmann::json::parse(slurp(dir / "out" / "model.kgc.json"));
  EXPECT_EQ(saved["train"]["epochs"], 2);
  EXPECT_EQ(saved["train"]["variant"], "convtranse");
  EXPECT_EQ(saved["train"]["seed"], 1);
  // Two dev rows plus the test row.
  EXPECT_EQ(line_count(dir / "out" / "history.csv"), 4u);
}

TEST(Cli, EvalPermTestAndAblation) {
  const auto dir = make_dataset("cli-eval");
  const auto out = (dir / "run").string();
  ASSERT_EQ(kgc_run(concat({"train", "--data", dir.string(), "--out-dir", out},
                           small_model_flags()))
                .code,
            0);
  const auto ckpt = (dir / "run" / "model.kgc").string();
  const auto ev = kgc_run({"eval", "--checkpoint", ckpt, "--split", "dev"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("gcn+convtranse"), std::string::npos) << ev.out;

  const auto perm = kgc_run({"perm-test", "--checkpoint", ckpt, "--out-dir", out});
  ASSERT_EQ(perm.code, 0) << perm.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "permutation.csv"));

  const auto g = load_dataset(dir);
  const double d = compute_stats(g).density;
  std::ostringstream levels;
  levels.precision(17);
  levels << d << ',' << d / 2;
  const auto ab = kgc_run(concat({"ablate-density", "--data", dir.string(), "--out-dir", out,
                                  "--densities", levels.str()},
                                 small_model_flags()));
  ASSERT_EQ(ab.code, 0) << ab.err;
  EXPECT_EQ(line_count(dir / "run" / "ablation.csv"), 3u);

  EXPECT_NE(kgc_run({"eval", "--checkpoint", (dir / "missing.kgc").string()}).code, 0);
}
