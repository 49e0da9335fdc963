#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "tempdir.hpp"

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run cli(const support::TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = quote(SYNTHWEIGHT_CLI_PATH) + " " + args + " >" + quote(out.string()) + " 2>" +
                            quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string arg(const std::filesystem::path& p) { return quote(p.string()); }

}  // namespace

TEST(Cli, MissingPairsFileExitsTwoAndNamesPath) {
    support::TempDir dir;
    std::ofstream(dir / "c.json") << R"({"pairs":"no_such_pairs.jsonl","out":"run"})";
    const auto r = cli(dir, "pipeline --config " + arg(dir / "c.json"));
    EXPECT_EQ(r.code, 2);
    const auto j = json::parse(r.err);
    EXPECT_NE(j["error"].get<std::string>().find("no_such_pairs.jsonl"), std::string::npos) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, UsageErrorsExitTwo) {
    support::TempDir dir;
    EXPECT_EQ(cli(dir, "").code, 2);
    EXPECT_EQ(cli(dir, "frobnicate").code, 2);
    EXPECT_EQ(cli(dir, "gen-toy --noise-rate 2 --seed 1 --out " + arg(dir / "p.jsonl")).code, 2);
    EXPECT_EQ(cli(dir, "ingest " + arg(dir / "missing.jsonl")).code, 2);
}

TEST(Cli, GenToyIsByteIdentical) {
    support::TempDir dir;
    const std::string common = "gen-toy --count 60 --noise-rate 0.5 --seed 7 --out ";
    ASSERT_EQ(cli(dir, common + arg(dir / "a.jsonl")).code, 0);
    ASSERT_EQ(cli(dir, common + arg(dir / "b.jsonl")).code, 0);
    EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
    EXPECT_FALSE(read_file(dir / "a.jsonl").empty());
    const auto m = json::parse(read_file(dir / "a.jsonl.manifest.json"));
    EXPECT_EQ(m["corrupted_ids"].size(), 30u);
}

TEST(Cli, GenToyNoiseZeroKeepsMachineSentences) {
    support::TempDir dir;
    ASSERT_EQ(cli(dir, "gen-toy --count 20 --noise-rate 0 --seed 1 --out " + arg(dir / "base.jsonl")).code, 0);
    ASSERT_EQ(cli(dir, "gen-toy --pairs-in " + arg(dir / "base.jsonl") + " --noise-rate 0 --seed 2 --out " +
                           arg(dir / "same.jsonl"))
                  .code,
              0);
    EXPECT_EQ(read_file(dir / "base.jsonl"), read_file(dir / "same.jsonl"));
}

TEST(Cli, StagewiseCommands) {
    support::TempDir dir;
    ASSERT_EQ(cli(dir, "gen-toy --count 120 --noise-rate 0.5 --seed 3 --out " + arg(dir / "p.jsonl")).code, 0);

    auto r = cli(dir, "ingest --generated " + arg(dir / "p.jsonl"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["examples"], 120);

    r = cli(dir, "train-sdi --pairs " + arg(dir / "p.jsonl") + " --out " + arg(dir / "sdi.json") +
                     " --seed 3 --lr 5 --feature-dim 4096 --temperature 0.5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(read_file(dir / "sdi.json"))["temperature"], 0.5);

    r = cli(dir, "score --model " + arg(dir / "sdi.json") + " --pairs " + arg(dir / "p.jsonl") + " --out " +
                     arg(dir / "scores.jsonl"));
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string scores = read_file(dir / "scores.jsonl");
    EXPECT_EQ(std::count(scores.begin(), scores.end(), '\n'), 120);

    r = cli(dir, "analyze --pairs " + arg(dir / "p.jsonl") + " --scores " + arg(dir / "scores.jsonl") +
                     " --fraction 0.1 --out " + arg(dir / "analysis"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "analysis" / "group_report.json"));
    EXPECT_NE(r.out.find("Distinct-N"), std::string::npos);

    r = cli(dir, "train-encoder --pairs " + arg(dir / "p.jsonl") + " --scores " + arg(dir / "scores.jsonl") +
                     " --variant rise --seed 3 --vocab-dim 1024 --embed-dim 8 --out " + arg(dir / "enc.bin"));
    ASSERT_EQ(r.code, 0) << r.err;

    r = cli(dir, "evaluate --model " + arg(dir / "enc.bin") + " --pairs " + arg(dir / "p.jsonl") +
                     " --variant rise --out " + arg(dir / "eval.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto eval = json::parse(read_file(dir / "eval.json"));
    EXPECT_EQ(eval["count"], 12);
    EXPECT_NE(r.out.find("spearman="), std::string::npos);

    r = cli(dir, "train-encoder --pairs " + arg(dir / "p.jsonl") + " --variant rise --out " + arg(dir / "x.bin"));
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, PipelineFlagsOverrideConfig) {
    support::TempDir dir;
    ASSERT_EQ(cli(dir, "gen-toy --count 100 --noise-rate 0.5 --seed 2 --out " + arg(dir / "p.jsonl")).code, 0);
    std::ofstream(dir / "c.json") << R"({"pairs":"p.jsonl","out":"ignored","generated":true,
        "sdi":{"feature_dim":4096},"encoder":{"vocab_dim":1024,"embed_dim":8}})";
    const auto r = cli(dir, "pipeline --config " + arg(dir / "c.json") + " --seed 5 --fraction 0.2 --temperature 0.7 " +
                                "--variant rise --variant dino --out " + arg(dir / "run"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = json::parse(read_file(dir / "run" / "manifest.json"));
    EXPECT_EQ(m["seed"], 5);
    EXPECT_EQ(m["config"]["fraction"], 0.2);
    EXPECT_EQ(m["config"]["temperature"], 0.7);
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / "eval_dino.json"));
    EXPECT_FALSE(std::filesystem::exists(dir / "run" / "eval_random.json"));
    EXPECT_FALSE(std::filesystem::exists(dir / "ignored"));
}

TEST(Cli, StageFailureExitsOne) {
    support::TempDir dir;
    // Binary labels and no dev split: evaluation cannot tune a threshold.
    std::ofstream pairs(dir / "p.jsonl");
    for (int i = 0; i < 40; ++i) {
        pairs << json{{"id", "p" + std::to_string(i)},
                      {"human", "the cat number " + std::to_string(i) + " sat"},
                      {"machine", i % 2 ? "a dog ran far away" : "the cat sat down"},
                      {"label", i % 2 ? 0 : 1},
                      {"split", i < 30 ? "train" : "test"}}
                     .dump()
              << "\n";
    }
    pairs.close();
    std::ofstream(dir / "c.json") << R"({"pairs":"p.jsonl","out":"run","variants":["dino"],
        "sdi":{"feature_dim":1024},"encoder":{"vocab_dim":256,"embed_dim":4}})";
    const auto r = cli(dir, "pipeline --config " + arg(dir / "c.json"));
    EXPECT_EQ(r.code, 1) << r.err;
    const auto err = json::parse(r.err);
    EXPECT_TRUE(err.contains("stage"));
    EXPECT_EQ(json::parse(read_file(dir / "run" / "manifest.json"))["partial"], true);
}
