#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/experiment.hpp"
#include "sentssl/synthetic.hpp"

using namespace sentssl;
using namespace sentssl::testing;
namespace fs = std::filesystem;

namespace {

fs::path write_synth_corpus(const TempDir& dir, const std::string& name,
                            std::vector<SynthDomain> domains, std::uint64_t seed = 1) {
  SynthSpec s;
  s.seed = seed;
  s.domains = std::move(domains);
  std::ostringstream out;
  write_corpus_jsonl(synth_corpus(s), out);
  const auto path = dir / name;
  write_file(path, out.str());
  return path;
}

std::string config_error_message(std::string_view text, const fs::path& base = {}) {
  try {
    parse_config_text(text, base);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets documented defaults") {
  TempDir dir;
  write_synth_corpus(dir, "c.jsonl", {{"books", 20, 0.5, 0.0}});
  const auto c = parse_config_text(R"({"kind": "ssl", "corpus": "c.jsonl"})", dir.path());
  CHECK(c.ssl.batch_size == 1000);
  CHECK(c.ssl.epochs_per_iteration == 1);
  CHECK(c.ssl.max_iterations == 10);
  CHECK(c.features.dims_log2 == 20);
  CHECK(c.ssl.learner.dims_log2 == 20);
  CHECK(c.ssl.learner.r == 1.0);
  CHECK(c.ssl.learner.kind == LearnerKind::perceptron);
  CHECK(c.seed_size == 100);
  CHECK(c.policy == SelectionPolicy::highest_margin());
  CHECK(*c.corpus == dir / "c.jsonl");

  // The echo parses back to the same configuration.
  const auto again = config_from_json(c.to_json(), dir.path());
  CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config errors name the offending key") {
  TempDir dir;
  write_synth_corpus(dir, "c.jsonl", {{"books", 20, 0.5, 0.0}});

  const auto missing = config_error_message(R"({"kind": "da_pair", "source_corpus": "c.jsonl"})", dir.path());
  CHECK(missing.find("target_corpus") != std::string::npos);

  const auto typo = config_error_message("{\n  \"kind\": \"ssl\",\n  \"corpus\": \"c.jsonl\",\n  \"batchsize\": 5\n}",
                                         dir.path());
  CHECK(typo.find("batchsize") != std::string::npos);
  CHECK(typo.find("did you mean \"batch_size\"") != std::string::npos);
  CHECK(typo.find("line 4") != std::string::npos);

  CHECK(config_error_message(R"({"kind": "ssl", "corpus": "nope.jsonl"})", dir.path())
            .find("corpus") != std::string::npos);
  CHECK(config_error_message(R"({"kind": "sssl"})").find("kind") != std::string::npos);
  CHECK_FALSE(config_error_message("{\"kind\": ").empty());
  CHECK_FALSE(config_error_message(R"({"kind": "ssl", "corpus": "c.jsonl", "batch_size": 0})",
                                   dir.path()).empty());
  CHECK_FALSE(config_error_message(
                  R"({"kind": "ssl", "corpus": "c.jsonl",
                      "policy": {"kind": "hybrid", "first": {"kind": "hybrid"}, "second": "random"}})",
                  dir.path()).empty());
}

TEST_CASE("hybrid policy config") {
  TempDir dir;
  write_synth_corpus(dir, "c.jsonl", {{"books", 20, 0.5, 0.0}});
  const auto c = parse_config_text(
      R"({"kind": "ssl", "corpus": "c.jsonl", "max_iterations": 8, "seed": 5,
          "policy": {"kind": "hybrid", "first": "random", "second": "highest_margin"}})",
      dir.path());
  REQUIRE(c.policy.is_hybrid());
  CHECK(c.policy.switch_after() == 4);
  CHECK(c.policy.first().kind == BasicPolicy::Kind::random);
}

TEST_CASE("fixture run writes one row per record and a manifest") {
  TempDir dir;
  const auto c = parse_config_text(
      R"({"kind": "ssl", "fixture": {"pool_size": 200, "test_size": 200},
          "batch_size": 20, "max_iterations": 5, "seed": 2})");
  CHECK(c.ssl.learner.dims_log2 == 1);
  const auto result = run_experiment(c, dir / "out");
  const auto csv = read_file(dir / "out" / "records.csv");
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 1 + 6);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(result.manifest["tool"] == "sentssl");
  CHECK(result.manifest["outputs"].size() == result.outputs.size());
  for (const auto& f : result.outputs) CHECK(sha256_file(dir / "out" / f.name) == f.sha256);
}

TEST_CASE("learner_compare shares one split") {
  TempDir dir;
  const auto c = parse_config_text(
      R"({"kind": "learner_compare", "fixture": {"pool_size": 100, "test_size": 100},
          "batch_size": 10, "max_iterations": 2})");
  run_experiment(c, dir / "out");
  const auto p = read_file(dir / "out" / "records_perceptron.csv");
  const auto a = read_file(dir / "out" / "records_arow.csv");
  CHECK_FALSE(p.empty());
  CHECK_FALSE(a.empty());
  // Same train/pool sizes row by row; the learners differ only in error.
  auto sizes = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.find(',', line.find(',') + 1)) + ";";
    return out;
  };
  CHECK(sizes(p) == sizes(a));
}

TEST_CASE("corpus-backed ssl, noise and wsl runs") {
  TempDir dir;
  write_synth_corpus(dir, "c.jsonl", {{"books", 400, 0.5, 0.1}, {"music", 300, 0.5, 0.0}});
  const auto ssl = parse_config_text(
      R"({"kind": "ssl", "corpus": "c.jsonl", "dims_log2": 12, "test_size": 40,
          "seed_size": 20, "pool_size": 200, "batch_size": 50, "max_iterations": 3})",
      dir.path());
  const auto r = run_experiment(ssl, dir / "ssl");
  CHECK(fs::exists(dir / "ssl" / "records.csv"));
  CHECK(fs::exists(dir / "ssl" / "split.jsonl"));
  CHECK(read_file(dir / "ssl" / "records.csv").find("sel_books") != std::string::npos);

  const auto noise = parse_config_text(
      R"({"kind": "noise", "corpus": "c.jsonl", "dims_log2": 12, "test_size": 40,
          "seed_size": 20, "pool_size": 100, "batch_size": 50, "max_iterations": 1,
          "noise_rates": [0, 0.2]})",
      dir.path());
  run_experiment(noise, dir / "noise");
  CHECK(fs::exists(dir / "noise" / "records_noise_0.csv"));
  CHECK(fs::exists(dir / "noise" / "records_noise_0.2.csv"));

  const auto wsl = parse_config_text(
      R"({"kind": "wsl", "corpus": "c.jsonl", "dims_log2": 12, "test_size": 40,
          "checkpoints": [0, 10, 50]})",
      dir.path());
  run_experiment(wsl, dir / "wsl");
  CHECK(read_file(dir / "wsl" / "wsl_curve.csv").rfind("n_weak_examples,error_rate\n0,", 0) == 0);
  CHECK(fs::exists(dir / "wsl" / "wsl_rule_quality.csv"));
}

TEST_CASE("domain adaptation runs") {
  TempDir dir;
  write_synth_corpus(dir, "src.jsonl", {{"books", 300, 0.5, 0.0}}, 1);
  write_synth_corpus(dir, "tgt.jsonl", {{"music", 300, 0.5, 0.0}}, 2);
  const auto pair = parse_config_text(
      R"({"kind": "da_pair", "source_corpus": "src.jsonl", "target_corpus": "tgt.jsonl",
          "dims_log2": 12, "test_size": 40, "source_train_size": 100, "target_train_size": 20,
          "da_setting": "mixed_train", "batch_size": 50, "max_iterations": 2})",
      dir.path());
  run_experiment(pair, dir / "pair");
  CHECK(fs::exists(dir / "pair" / "records.csv"));

  write_synth_corpus(dir, "multi.jsonl",
                     {{"industrial", 200, 0.5, 0.0}, {"books", 200, 0.5, 0.0}, {"music", 100, 0.5, 0.0}});
  const auto many = parse_config_text(
      R"({"kind": "da_one_to_many", "corpus": "multi.jsonl", "source_domain": "industrial",
          "dims_log2": 12, "test_size": 20, "source_train_size": 100, "batch_size": 50, "max_iterations": 2})",
      dir.path());
  run_experiment(many, dir / "many");
  const auto usage = read_file(dir / "many" / "usage.csv");
  CHECK(usage.find("0,industrial,100,100,1\n") != std::string::npos);
  CHECK(usage.find("0,books,") != std::string::npos);
}

TEST_CASE("failed runs leave no CSV behind") {
  TempDir dir;
  write_synth_corpus(dir, "c.jsonl", {{"books", 40, 0.5, 0.0}});
  // Test set larger than the domain: DataError during split construction.
  const auto c = parse_config_text(R"({"kind": "ssl", "corpus": "c.jsonl", "dims_log2": 10, "test_size": 100})",
                                   dir.path());
  CHECK_THROWS_AS(run_experiment(c, dir / "out"), DataError);
  bool any_csv = false;
  if (fs::exists(dir / "out"))
    for (const auto& e : fs::directory_iterator(dir / "out"))
      any_csv |= e.path().extension() == ".csv" || e.path().extension() == ".partial";
  CHECK_FALSE(any_csv);
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("replay reproduces outputs and detects changed inputs") {
  TempDir dir;
  const auto corpus = write_synth_corpus(dir, "c.jsonl", {{"books", 200, 0.5, 0.0}});
  const auto c = parse_config_text(
      R"({"kind": "ssl", "corpus": "c.jsonl", "dims_log2": 10, "test_size": 20,
          "seed_size": 20, "pool_size": 60, "batch_size": 20, "max_iterations": 2, "seed": 4})",
      dir.path());
  run_experiment(c, dir / "run");
  const auto replay = replay_manifest(dir / "run" / "manifest.json");
  CHECK(replay.reproduced());
  CHECK(replay.run.output_dir == dir / "run" / "replay");

  write_file(corpus, read_file(corpus) + "\n");
  CHECK_THROWS_AS(replay_manifest(dir / "run" / "manifest.json", dir / "again"), DataError);
}

TEST_CASE("sha256_file") {
  TempDir dir;
  write_file(dir / "abc", "abc");
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("write_feature_dump") {
  std::ostringstream out;
  FeatureConfig f;
  f.use_bigrams = false;
  f.normalize = false;
  write_feature_dump({make_review(3, "d", 5, "good good")}, f, out);
  CHECK(out.str() == "review_id,term,index,value\n3,t:good,128074,2\n");
}
