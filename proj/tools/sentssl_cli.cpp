// sentssl: command-line front end for the self-training experiments.
//
//   sentssl run      --config <file> --out <dir>
//   sentssl synth    --spec <file> --out <file>
//   sentssl replay   --manifest <file> [--out <dir>]
//   sentssl validate --config <file>
//   sentssl features --corpus <file> --out <csv> [--limit N] [--dims-log2 B]
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sentssl/corpus.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/experiment.hpp"
#include "sentssl/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kRuntimeError = 4 };

bool g_verbose = false;

void log(const std::string& msg) {
  if (g_verbose) std::cerr << msg << '\n';
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir) {
  const auto config = sentssl::parse_config(config_path);
  log("running " + std::string(sentssl::to_string(config.kind)) + " experiment");
  const auto result = sentssl::run_experiment(config, out_dir);
  for (const auto& f : result.outputs) log("wrote " + (result.output_dir / f.name).string());
  std::cout << "wrote " << result.outputs.size() << " output file(s) and manifest.json to "
            << result.output_dir.string() << '\n';
  return kOk;
}

int cmd_validate(const fs::path& config_path) {
  const auto config = sentssl::parse_config(config_path);
  std::cout << config.to_json().dump(2) << '\n';
  return kOk;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_path) {
  std::ifstream in(spec_path, std::ios::binary);
  if (!in) throw sentssl::ConfigError("cannot open synth spec " + spec_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto spec = sentssl::parse_synth_spec(buf.str());
  const auto reviews = sentssl::synth_corpus(spec);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw sentssl::DataError("cannot write " + out_path.string());
  sentssl::write_corpus_jsonl(reviews, out);
  if (!out) throw sentssl::DataError("failed writing " + out_path.string());
  std::cout << "wrote " << reviews.size() << " reviews to " << out_path.string() << '\n';
  return kOk;
}

int cmd_replay(const fs::path& manifest, const std::string& out_dir) {
  std::optional<fs::path> out;
  if (!out_dir.empty()) out = out_dir;
  const auto result = sentssl::replay_manifest(manifest, out);
  if (result.reproduced()) {
    std::cout << "replay reproduced all " << result.run.outputs.size() << " output(s) in "
              << result.run.output_dir.string() << '\n';
    return kOk;
  }
  for (const auto& name : result.mismatched) std::cerr << "mismatch: " << name << '\n';
  return kRuntimeError;
}

int cmd_features(const fs::path& corpus, const fs::path& out_path, std::size_t limit,
                 int dims_log2) {
  sentssl::FeatureConfig features;
  features.dims_log2 = dims_log2;
  features.validate();
  auto ingested = sentssl::ingest(corpus, sentssl::IngestOptions{limit, false});
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw sentssl::DataError("cannot write " + out_path.string());
  sentssl::write_feature_dump(ingested.reviews, features, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-training sentiment classification experiments"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbose, "Log progress to stderr");

  std::string config, out, spec, manifest, corpus;
  std::size_t limit = 100;
  int dims_log2 = 20;

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory")->required();

  auto* synth = app.add_subcommand("synth", "Write a synthetic JSONL review corpus");
  synth->add_option("--spec", spec, "Synthetic corpus spec (JSON)")->required();
  synth->add_option("--out", out, "Output JSONL file")->required();

  auto* replay = app.add_subcommand("replay", "Re-run a recorded experiment and compare outputs");
  replay->add_option("--manifest", manifest, "manifest.json of a previous run")->required();
  replay->add_option("--out", out, "Output directory (default: <manifest dir>/replay)");

  auto* validate = app.add_subcommand("validate", "Validate a config and print it with defaults");
  validate->add_option("--config", config, "Experiment config (JSON)")->required();

  auto* features = app.add_subcommand("features", "Dump hashed feature terms as CSV");
  features->add_option("--corpus", corpus, "JSONL corpus")->required();
  features->add_option("--out", out, "Output CSV")->required();
  features->add_option("--limit", limit, "Number of reviews to dump");
  features->add_option("--dims-log2", dims_log2, "Feature space size exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*synth) return cmd_synth(spec, out);
    if (*replay) return cmd_replay(manifest, out);
    if (*validate) return cmd_validate(config);
    if (*features) return cmd_features(corpus, out, limit, dims_log2);
  } catch (const sentssl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sentssl::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
