#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sentssl/corpus.hpp"
#include "sentssl/domain_adapt.hpp"
#include "sentssl/features.hpp"
#include "sentssl/learners.hpp"
#include "sentssl/ssl_engine.hpp"
#include "sentssl/synthetic.hpp"

namespace sentssl {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ExperimentKind { ssl, da_pair, da_one_to_many, wsl, noise, learner_compare };

std::string_view to_string(ExperimentKind kind) noexcept;

/// A fully validated experiment description. Every optional knob carries
/// its default after parsing; `to_json` echoes the complete configuration.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ssl;

  // Data sources. Relative paths are resolved against the config file.
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> source_corpus;
  std::optional<std::filesystem::path> target_corpus;
  std::optional<FixtureSpec> fixture;  // 2-D numeric data instead of a corpus
  std::optional<std::string> source_domain;
  bool ingest_strict = false;

  FeatureConfig features;
  SslConfig ssl;  // ssl.learner.dims_log2 follows features (or 1 for fixtures)
  SelectionPolicy policy = SelectionPolicy::highest_margin();
  DaSetting da_setting = DaSetting::source_only;

  // Split construction.
  std::size_t test_size = 1000;                       // per domain
  std::map<std::string, std::size_t> test_sizes;      // explicit per-domain override
  ClassBalance test_balance = ClassBalance::balanced;
  std::size_t seed_size = 100;
  std::optional<std::size_t> pool_size;               // absent: the whole reservoir
  ClassRatio pool_ratio = ClassRatio::balanced();
  std::optional<std::size_t> source_train_size;       // absent: every source review
  std::size_t target_train_size = 100;

  std::vector<double> noise_rates = {0.0, 0.1, 0.2, 0.3};
  std::vector<std::size_t> checkpoints;
  std::optional<std::filesystem::path> lexicon_positive;
  std::optional<std::filesystem::path> lexicon_negative;
  bool weak_include_body = false;

  std::optional<std::filesystem::path> output_dir;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Builds a config from a parsed JSON document. Unknown keys, missing
/// kind-specific keys, bad enum values and missing files all throw
/// ConfigError naming the key. Relative paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});

/// Reads and validates a JSON config file. ConfigError messages carry the
/// line of the offending key when it can be located.
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Same, for in-memory text (line context refers to `text`).
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::filesystem::path& base_dir = {});

struct OutputFile {
  std::string name;
  std::string sha256;
};

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<OutputFile> outputs;
  nlohmann::json manifest;
};

/// Runs the experiment and writes its CSVs plus manifest.json into
/// `output_dir` (falling back to config.output_dir). Outputs are written as
/// *.partial and renamed only when the whole run succeeds; on failure the
/// partial files are removed and the exception propagates.
RunResult run_experiment(const ExperimentConfig& config,
                         std::optional<std::filesystem::path> output_dir = std::nullopt);

struct ReplayResult {
  RunResult run;
  std::vector<std::string> mismatched;  // outputs whose bytes differ from the manifest
  bool reproduced() const noexcept { return mismatched.empty(); }
};

/// Re-runs the configuration echoed in a manifest after checking that every
/// input still has its recorded digest (DataError otherwise). Outputs go to
/// `output_dir`, defaulting to <manifest dir>/replay.
ReplayResult replay_manifest(const std::filesystem::path& manifest_path,
                             std::optional<std::filesystem::path> output_dir = std::nullopt);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// review_id,term,index,value rows for the first `limit` reviews of a corpus.
void write_feature_dump(const std::vector<Review>& reviews, const FeatureConfig& features,
                        std::ostream& out);

}  // namespace sentssl
