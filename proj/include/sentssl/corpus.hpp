#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentssl/features.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

struct IngestOptions {
  std::optional<std::size_t> limit;  // stop after this many accepted reviews
  bool strict = false;               // malformed line -> DataError instead of skip
};

struct IngestResult {
  std::vector<Review> reviews;
  std::size_t skipped = 0;
  std::vector<std::string> problems;  // first few skip reasons, "line N: ..."
};

/// Parses one JSON Lines record. Throws DataError describing the defect.
/// String ids that are not plain decimal integers are mapped through FNV-1a.
Review parse_review_line(std::string_view line);

/// Streams a JSON Lines corpus. Malformed lines (including duplicate ids) are
/// skipped and counted unless `strict` is set. Blank lines are ignored.
IngestResult ingest(std::istream& in, const IngestOptions& options = {});

/// Throws DataError if the file cannot be opened.
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// 4,5 -> positive; 1,2 -> negative; 3 -> none. Throws std::invalid_argument
/// for stars outside 1..5.
std::optional<Polarity> derive_label(int stars);

/// Gold examples for every review with a derivable label, in input order.
std::vector<LabeledExample> gold_examples(const std::vector<Review>& reviews,
                                          const FeatureConfig& features);

// ---------------------------------------------------------------------------
// Balanced splits
// ---------------------------------------------------------------------------

enum class ClassBalance { balanced, natural };

struct BalanceSpec {
  std::map<std::string, std::size_t> per_domain_test_size;
  ClassBalance class_balance = ClassBalance::balanced;

  /// Sizes must be positive, and even under balanced mode.
  void validate() const;
};

/// Test-size tiers by domain rank (1-based). Each entry covers ranks up to
/// and including `last_rank`.
struct TestSizeTier {
  std::size_t last_rank;
  std::size_t test_size;
};

/// 1 -> 100,000; 2..9 -> 10,000; 10..30 -> 1,000; 31..33 -> 100.
std::vector<TestSizeTier> default_test_size_tiers();

/// The 33 product domains ranked by review count, largest first.
const std::vector<std::string>& reference_domains();

/// Assigns each domain (ranked in the given order) its tier's test size.
/// Ranks beyond the last tier get the last tier's size.
std::map<std::string, std::size_t> tiered_test_sizes(
    const std::vector<std::string>& ranked_domains,
    const std::vector<TestSizeTier>& tiers = default_test_size_tiers());

/// Gold labels of pool entries. Only evaluation code (pseudo-label audits)
/// reads these; learners and selection policies never receive them.
class HiddenLabels {
 public:
  void insert(ReviewId id, Polarity label) { labels_[id] = label; }
  void erase(ReviewId id) { labels_.erase(id); }
  std::optional<Polarity> audit(ReviewId id) const;
  std::size_t size() const noexcept { return labels_.size(); }

  friend bool operator==(const HiddenLabels&, const HiddenLabels&) = default;

 private:
  std::map<ReviewId, Polarity> labels_;
};

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<PoolEntry> pool;
  std::vector<LabeledExample> test;
  // Gold-labelled examples not yet assigned to train or pool.
  std::vector<LabeledExample> reservoir;
  HiddenLabels pool_gold;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Draws a per-domain test set for every domain named in `spec`; all other
/// labelable reviews form the reservoir. 3-star reviews are dropped.
/// Throws DataError naming the domain when it lacks enough reviews.
DatasetSplit build_balanced(const std::vector<Review>& corpus, const BalanceSpec& spec,
                            const FeatureConfig& features, std::uint64_t seed);

/// Class mix requested for the seed train set and the pool.
struct ClassRatio {
  enum class Kind { balanced, fraction, as_is };
  Kind kind = Kind::balanced;
  double positive_fraction = 0.5;

  static ClassRatio balanced() { return {Kind::balanced, 0.5}; }
  static ClassRatio natural(double positive_fraction) { return {Kind::fraction, positive_fraction}; }
  // Uniform sample of whatever the reservoir holds.
  static ClassRatio as_is() { return {Kind::as_is, 0.0}; }
};

/// Moves `labeled_seed_size` gold examples into train and `pool_size`
/// examples into the pool (labels hidden) out of the reservoir. Deterministic
/// given split.seed. Throws DataError if the reservoir cannot supply the
/// requested counts; std::invalid_argument for odd sizes under balanced mode.
DatasetSplit make_pool(DatasetSplit split, std::size_t labeled_seed_size, std::size_t pool_size,
                       ClassRatio ratio);

/// Flips exactly floor(rate * n) labels chosen by a seeded sample without
/// replacement, marking them noisy. Order is preserved.
std::vector<LabeledExample> inject_label_noise(std::vector<LabeledExample> train, double rate,
                                               std::uint64_t seed);

/// floor(rate * n) with a tolerance that absorbs binary rounding of decimal rates.
std::size_t noise_flip_count(double rate, std::size_t n);

/// One JSON object per partition: {"partition": ..., "ids": [...]}.
void write_split_manifest(const DatasetSplit& split, std::ostream& out);

}  // namespace sentssl
