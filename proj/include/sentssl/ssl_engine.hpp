#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentssl/corpus.hpp"
#include "sentssl/learners.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

// ---------------------------------------------------------------------------
// Selection policies
// ---------------------------------------------------------------------------

/// A non-hybrid selection rule.
struct BasicPolicy {
  enum class Kind { random, highest_margin };
  Kind kind = Kind::highest_margin;
  std::uint64_t seed = 0;  // random only

  static BasicPolicy random(std::uint64_t seed) { return {Kind::random, seed}; }
  static BasicPolicy highest_margin() { return {Kind::highest_margin, 0}; }

  friend bool operator==(const BasicPolicy&, const BasicPolicy&) = default;
};

/// Random, highest-margin, or a one-level hybrid that switches rule after a
/// fixed number of iterations. Hybrids cannot nest by construction.
class SelectionPolicy {
 public:
  static SelectionPolicy random(std::uint64_t seed);
  static SelectionPolicy highest_margin();
  /// `first` applies while iteration < switch_after, `second` afterwards.
  /// Throws std::invalid_argument if switch_after == 0.
  static SelectionPolicy hybrid(BasicPolicy first, BasicPolicy second, std::size_t switch_after);

  bool is_hybrid() const noexcept { return second_.has_value(); }
  const BasicPolicy& first() const noexcept { return first_; }
  const std::optional<BasicPolicy>& second() const noexcept { return second_; }
  std::size_t switch_after() const noexcept { return switch_after_; }

  /// The rule in force at `iteration`.
  const BasicPolicy& active(std::size_t iteration) const noexcept;

  std::string describe() const;

  friend bool operator==(const SelectionPolicy&, const SelectionPolicy&) = default;

 private:
  explicit SelectionPolicy(BasicPolicy first) : first_(first) {}

  BasicPolicy first_;
  std::optional<BasicPolicy> second_;
  std::size_t switch_after_ = 0;
};

struct ScoredId {
  ReviewId id = 0;
  double margin = 0.0;
};

/// Picks min(k, |scores|) ids. Scores are put in ascending-id order first, so
/// the input order never matters. random: first k of a Fisher-Yates shuffle
/// under SplitMix64(seed ^ iteration). highest_margin: largest |margin|, ties
/// by ascending id. The result is sorted by ascending id.
std::vector<ReviewId> select(std::span<const ScoredId> scores, const SelectionPolicy& policy,
                             std::size_t k, std::size_t iteration);

/// sign(score) with sign(0) = +1, provenance pseudo.
LabeledExample pseudo_label(const Learner& learner, const PoolEntry& entry);

// ---------------------------------------------------------------------------
// Self-training loop
// ---------------------------------------------------------------------------

enum class RetrainMode { from_scratch, incremental };

struct SslConfig {
  std::size_t batch_size = 1000;
  std::size_t max_iterations = 10;
  std::size_t epochs_per_iteration = 1;
  RetrainMode retrain_mode = RetrainMode::from_scratch;
  LearnerSpec learner;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 0 is the seed-only baseline
  std::size_t train_size = 0;
  std::size_t pool_remaining = 0;
  double test_error = 0.0;
  // Share of this iteration's pseudo-labels that match the hidden gold
  // labels; absent for the baseline.
  std::optional<double> pseudo_label_accuracy;
  std::map<std::string, std::size_t> selected_per_domain;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Called after each record is produced, with the entries absorbed in that
/// iteration (empty for the baseline).
using IterationObserver =
    std::function<void(const IterationRecord&, std::span<const PoolEntry> selected)>;

struct SslOutcome {
  std::vector<IterationRecord> records;
  Learner learner;
};

/// The self-training loop over explicit inputs. Record 0 trains on `train`
/// only; each later iteration scores the whole remaining pool, selects
/// batch_size entries, pseudo-labels and absorbs them, retrains and
/// evaluates on `test`. Stops at max_iterations or an empty pool.
SslOutcome self_train(std::vector<LabeledExample> train, std::vector<PoolEntry> pool,
                      std::span<const LabeledExample> test, const HiddenLabels& gold,
                      const SslConfig& config, const SelectionPolicy& policy,
                      const IterationObserver& observer = {});

/// Shuffle seed of every from-scratch training pass under `master_seed`.
std::uint64_t training_seed(std::uint64_t master_seed) noexcept;

/// self_train over a prepared split. Throws std::invalid_argument if the
/// split has no train or no test examples.
std::vector<IterationRecord> run_ssl(const DatasetSplit& split, const SslConfig& config,
                                     const SelectionPolicy& policy);

struct NoiseCurve {
  double rate = 0.0;
  std::vector<IterationRecord> records;
};

/// For each rate, corrupts a fresh copy of split.train with
/// inject_label_noise (seed derived from master_seed and the rate's index)
/// and runs run_ssl. Output follows the order of `rates`.
std::vector<NoiseCurve> run_noise_experiment(const DatasetSplit& split, const SslConfig& config,
                                             const SelectionPolicy& policy,
                                             std::span<const double> rates);

/// Seed that run_noise_experiment uses for the rate at `rate_index`.
std::uint64_t noise_seed(std::uint64_t master_seed, std::size_t rate_index) noexcept;

/// CSV with header iteration,train_size,pool_remaining,test_error,
/// pseudo_label_accuracy then one sel_<domain> column per domain seen in
/// any record (sorted). The baseline's accuracy cell is empty.
void write_records_csv(std::span<const IterationRecord> records, std::ostream& out);

}  // namespace sentssl
