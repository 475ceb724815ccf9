#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sentssl/features.hpp"
#include "sentssl/learners.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

/// Positive and negative sentiment terms. Terms are lowercase, nonempty,
/// and the two sets are disjoint.
struct Lexicon {
  std::set<std::string> positive;
  std::set<std::string> negative;

  /// Throws std::invalid_argument on overlap, empty or non-lowercase terms.
  void validate() const;
};

/// The built-in lexicon; identical to data/lexicon/{positive,negative}.txt.
Lexicon default_lexicon();

/// One term per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> read_term_list(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& positive, const std::filesystem::path& negative);

struct WeakLabelOutcome {
  std::optional<Polarity> label;
  std::size_t pos_hits = 0;
  std::size_t neg_hits = 0;
};

struct WeakLabelOptions {
  bool include_body = false;  // titles only by default
};

/// Counts title tokens found in each lexicon set. Labels only when exactly
/// one side has hits; abstains otherwise.
WeakLabelOutcome weak_label(const Review& review, const Lexicon& lexicon,
                            const WeakLabelOptions& options = {});

struct WeakLabeledCorpus {
  std::vector<LabeledExample> labeled;  // provenance weak, input order
  double coverage = 0.0;                // labeled / total, 0 for an empty corpus
};

WeakLabeledCorpus weak_label_corpus(std::span<const Review> reviews, const Lexicon& lexicon,
                                    const FeatureConfig& features,
                                    const WeakLabelOptions& options = {});

struct WslPoint {
  std::size_t n_weak_examples = 0;
  double error_rate = 0.0;
};

struct WslCurve {
  std::vector<WslPoint> points;
  // Checkpoints beyond the number of weak labels available were dropped.
  bool truncated = false;
};

/// Streams the weak-labelled reviews (corpus order) into a fresh learner,
/// one online update each, and evaluates on `gold_test` whenever the number
/// of examples seen reaches a checkpoint. Throws std::invalid_argument if
/// checkpoints are not ascending or gold_test is empty.
WslCurve run_wsl(std::span<const Review> corpus, const Lexicon& lexicon,
                 std::span<const LabeledExample> gold_test, const LearnerSpec& learner,
                 const FeatureConfig& features, std::span<const std::size_t> checkpoints,
                 const WeakLabelOptions& options = {});

struct RuleConfusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0, abstain = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn + abstain; }
  friend bool operator==(const RuleConfusion&, const RuleConfusion&) = default;
};

/// Weak labels against star-derived gold labels. Throws
/// std::invalid_argument for a 3-star review (no gold label).
RuleConfusion weak_rule_quality(std::span<const Review> reviews, const Lexicon& lexicon,
                                const WeakLabelOptions& options = {});

/// CSV: n_weak_examples,error_rate
void write_wsl_csv(const WslCurve& curve, std::ostream& out);

}  // namespace sentssl
