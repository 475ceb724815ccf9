#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sentssl/corpus.hpp"
#include "sentssl/rng.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

// ---------------------------------------------------------------------------
// Synthetic text corpora
// ---------------------------------------------------------------------------

struct SynthDomain {
  std::string name;
  std::size_t count = 0;
  double positive_fraction = 0.5;  // of the non-neutral reviews
  double neutral_fraction = 0.0;   // share of 3-star reviews
};

/// Reviews are bags of tokens drawn from per-class sentiment vocabularies
/// (shared and per-domain) mixed with neutral filler. `overlap` is the chance
/// that a sentiment token comes from the opposite class's vocabulary.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::vector<SynthDomain> domains;
  std::size_t sentiment_vocab = 40;  // generated terms per class, besides lexicon words
  std::size_t neutral_vocab = 400;
  std::size_t domain_vocab = 60;
  double overlap = 0.1;
  double sentiment_rate = 0.3;        // body tokens that carry sentiment
  double title_sentiment_rate = 0.6;  // title tokens that carry sentiment
  double domain_share = 0.5;          // sentiment tokens drawn from the domain's own vocabulary
  std::size_t title_tokens = 3;
  std::size_t body_tokens = 40;

  /// Throws std::invalid_argument on a zero count, a bad fraction or no domains.
  void validate() const;
};

/// Parses the JSON form used by `sentssl synth --spec`. Throws ConfigError.
SynthSpec parse_synth_spec(std::string_view json_text);

/// Deterministic in the spec. Ids run 1..N across domains in spec order.
std::vector<Review> synth_corpus(const SynthSpec& spec);

/// One JSON object per review with keys domain, id, stars, text, title.
void write_corpus_jsonl(std::span<const Review> reviews, std::ostream& out);

// ---------------------------------------------------------------------------
// Two-dimensional numeric fixtures
// ---------------------------------------------------------------------------

using Point2 = std::array<double, 2>;

/// Isotropic Gaussians at +mean (positive) and -mean (negative).
struct GaussianDomainSpec {
  std::string name = "gauss";
  Point2 mean = {1.0, 0.5};
  double stddev = 1.0;
};

/// n examples with round(n * positive_fraction) positives, ids from
/// first_id upward, class order shuffled.
std::vector<LabeledExample> gaussian_examples(const GaussianDomainSpec& domain, std::size_t n,
                                              double positive_fraction, ReviewId first_id,
                                              SplitMix64& rng);

/// Points uniform in the unit disk, labelled by sign(u . x) with u = (0.6, 0.8)
/// and rejected when |u . x| < margin. Radius <= 1, margin >= `margin`.
std::vector<LabeledExample> separable_examples(std::size_t n, double margin, ReviewId first_id,
                                               SplitMix64& rng);

struct FixtureSpec {
  enum class Kind { two_gaussians, separable };
  Kind kind = Kind::two_gaussians;
  std::size_t seed_size = 100;
  std::size_t pool_size = 10000;
  std::size_t test_size = 2000;
  double positive_fraction = 0.5;  // pool only; seed and test are balanced
  GaussianDomainSpec gaussian;     // two_gaussians
  double margin = 0.1;             // separable
};

/// Train / pool / test split over a 2-D fixture, with pool gold labels
/// hidden. Deterministic in `seed`.
DatasetSplit fixture_split(const FixtureSpec& spec, std::uint64_t seed);

}  // namespace sentssl
