#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sentssl/sparse_vector.hpp"

namespace sentssl {

using ReviewId = std::uint64_t;

/// One raw review record as it appears in an input corpus.
struct Review {
  ReviewId id = 0;
  std::string domain;
  int stars = 0;  // 1..5
  std::string title;
  std::string body;

  friend bool operator==(const Review&, const Review&) = default;
};

enum class Polarity : std::int8_t { negative = -1, positive = 1 };

constexpr double sign_value(Polarity p) noexcept { return p == Polarity::positive ? 1.0 : -1.0; }

constexpr Polarity flipped(Polarity p) noexcept {
  return p == Polarity::positive ? Polarity::negative : Polarity::positive;
}

// Ties go to the positive class everywhere (evaluation and pseudo-labelling).
constexpr Polarity polarity_of(double margin) noexcept {
  return margin >= 0.0 ? Polarity::positive : Polarity::negative;
}

/// How a label came to be. Fixed once the example is created.
enum class Provenance : std::uint8_t { gold, pseudo, weak, noisy };

std::string_view to_string(Provenance p) noexcept;

struct LabeledExample {
  ReviewId review_id = 0;
  std::string domain;
  SparseVector features;
  Polarity label = Polarity::positive;
  Provenance provenance = Provenance::gold;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// An unlabeled pool member. Its gold label is kept out of this struct on
/// purpose; see HiddenLabels in corpus.hpp.
struct PoolEntry {
  ReviewId id = 0;
  std::string domain;
  SparseVector features;

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

}  // namespace sentssl
