#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sentssl/sparse_vector.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// FNV-1a, 64-bit, over the raw bytes of `bytes`.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

struct FeatureConfig {
  int dims_log2 = 20;
  bool use_bigrams = true;
  bool normalize = true;
  bool use_title = true;
  bool use_body = true;

  /// Throws std::invalid_argument unless 8 <= dims_log2 <= 30.
  void validate() const;
  std::uint64_t dimension() const noexcept { return std::uint64_t{1} << dims_log2; }
};

/// Lowercases (simple case folding) and splits on every code point that is
/// not a letter or digit. Empty tokens are dropped. Invalid UTF-8 bytes act
/// as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Feature index of a namespaced term such as "t:good" or "b2:not_bad".
std::uint32_t hash_term(std::string_view term, int dims_log2) noexcept;

struct HashedTerm {
  std::string term;
  std::uint32_t index = 0;
  double count = 0.0;
};

/// Distinct namespaced terms of a review with their hashed index and raw
/// count, in first-occurrence order. Used for hash audits.
std::vector<HashedTerm> featurize_terms(const Review& review, const FeatureConfig& config);

/// Hashed unigram (+ bigram) counts over the selected fields, optionally L2
/// normalized. Colliding terms sum.
SparseVector featurize(const Review& review, const FeatureConfig& config);

}  // namespace sentssl
