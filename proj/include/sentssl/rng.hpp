#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace sentssl {

/// SplitMix64 generator. Every seeded decision in the library goes through
/// this type so that splits, shuffles and selections are bit-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; consumes two draws per call.
  double normal() noexcept {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates, descending: for i = n-1..1, j = next() % (i+1), swap(i, j).
/// The modulo reduction is part of the reproducibility contract.
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
    using std::swap;
    swap(items[i], items[j]);
  }
}

/// Indices 0..n-1 permuted by Fisher-Yates under `rng`.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, SplitMix64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  return order;
}

/// Derive an independent stream seed from a base seed and a salt.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  SplitMix64 rng(base ^ salt);
  return rng.next();
}

}  // namespace sentssl
