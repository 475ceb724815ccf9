#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sentssl {

/// Sparse real vector over 32-bit feature indices.
///
/// Indices are strictly increasing and every stored value is finite and
/// nonzero. The constructors enforce this; there is no way to build an
/// instance that violates it.
class SparseVector {
 public:
  SparseVector() = default;

  /// Throws std::invalid_argument if the parallel arrays differ in length,
  /// indices are not strictly increasing, or a value is zero or non-finite.
  SparseVector(std::vector<std::uint32_t> indices, std::vector<double> values);

  /// Builds from unsorted (index, value) pairs; duplicate indices are summed
  /// and entries that sum to zero are dropped.
  static SparseVector from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs);

  std::span<const std::uint32_t> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

  double squared_norm() const noexcept;
  double norm() const noexcept;

  /// Returns a copy with every value multiplied by `factor` (must be nonzero, finite).
  SparseVector scaled(double factor) const;

  /// Largest index + 1, or 0 for an empty vector.
  std::size_t min_dimension() const noexcept {
    return indices_.empty() ? 0 : static_cast<std::size_t>(indices_.back()) + 1;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

}  // namespace sentssl
