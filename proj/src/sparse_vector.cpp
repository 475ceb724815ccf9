#include "sentssl/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sentssl {

SparseVector::SparseVector(std::vector<std::uint32_t> indices, std::vector<double> values)
    : indices_(std::move(indices)), values_(std::move(values)) {
  if (indices_.size() != values_.size())
    throw std::invalid_argument("SparseVector: indices and values differ in length");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw std::invalid_argument("SparseVector: indices must be strictly increasing");
    if (!std::isfinite(values_[i]) || values_[i] == 0.0)
      throw std::invalid_argument("SparseVector: values must be finite and nonzero");
  }
}

SparseVector SparseVector::from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  idx.reserve(pairs.size());
  val.reserve(pairs.size());
  for (const auto& [i, v] : pairs) {
    if (!idx.empty() && idx.back() == i) {
      val.back() += v;
    } else {
      idx.push_back(i);
      val.push_back(v);
    }
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (val[i] == 0.0) continue;
    idx[out] = idx[i];
    val[out] = val[i];
    ++out;
  }
  idx.resize(out);
  val.resize(out);
  return SparseVector(std::move(idx), std::move(val));
}

double SparseVector::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double SparseVector::norm() const noexcept { return std::sqrt(squared_norm()); }

SparseVector SparseVector::scaled(double factor) const {
  std::vector<double> vals(values_);
  for (double& v : vals) v *= factor;
  return SparseVector(indices_, std::move(vals));
}

}  // namespace sentssl
