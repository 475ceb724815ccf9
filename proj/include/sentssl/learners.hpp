#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sentssl/sparse_vector.hpp"
#include "sentssl/types.hpp"

namespace sentssl {

/// Plain weight vector (Perceptron).
struct LinearModel {
  std::vector<double> weights;

  LinearModel() = default;
  explicit LinearModel(std::size_t dimension) : weights(dimension, 0.0) {}

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Diagonal AROW: mean vector, per-feature variance, regularizer r.
struct ArowState {
  std::vector<double> mean;
  std::vector<double> variance;
  double r = 1.0;

  ArowState() = default;
  ArowState(std::size_t dimension, double r);

  friend bool operator==(const ArowState&, const ArowState&) = default;
};

/// Sparse dot product. Throws std::out_of_range for an index past `weights`.
double dot(std::span<const double> weights, const SparseVector& x);

double score(const LinearModel& model, const SparseVector& x);
double score(const ArowState& state, const SparseVector& x);

/// Mistake-driven update: if y * (w . x) <= 0, w += y * x. Returns whether w changed.
bool perceptron_update(LinearModel& model, const SparseVector& x, Polarity y);

/// Squared-hinge diagonal AROW update, applied when y * (mu . x) < 1.
bool arow_update(ArowState& state, const SparseVector& x, Polarity y);

enum class LearnerKind { perceptron, arow };

std::string_view to_string(LearnerKind kind) noexcept;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::perceptron;
  double r = 1.0;     // AROW only
  int dims_log2 = 20;  // weight vector length is 2^dims_log2

  static LearnerSpec perceptron(int dims_log2 = 20) { return {LearnerKind::perceptron, 1.0, dims_log2}; }
  static LearnerSpec arow(double r = 1.0, int dims_log2 = 20) { return {LearnerKind::arow, r, dims_log2}; }

  /// dims_log2 in [1, 30]; r > 0 and finite.
  void validate() const;
  std::size_t dimension() const noexcept { return std::size_t{1} << dims_log2; }
};

/// Either learner behind one interface. Scoring is const and never mutates.
class Learner {
 public:
  explicit Learner(const LearnerSpec& spec);
  explicit Learner(LinearModel model);
  explicit Learner(ArowState state);

  LearnerKind kind() const noexcept;
  std::size_t dimension() const noexcept;
  double score(const SparseVector& x) const;
  Polarity predict(const SparseVector& x) const { return polarity_of(score(x)); }
  bool update(const SparseVector& x, Polarity y);

  const std::variant<LinearModel, ArowState>& state() const noexcept { return state_; }

  friend bool operator==(const Learner&, const Learner&) = default;

 private:
  std::variant<LinearModel, ArowState> state_;
};

/// Runs `epochs` passes; pass e visits the examples in the order given by a
/// Fisher-Yates shuffle under SplitMix64(seed ^ e). Returns the number of
/// updates made.
std::size_t train_epochs(Learner& learner, std::span<const LabeledExample> examples,
                         std::size_t epochs, std::uint64_t seed);

/// Fresh learner from `spec`, trained as above.
Learner train_epochs(const LearnerSpec& spec, std::span<const LabeledExample> examples,
                     std::size_t epochs, std::uint64_t seed);

struct EvalReport {
  double error_rate = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_wrong = 0;
};

/// Error rate of sign(score) with sign(0) = +1. Throws std::invalid_argument
/// on an empty test set.
EvalReport evaluate(const Learner& learner, std::span<const LabeledExample> test);

// Checkpoint format (little-endian):
//   8 bytes   magic "SSLLRN\0\1" (last byte = format version)
//   u8        kind (0 perceptron, 1 arow)
//   u64       dimension
//   f64       r (written for both kinds)
//   f64[dim]  weights, or mean then variance for AROW
void save_learner(const Learner& learner, std::ostream& out);
Learner load_learner(std::istream& in);
void save_learner(const Learner& learner, const std::filesystem::path& path);
Learner load_learner(const std::filesystem::path& path);

}  // namespace sentssl
