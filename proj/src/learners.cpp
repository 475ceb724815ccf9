#include "sentssl/learners.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sentssl/errors.hpp"
#include "sentssl/rng.hpp"

namespace sentssl {

ArowState::ArowState(std::size_t dimension, double r_)
    : mean(dimension, 0.0), variance(dimension, 1.0), r(r_) {}

double dot(std::span<const double> weights, const SparseVector& x) {
  const auto idx = x.indices();
  const auto val = x.values();
  if (!idx.empty() && idx.back() >= weights.size())
    throw std::out_of_range("feature index " + std::to_string(idx.back()) +
                            " outside dimension " + std::to_string(weights.size()));
  double m = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) m += weights[idx[i]] * val[i];
  return m;
}

double score(const LinearModel& model, const SparseVector& x) { return dot(model.weights, x); }

double score(const ArowState& state, const SparseVector& x) { return dot(state.mean, x); }

bool perceptron_update(LinearModel& model, const SparseVector& x, Polarity y) {
  const double ys = sign_value(y);
  if (ys * score(model, x) > 0.0) return false;
  const auto idx = x.indices();
  const auto val = x.values();
  for (std::size_t i = 0; i < idx.size(); ++i) model.weights[idx[i]] += ys * val[i];
  return true;
}

bool arow_update(ArowState& state, const SparseVector& x, Polarity y) {
  const double ys = sign_value(y);
  const double m = score(state, x);
  if (ys * m >= 1.0) return false;

  const auto idx = x.indices();
  const auto val = x.values();
  double v = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) v += state.variance[idx[i]] * val[i] * val[i];
  const double beta = 1.0 / (v + state.r);
  const double alpha = std::max(0.0, 1.0 - ys * m) * beta;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double& sigma = state.variance[idx[i]];
    const double sx = sigma * val[i];
    state.mean[idx[i]] += alpha * ys * sx;
    sigma -= beta * sx * sx;
  }
  return true;
}

std::string_view to_string(LearnerKind kind) noexcept {
  return kind == LearnerKind::arow ? "arow" : "perceptron";
}

void LearnerSpec::validate() const {
  if (dims_log2 < 1 || dims_log2 > 30)
    throw std::invalid_argument("LearnerSpec: dims_log2 must be in [1, 30]");
  if (kind == LearnerKind::arow && !(r > 0.0 && std::isfinite(r)))
    throw std::invalid_argument("LearnerSpec: AROW r must be positive and finite");
}

Learner::Learner(const LearnerSpec& spec) {
  spec.validate();
  if (spec.kind == LearnerKind::arow)
    state_ = ArowState(spec.dimension(), spec.r);
  else
    state_ = LinearModel(spec.dimension());
}

Learner::Learner(LinearModel model) : state_(std::move(model)) {}

Learner::Learner(ArowState state) : state_(std::move(state)) {}

LearnerKind Learner::kind() const noexcept {
  return std::holds_alternative<ArowState>(state_) ? LearnerKind::arow : LearnerKind::perceptron;
}

std::size_t Learner::dimension() const noexcept {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ArowState>)
          return s.mean.size();
        else
          return s.weights.size();
      },
      state_);
}

double Learner::score(const SparseVector& x) const {
  return std::visit([&](const auto& s) { return sentssl::score(s, x); }, state_);
}

bool Learner::update(const SparseVector& x, Polarity y) {
  return std::visit(
      [&](auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ArowState>)
          return arow_update(s, x, y);
        else
          return perceptron_update(s, x, y);
      },
      state_);
}

std::size_t train_epochs(Learner& learner, std::span<const LabeledExample> examples,
                         std::size_t epochs, std::uint64_t seed) {
  if (epochs == 0) throw std::invalid_argument("train_epochs: epochs must be >= 1");
  std::size_t updates = 0;
  for (std::size_t e = 0; e < epochs; ++e) {
    SplitMix64 rng(seed ^ static_cast<std::uint64_t>(e));
    for (std::size_t i : shuffled_indices(examples.size(), rng))
      if (learner.update(examples[i].features, examples[i].label)) ++updates;
  }
  return updates;
}

Learner train_epochs(const LearnerSpec& spec, std::span<const LabeledExample> examples,
                     std::size_t epochs, std::uint64_t seed) {
  Learner learner(spec);
  train_epochs(learner, examples, epochs, seed);
  return learner;
}

EvalReport evaluate(const Learner& learner, std::span<const LabeledExample> test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  EvalReport report;
  for (const auto& ex : test) {
    if (learner.predict(ex.features) == ex.label)
      ++report.n_correct;
    else
      ++report.n_wrong;
  }
  report.error_rate =
      static_cast<double>(report.n_wrong) / static_cast<double>(report.n_correct + report.n_wrong);
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'S', 'L', 'L', 'R', 'N', '\0', '\1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DataError("learner checkpoint truncated");
  return value;
}

void put_vector(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vector(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw DataError("learner checkpoint truncated");
  return v;
}

}  // namespace

void save_learner(const Learner& learner, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint8_t>(out, learner.kind() == LearnerKind::arow ? 1 : 0);
  put<std::uint64_t>(out, learner.dimension());
  if (const auto* arow = std::get_if<ArowState>(&learner.state())) {
    put<double>(out, arow->r);
    put_vector(out, arow->mean);
    put_vector(out, arow->variance);
  } else {
    put<double>(out, 1.0);
    put_vector(out, std::get<LinearModel>(learner.state()).weights);
  }
  if (!out) throw std::runtime_error("failed writing learner checkpoint");
}

Learner load_learner(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || std::memcmp(magic.data(), kMagic.data(), 7) != 0)
    throw DataError("not a learner checkpoint (bad magic)");
  if (magic[7] != kMagic[7])
    throw DataError("unsupported learner checkpoint version " + std::to_string(int(magic[7])));
  const auto kind = get<std::uint8_t>(in);
  const auto dim = get<std::uint64_t>(in);
  const auto r = get<double>(in);
  if (dim == 0 || dim > (std::uint64_t{1} << 30)) throw DataError("bad checkpoint dimension");
  if (kind == 1) {
    ArowState s;
    s.r = r;
    s.mean = get_vector(in, dim);
    s.variance = get_vector(in, dim);
    return Learner(std::move(s));
  }
  if (kind != 0) throw DataError("unknown learner kind in checkpoint");
  LinearModel m;
  m.weights = get_vector(in, dim);
  return Learner(std::move(m));
}

void save_learner(const Learner& learner, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_learner(learner, out);
}

Learner load_learner(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_learner(in);
}

}  // namespace sentssl
