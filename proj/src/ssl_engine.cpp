#include "sentssl/ssl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include "sentssl/csv.hpp"
#include "sentssl/rng.hpp"

namespace sentssl {
namespace {

constexpr std::uint64_t kTrainSalt = 0x747261696e5f7365ULL;  // "train_se"
constexpr std::uint64_t kNoiseRunSalt = 0x6e6f6973655f7275ULL;  // "noise_ru"

std::string describe(const BasicPolicy& p) {
  if (p.kind == BasicPolicy::Kind::random) return "random(" + std::to_string(p.seed) + ")";
  return "highest_margin";
}

}  // namespace

SelectionPolicy SelectionPolicy::random(std::uint64_t seed) {
  return SelectionPolicy(BasicPolicy::random(seed));
}

SelectionPolicy SelectionPolicy::highest_margin() {
  return SelectionPolicy(BasicPolicy::highest_margin());
}

SelectionPolicy SelectionPolicy::hybrid(BasicPolicy first, BasicPolicy second,
                                        std::size_t switch_after) {
  if (switch_after == 0) throw std::invalid_argument("hybrid policy: switch_after must be >= 1");
  SelectionPolicy p(first);
  p.second_ = second;
  p.switch_after_ = switch_after;
  return p;
}

const BasicPolicy& SelectionPolicy::active(std::size_t iteration) const noexcept {
  if (second_ && iteration >= switch_after_) return *second_;
  return first_;
}

std::string SelectionPolicy::describe() const {
  if (!second_) return sentssl::describe(first_);
  return "hybrid(" + sentssl::describe(first_) + ", " + sentssl::describe(*second_) + ", " +
         std::to_string(switch_after_) + ")";
}

std::vector<ReviewId> select(std::span<const ScoredId> scores, const SelectionPolicy& policy,
                             std::size_t k, std::size_t iteration) {
  std::vector<ScoredId> pool(scores.begin(), scores.end());
  std::sort(pool.begin(), pool.end(),
            [](const ScoredId& a, const ScoredId& b) { return a.id < b.id; });
  const std::size_t take = std::min(k, pool.size());

  std::vector<ReviewId> chosen;
  chosen.reserve(take);
  const BasicPolicy& rule = policy.active(iteration);
  if (rule.kind == BasicPolicy::Kind::random) {
    SplitMix64 rng(rule.seed ^ static_cast<std::uint64_t>(iteration));
    const auto order = shuffled_indices(pool.size(), rng);
    for (std::size_t i = 0; i < take; ++i) chosen.push_back(pool[order[i]].id);
  } else {
    auto more_confident = [](const ScoredId& a, const ScoredId& b) {
      const double ma = std::abs(a.margin);
      const double mb = std::abs(b.margin);
      if (ma != mb) return ma > mb;
      return a.id < b.id;
    };
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(),
                      more_confident);
    for (std::size_t i = 0; i < take; ++i) chosen.push_back(pool[i].id);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

LabeledExample pseudo_label(const Learner& learner, const PoolEntry& entry) {
  return {entry.id, entry.domain, entry.features, learner.predict(entry.features),
          Provenance::pseudo};
}

void SslConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("SslConfig: batch_size must be >= 1");
  if (max_iterations == 0) throw std::invalid_argument("SslConfig: max_iterations must be >= 1");
  if (epochs_per_iteration == 0)
    throw std::invalid_argument("SslConfig: epochs_per_iteration must be >= 1");
  learner.validate();
}

SslOutcome self_train(std::vector<LabeledExample> train, std::vector<PoolEntry> pool,
                      std::span<const LabeledExample> test, const HiddenLabels& gold,
                      const SslConfig& config, const SelectionPolicy& policy,
                      const IterationObserver& observer) {
  config.validate();
  if (test.empty()) throw std::invalid_argument("self_train: test set is empty");

  std::stable_sort(pool.begin(), pool.end(),
                   [](const PoolEntry& a, const PoolEntry& b) { return a.id < b.id; });
  std::set<std::string> domains;
  for (const auto& e : pool) domains.insert(e.domain);

  const std::uint64_t train_seed = training_seed(config.master_seed);
  Learner learner = train_epochs(config.learner, train, config.epochs_per_iteration, train_seed);

  auto make_record = [&](std::size_t iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.train_size = train.size();
    rec.pool_remaining = pool.size();
    rec.test_error = evaluate(learner, test).error_rate;
    for (const auto& d : domains) rec.selected_per_domain[d] = 0;
    return rec;
  };

  SslOutcome out{{}, learner};
  out.records.push_back(make_record(0));
  if (observer) observer(out.records.back(), {});

  std::vector<ScoredId> scores;
  for (std::size_t it = 1; it <= config.max_iterations && !pool.empty(); ++it) {
    // The pool is held in ascending-id order, so scores arrive pre-sorted.
    scores.clear();
    scores.reserve(pool.size());
    for (const auto& e : pool) scores.push_back({e.id, learner.score(e.features)});
    const auto ids = select(scores, policy, config.batch_size, it - 1);

    std::vector<PoolEntry> selected, remaining;
    selected.reserve(ids.size());
    remaining.reserve(pool.size() - ids.size());
    auto next = ids.begin();
    for (auto& e : pool) {
      if (next != ids.end() && *next == e.id) {
        selected.push_back(std::move(e));
        ++next;
      } else {
        remaining.push_back(std::move(e));
      }
    }
    pool = std::move(remaining);

    std::vector<LabeledExample> absorbed;
    absorbed.reserve(selected.size());
    std::size_t audited = 0, agree = 0;
    for (const auto& e : selected) {
      absorbed.push_back(pseudo_label(learner, e));
      if (const auto truth = gold.audit(e.id)) {
        ++audited;
        if (*truth == absorbed.back().label) ++agree;
      }
    }
    train.insert(train.end(), absorbed.begin(), absorbed.end());

    if (config.retrain_mode == RetrainMode::from_scratch) {
      learner = train_epochs(config.learner, train, config.epochs_per_iteration, train_seed);
    } else {
      train_epochs(learner, absorbed, config.epochs_per_iteration, derive_seed(train_seed, it));
    }

    IterationRecord rec = make_record(it);
    if (audited > 0)
      rec.pseudo_label_accuracy = static_cast<double>(agree) / static_cast<double>(audited);
    for (const auto& e : selected) ++rec.selected_per_domain[e.domain];
    out.records.push_back(std::move(rec));
    if (observer) observer(out.records.back(), selected);
  }
  out.learner = std::move(learner);
  return out;
}

std::vector<IterationRecord> run_ssl(const DatasetSplit& split, const SslConfig& config,
                                     const SelectionPolicy& policy) {
  if (split.train.empty()) throw std::invalid_argument("run_ssl: split has no train examples");
  if (split.test.empty()) throw std::invalid_argument("run_ssl: split has no test examples");
  return self_train(split.train, split.pool, split.test, split.pool_gold, config, policy).records;
}

std::uint64_t training_seed(std::uint64_t master_seed) noexcept {
  return derive_seed(master_seed, kTrainSalt);
}

std::uint64_t noise_seed(std::uint64_t master_seed, std::size_t rate_index) noexcept {
  return derive_seed(master_seed ^ kNoiseRunSalt, static_cast<std::uint64_t>(rate_index));
}

std::vector<NoiseCurve> run_noise_experiment(const DatasetSplit& split, const SslConfig& config,
                                             const SelectionPolicy& policy,
                                             std::span<const double> rates) {
  config.validate();
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("noise rate must be in [0, 1]");
  std::vector<NoiseCurve> curves;
  curves.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    DatasetSplit noisy = split;
    noisy.train = inject_label_noise(split.train, rates[i], noise_seed(config.master_seed, i));
    curves.push_back({rates[i], run_ssl(noisy, config, policy)});
  }
  return curves;
}

void write_records_csv(std::span<const IterationRecord> records, std::ostream& out) {
  std::set<std::string> domains;
  for (const auto& r : records)
    for (const auto& [d, n] : r.selected_per_domain) domains.insert(d);

  out << "iteration,train_size,pool_remaining,test_error,pseudo_label_accuracy";
  for (const auto& d : domains) out << ",sel_" << d;
  out << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.train_size << ',' << r.pool_remaining << ','
        << format_double(r.test_error) << ',';
    if (r.pseudo_label_accuracy) out << format_double(*r.pseudo_label_accuracy);
    for (const auto& d : domains) {
      auto it = r.selected_per_domain.find(d);
      out << ',' << (it == r.selected_per_domain.end() ? 0 : it->second);
    }
    out << '\n';
  }
}

}  // namespace sentssl
