#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sentssl/ssl_engine.hpp"
#include "sentssl/synthetic.hpp"

using namespace sentssl;
using namespace sentssl::testing;

namespace {

SslConfig small_config(std::size_t k, std::size_t iterations) {
  SslConfig c;
  c.batch_size = k;
  c.max_iterations = iterations;
  c.learner = LearnerSpec::perceptron(1);
  c.master_seed = 3;
  return c;
}

DatasetSplit gaussian_split(std::size_t pool, std::uint64_t seed) {
  FixtureSpec spec;
  spec.pool_size = pool;
  spec.test_size = 500;
  return fixture_split(spec, seed);
}

}  // namespace

TEST_CASE("select: highest margin") {
  const std::vector<ScoredId> scores{{1, 0.9}, {2, -1.5}, {3, 0.1}};
  CHECK(select(scores, SelectionPolicy::highest_margin(), 2, 0) == std::vector<ReviewId>{1, 2});
  CHECK(select(scores, SelectionPolicy::highest_margin(), 0, 0).empty());
  CHECK(select(scores, SelectionPolicy::highest_margin(), 10, 0) == std::vector<ReviewId>{1, 2, 3});

  // Ties on |margin| go to the smaller id; input order is irrelevant.
  const std::vector<ScoredId> ties{{9, -0.5}, {4, 0.5}, {7, 0.5}};
  CHECK(select(ties, SelectionPolicy::highest_margin(), 2, 0) == std::vector<ReviewId>{4, 7});
}

TEST_CASE("select: random is the head of a seeded shuffle") {
  std::vector<ScoredId> scores;
  for (ReviewId i = 0; i < 50; ++i) scores.push_back({i, static_cast<double>(i)});
  const auto policy = SelectionPolicy::random(11);
  const auto picked = select(scores, policy, 5, 2);

  SplitMix64 rng(11 ^ 2);
  auto order = shuffled_indices(50, rng);
  std::vector<ReviewId> expected(order.begin(), order.begin() + 5);
  std::sort(expected.begin(), expected.end());
  CHECK(picked == expected);
  CHECK(select(scores, policy, 5, 2) == picked);
  CHECK(select(scores, policy, 5, 3) != picked);
}

TEST_CASE("select: hybrid switches rule after switch_after iterations") {
  const auto h = SelectionPolicy::hybrid(BasicPolicy::random(1), BasicPolicy::highest_margin(), 3);
  CHECK(h.is_hybrid());
  for (std::size_t it = 0; it < 3; ++it) CHECK(h.active(it).kind == BasicPolicy::Kind::random);
  for (std::size_t it = 3; it < 6; ++it) CHECK(h.active(it).kind == BasicPolicy::Kind::highest_margin);

  std::vector<ScoredId> scores;
  for (ReviewId i = 0; i < 40; ++i) scores.push_back({i, static_cast<double>(i % 7) - 3.0});
  CHECK(select(scores, h, 4, 3) == select(scores, SelectionPolicy::highest_margin(), 4, 3));
  CHECK(select(scores, h, 4, 1) == select(scores, SelectionPolicy::random(1), 4, 1));
  CHECK_THROWS_AS(SelectionPolicy::hybrid(BasicPolicy::random(1), BasicPolicy::highest_margin(), 0),
                  std::invalid_argument);
}

TEST_CASE("pseudo_label") {
  LinearModel m(2);
  m.weights = {1.0, 0.0};
  const Learner l(m);
  auto label_of = [&](double x0) {
    return pseudo_label(l, PoolEntry{1, "d", x0 == 0.0 ? SparseVector{} : vec({{0, x0}})});
  };
  CHECK(label_of(2.3).label == Polarity::positive);
  CHECK(label_of(-0.1).label == Polarity::negative);
  CHECK(label_of(0.0).label == Polarity::positive);
  CHECK(label_of(2.3).provenance == Provenance::pseudo);
}

TEST_CASE("run_ssl: empty pool yields only the baseline") {
  auto split = gaussian_split(0, 1);
  const auto records = run_ssl(split, small_config(10, 1), SelectionPolicy::highest_margin());
  REQUIRE(records.size() == 1);
  CHECK(records[0].iteration == 0);
  CHECK(records[0].train_size == 100);
  CHECK_FALSE(records[0].pseudo_label_accuracy.has_value());
}

TEST_CASE("run_ssl: train grows by k per iteration and examples are conserved") {
  const auto split = gaussian_split(1000, 2);
  const auto records = run_ssl(split, small_config(10, 5), SelectionPolicy::highest_margin());
  REQUIRE(records.size() == 6);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].iteration == i);
    CHECK(records[i].train_size == 100 + 10 * i);
    CHECK(records[i].train_size + records[i].pool_remaining == 1100);
    if (i > 0) {
      REQUIRE(records[i].pseudo_label_accuracy.has_value());
      CHECK(*records[i].pseudo_label_accuracy >= 0.0);
      CHECK(*records[i].pseudo_label_accuracy <= 1.0);
      CHECK(records[i].selected_per_domain.at("gauss") == 10);
    }
  }
}

TEST_CASE("run_ssl: last batch may be short, loop stops when the pool empties") {
  const auto split = gaussian_split(25, 3);
  const auto records = run_ssl(split, small_config(10, 10), SelectionPolicy::random(5));
  REQUIRE(records.size() == 4);
  CHECK(records.back().pool_remaining == 0);
  CHECK(records.back().train_size == 125);
}

TEST_CASE("run_ssl: deterministic, and the baseline ignores the policy") {
  const auto split = gaussian_split(500, 4);
  const auto cfg = small_config(50, 4);
  const auto a = run_ssl(split, cfg, SelectionPolicy::random(9));
  const auto b = run_ssl(split, cfg, SelectionPolicy::random(9));
  CHECK(a == b);
  const auto c = run_ssl(split, cfg, SelectionPolicy::highest_margin());
  CHECK(a[0] == c[0]);

  auto arow = cfg;
  arow.learner = LearnerSpec::arow(1.0, 1);
  arow.retrain_mode = RetrainMode::incremental;
  CHECK(run_ssl(split, arow, SelectionPolicy::highest_margin()) ==
        run_ssl(split, arow, SelectionPolicy::highest_margin()));
}

TEST_CASE("run_ssl: input validation") {
  auto split = gaussian_split(10, 5);
  auto cfg = small_config(5, 2);
  auto no_test = split;
  no_test.test.clear();
  CHECK_THROWS_AS(run_ssl(no_test, cfg, SelectionPolicy::highest_margin()), std::invalid_argument);
  auto no_train = split;
  no_train.train.clear();
  CHECK_THROWS_AS(run_ssl(no_train, cfg, SelectionPolicy::highest_margin()), std::invalid_argument);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(run_ssl(split, cfg, SelectionPolicy::highest_margin()), std::invalid_argument);
}

TEST_CASE("self_train: observer sees each absorbed batch") {
  const auto split = gaussian_split(60, 6);
  std::vector<std::size_t> batch_sizes;
  const auto outcome = self_train(split.train, split.pool, split.test, split.pool_gold,
                                  small_config(20, 5), SelectionPolicy::highest_margin(),
                                  [&](const IterationRecord&, std::span<const PoolEntry> sel) {
                                    batch_sizes.push_back(sel.size());
                                  });
  CHECK(batch_sizes == std::vector<std::size_t>{0, 20, 20, 20});
  CHECK(outcome.records.size() == 4);
}

TEST_CASE("run_noise_experiment") {
  const auto split = gaussian_split(200, 7);
  const auto cfg = small_config(50, 2);
  const std::vector<double> zero{0.0};
  const auto curves = run_noise_experiment(split, cfg, SelectionPolicy::highest_margin(), zero);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].records == run_ssl(split, cfg, SelectionPolicy::highest_margin()));

  // Half the labels flipped: labels carry no signal, so a single run lands
  // anywhere, but the error averaged over noise draws sits near chance.
  FixtureSpec big;
  big.seed_size = 2000;
  big.pool_size = 0;
  big.test_size = 2000;
  const auto wide = fixture_split(big, 8);
  const std::vector<double> half{0.5};
  double total = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto seeded = cfg;
    seeded.master_seed = s;
    total += run_noise_experiment(wide, seeded, SelectionPolicy::highest_margin(), half)[0]
                 .records[0]
                 .test_error;
  }
  CHECK(total / 20.0 >= 0.4);
  CHECK(total / 20.0 <= 0.6);
  CHECK(noise_seed(1, 0) != noise_seed(1, 1));
}

TEST_CASE("write_records_csv") {
  IterationRecord base{0, 100, 20, 0.25, std::nullopt, {{"b", 0}, {"a", 0}}};
  IterationRecord next{1, 110, 10, 0.5, 0.9, {{"a", 4}, {"b", 6}}};
  std::ostringstream out;
  const std::vector<IterationRecord> records{base, next};
  write_records_csv(records, out);
  CHECK(out.str() ==
        "iteration,train_size,pool_remaining,test_error,pseudo_label_accuracy,sel_a,sel_b\n"
        "0,100,20,0.25,,0,0\n"
        "1,110,10,0.5,0.9,4,6\n");
}
