#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sentssl/domain_adapt.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/synthetic.hpp"

using namespace sentssl;
using namespace sentssl::testing;

namespace {

const GaussianDomainSpec kSource{"source", {1.0, 0.5}, 1.0};
const GaussianDomainSpec kNear{"near", {1.0, 0.6}, 1.0};
const GaussianDomainSpec kFar{"far", {-0.5, 1.0}, 1.0};

struct Pool {
  std::vector<PoolEntry> entries;
  HiddenLabels gold;
};

Pool as_pool(const std::vector<LabeledExample>& examples) {
  Pool p;
  for (const auto& e : examples) {
    p.entries.push_back({e.review_id, e.domain, e.features});
    p.gold.insert(e.review_id, e.label);
  }
  return p;
}

SslConfig da_config(std::size_t k, std::size_t iterations) {
  SslConfig c;
  c.batch_size = k;
  c.max_iterations = iterations;
  c.learner = LearnerSpec::perceptron(1);
  c.master_seed = 21;
  return c;
}

}  // namespace

TEST_CASE("run_da_pair: source-only baseline is a plain train and evaluate") {
  SplitMix64 rng(1);
  const auto source = gaussian_examples(kSource, 200, 0.5, 1, rng);
  const auto target_test = gaussian_examples(kFar, 300, 0.5, 1000, rng);
  const Pool pool;
  const auto cfg = da_config(10, 1);
  const auto records = run_da_pair(source, pool.entries, pool.gold, target_test, std::nullopt,
                                   DaSetting::source_only, cfg, SelectionPolicy::highest_margin());
  REQUIRE(records.size() == 1);

  const auto reference = train_epochs(cfg.learner, source, 1, training_seed(cfg.master_seed));
  CHECK(records[0].test_error == evaluate(reference, target_test).error_rate);
  CHECK(records[0].train_size == 200);
}

TEST_CASE("run_da_pair: mixed_train needs target labels") {
  SplitMix64 rng(2);
  const auto source = gaussian_examples(kSource, 20, 0.5, 1, rng);
  const auto test = gaussian_examples(kFar, 20, 0.5, 100, rng);
  CHECK_THROWS_AS(run_da_pair(source, {}, HiddenLabels{}, test, std::nullopt,
                              DaSetting::mixed_train, da_config(5, 1),
                              SelectionPolicy::highest_margin()),
                  std::invalid_argument);
  const std::vector<LabeledExample> none;
  CHECK_THROWS_AS(run_da_pair(source, {}, HiddenLabels{}, test, std::span<const LabeledExample>(none),
                              DaSetting::mixed_train, da_config(5, 1),
                              SelectionPolicy::highest_margin()),
                  std::invalid_argument);
}

TEST_CASE("run_da_pair: target labels help under a shifted target") {
  int mixed_wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SplitMix64 rng(100 + seed);
    const auto source = gaussian_examples(kSource, 100, 0.5, 1, rng);
    const auto target_train = gaussian_examples(kFar, 100, 0.5, 1000, rng);
    const auto target_test = gaussian_examples(kFar, 1000, 0.5, 2000, rng);
    const auto pool = as_pool(gaussian_examples(kFar, 200, 0.5, 5000, rng));
    const auto cfg = da_config(50, 1);
    const auto only = run_da_pair(source, pool.entries, pool.gold, target_test, target_train,
                                  DaSetting::source_only, cfg, SelectionPolicy::highest_margin());
    const auto mixed = run_da_pair(source, pool.entries, pool.gold, target_test, target_train,
                                   DaSetting::mixed_train, cfg, SelectionPolicy::highest_margin());
    CHECK(mixed[0].train_size == 200);
    if (mixed[0].test_error <= only[0].test_error) ++mixed_wins;
  }
  CHECK(mixed_wins >= 4);
}

TEST_CASE("run_da_one_to_many: usage bookkeeping") {
  SplitMix64 rng(3);
  const auto source = gaussian_examples({"industrial", {1.0, 0.5}, 1.0}, 100, 0.5, 1, rng);
  auto pool_examples = gaussian_examples(kNear, 100, 0.5, 1000, rng);
  const auto far = gaussian_examples(kFar, 100, 0.5, 2000, rng);
  pool_examples.insert(pool_examples.end(), far.begin(), far.end());
  const auto pool = as_pool(pool_examples);
  std::map<std::string, std::vector<LabeledExample>> tests;
  tests["near"] = gaussian_examples(kNear, 100, 0.5, 5000, rng);
  tests["far"] = gaussian_examples(kFar, 100, 0.5, 6000, rng);

  const auto result = run_da_one_to_many(source, pool.entries, pool.gold, tests, da_config(10, 3),
                                         SelectionPolicy::highest_margin());
  REQUIRE(result.records.size() == 4);
  REQUIRE(result.usage.size() == 3);
  CHECK(result.usage[0].domain == "far");
  CHECK(result.usage[1].domain == "industrial");
  CHECK(result.usage[2].domain == "near");
  for (const auto& u : result.usage) {
    REQUIRE(u.used_at.size() == 4);
    if (u.domain == "industrial") {
      CHECK(u.percentage(0) == 1.0);
    } else {
      CHECK(u.percentage(0) == 0.0);
      CHECK(u.available == 100);
    }
  }
  const auto& near = result.usage[2];
  const auto& far_curve = result.usage[0];
  CHECK(near.used_at[3] + far_curve.used_at[3] == 30);
  // The near domain's margins are larger under a source-trained model.
  CHECK(near.percentage(3) > far_curve.percentage(3));
}

TEST_CASE("run_da_one_to_many: input errors") {
  SplitMix64 rng(4);
  const auto source = gaussian_examples({"industrial", {1.0, 0.5}, 1.0}, 20, 0.5, 1, rng);
  std::map<std::string, std::vector<LabeledExample>> tests;
  tests["near"] = gaussian_examples(kNear, 10, 0.5, 100, rng);
  const auto leaked = as_pool(gaussian_examples({"industrial", {1.0, 0.5}, 1.0}, 10, 0.5, 200, rng));
  CHECK_THROWS_AS(run_da_one_to_many(source, leaked.entries, leaked.gold, tests, da_config(5, 1),
                                     SelectionPolicy::highest_margin()),
                  DataError);
  auto mixed_source = source;
  mixed_source.back().domain = "other";
  CHECK_THROWS_AS(run_da_one_to_many(mixed_source, {}, HiddenLabels{}, tests, da_config(5, 1),
                                     SelectionPolicy::highest_margin()),
                  DataError);
}

TEST_CASE("UsageCurve::percentage") {
  const UsageCurve c{"x", 100, {0, 10}};
  CHECK(c.percentage(0) == 0.0);
  CHECK(c.percentage(1) == 0.1);
  CHECK(UsageCurve{"y", 0, {0}}.percentage(0) == 0.0);
}

TEST_CASE("usage_report") {
  std::vector<UsageCurve> curves;
  for (std::size_t i = 0; i < 33; ++i) curves.push_back({"d" + std::to_string(i), 10 + i, {0}});
  const auto report = usage_report(curves, 5, 5);
  REQUIRE(report.size() == 10);
  CHECK(report[0].domain == "d32");
  CHECK(report[4].domain == "d28");
  CHECK(report[5].domain == "d4");
  CHECK(report[9].domain == "d0");

  const std::vector<UsageCurve> ten(curves.begin(), curves.begin() + 10);
  CHECK(usage_report(ten, 5, 5).size() == 10);
  const auto bottom = usage_report(ten, 0, 1);
  REQUIRE(bottom.size() == 1);
  CHECK(bottom[0].domain == "d0");
  CHECK_THROWS_AS(usage_report(ten, 6, 5), std::invalid_argument);
}

TEST_CASE("write_usage_csv") {
  const std::vector<UsageCurve> curves{{"a", 4, {0, 1}}, {"b", 2, {2, 2}}};
  std::ostringstream out;
  write_usage_csv(curves, out);
  CHECK(out.str() ==
        "iteration,domain,available,used,pct\n"
        "0,a,4,0,0\n0,b,2,2,1\n1,a,4,1,0.25\n1,b,2,2,1\n");
}
