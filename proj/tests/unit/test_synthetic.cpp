#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sentssl/corpus.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/learners.hpp"
#include "sentssl/synthetic.hpp"

using namespace sentssl;
using namespace sentssl::testing;

namespace {

SynthSpec two_domains(std::size_t per_domain) {
  SynthSpec s;
  s.seed = 7;
  s.domains = {{"books", per_domain, 0.5, 0.0}, {"music", per_domain, 0.7, 0.1}};
  return s;
}

std::string to_jsonl(const std::vector<Review>& reviews) {
  std::ostringstream out;
  write_corpus_jsonl(reviews, out);
  return out.str();
}

}  // namespace

TEST_CASE("synth_corpus writes ingestible JSONL") {
  const auto reviews = synth_corpus(two_domains(100));
  REQUIRE(reviews.size() == 200);
  std::istringstream in(to_jsonl(reviews));
  const auto parsed = ingest(in, {std::nullopt, true});
  CHECK(parsed.skipped == 0);
  CHECK(parsed.reviews.size() == 200);
  CHECK(parsed.reviews.front().id == 1);
  CHECK(parsed.reviews.back().id == 200);

  std::size_t neutral = 0, music_pos = 0;
  for (const auto& r : reviews) {
    if (r.domain == "music" && r.stars == 3) ++neutral;
    if (r.domain == "music" && r.stars >= 4) ++music_pos;
  }
  CHECK(neutral == 10);
  CHECK(music_pos == 63);
}

TEST_CASE("synth_corpus is byte-identical for a fixed seed") {
  CHECK(to_jsonl(synth_corpus(two_domains(50))) == to_jsonl(synth_corpus(two_domains(50))));
  auto other = two_domains(50);
  other.seed = 8;
  CHECK(to_jsonl(synth_corpus(other)) != to_jsonl(synth_corpus(two_domains(50))));
}

TEST_CASE("synthetic classes are learnable at low overlap") {
  SynthSpec s;
  s.seed = 3;
  s.overlap = 0.1;
  s.domains = {{"books", 2000, 0.5, 0.0}};
  const auto reviews = synth_corpus(s);
  FeatureConfig f;
  f.dims_log2 = 16;
  const auto examples = gold_examples(reviews, f);
  const std::span<const LabeledExample> all(examples);
  const auto learner = train_epochs(LearnerSpec::perceptron(16), all.first(1600), 1, 1);
  CHECK(evaluate(learner, all.subspan(1600)).error_rate < 0.2);
}

TEST_CASE("parse_synth_spec") {
  const auto spec = parse_synth_spec(R"({"seed": 4, "domains": [{"name": "a", "count": 5}]})");
  CHECK(spec.seed == 4);
  REQUIRE(spec.domains.size() == 1);
  CHECK(spec.domains[0].positive_fraction == 0.5);
  CHECK_THROWS_AS(parse_synth_spec(R"({"domains": [{"name": "a", "count": 5}], "overlapp": 0.2})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_synth_spec(R"({"domains": []})"), ConfigError);
  CHECK_THROWS_AS(parse_synth_spec("[1, 2"), ConfigError);
}

TEST_CASE("2-D fixtures") {
  SplitMix64 rng(1);
  const auto sep = separable_examples(500, 0.1, 1, rng);
  for (const auto& e : sep) {
    const double x0 = e.features.values()[0], x1 = e.features.values()[1];
    CHECK(x0 * x0 + x1 * x1 <= 1.0);
    CHECK(sign_value(e.label) * (0.6 * x0 + 0.8 * x1) >= 0.1);
  }

  const auto g = gaussian_examples({}, 101, 0.85, 10, rng);
  std::size_t pos = 0;
  for (const auto& e : g) pos += e.label == Polarity::positive;
  CHECK(pos == 86);
  CHECK(g.front().review_id == 10);

  FixtureSpec fs;
  fs.pool_size = 300;
  fs.test_size = 50;
  const auto split = fixture_split(fs, 9);
  CHECK(split.train.size() == 100);
  CHECK(split.pool.size() == 300);
  CHECK(split.pool_gold.size() == 300);
  CHECK(split.test.size() == 50);
  CHECK(split == fixture_split(fs, 9));
}
