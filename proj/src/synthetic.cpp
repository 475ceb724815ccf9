#include "sentssl/synthetic.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "json_keys.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/weak_labels.hpp"

namespace sentssl {
namespace {

using nlohmann::json;

bool is_fraction(double f) { return f >= 0.0 && f <= 1.0; }

struct Vocabulary {
  std::vector<std::string> positive, negative, neutral;
  std::vector<std::vector<std::string>> domain_positive, domain_negative, domain_neutral;
};

Vocabulary build_vocabulary(const SynthSpec& spec) {
  Vocabulary v;
  const Lexicon lex = default_lexicon();
  v.positive.assign(lex.positive.begin(), lex.positive.end());
  v.negative.assign(lex.negative.begin(), lex.negative.end());
  for (std::size_t i = 0; i < spec.sentiment_vocab; ++i) {
    v.positive.push_back("pos" + std::to_string(i));
    v.negative.push_back("neg" + std::to_string(i));
  }
  for (std::size_t i = 0; i < spec.neutral_vocab; ++i) v.neutral.push_back("w" + std::to_string(i));
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    const std::string prefix = "d" + std::to_string(d);
    auto& dp = v.domain_positive.emplace_back();
    auto& dn = v.domain_negative.emplace_back();
    auto& dw = v.domain_neutral.emplace_back();
    for (std::size_t i = 0; i < spec.domain_vocab; ++i) {
      dp.push_back(prefix + "p" + std::to_string(i));
      dn.push_back(prefix + "n" + std::to_string(i));
      dw.push_back(prefix + "w" + std::to_string(i));
    }
  }
  return v;
}

const std::string& pick(const std::vector<std::string>& words, SplitMix64& rng) {
  return words[static_cast<std::size_t>(rng.next() % words.size())];
}

// class_sign: +1, -1, or 0 for a neutral (3-star) review.
std::string make_text(const SynthSpec& spec, const Vocabulary& vocab, std::size_t domain,
                      int class_sign, std::size_t tokens, double sentiment_rate, SplitMix64& rng) {
  std::string text;
  for (std::size_t t = 0; t < tokens; ++t) {
    const std::string* word = nullptr;
    if (rng.uniform() < sentiment_rate) {
      bool positive = class_sign == 0 ? rng.uniform() < 0.5 : class_sign > 0;
      if (class_sign != 0 && rng.uniform() < spec.overlap) positive = !positive;
      const bool own_domain = spec.domain_vocab > 0 && rng.uniform() < spec.domain_share;
      if (own_domain)
        word = &pick(positive ? vocab.domain_positive[domain] : vocab.domain_negative[domain], rng);
      else
        word = &pick(positive ? vocab.positive : vocab.negative, rng);
    } else {
      const bool own_domain = spec.domain_vocab > 0 && rng.uniform() < spec.domain_share;
      word = &pick(own_domain ? vocab.domain_neutral[domain] : vocab.neutral, rng);
    }
    if (!text.empty()) text += ' ';
    text += *word;
  }
  return text;
}

double get_number(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number", key);
  return it->get<double>();
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned())
    throw ConfigError(std::string("\"") + key + "\" must be a non-negative integer", key);
  return it->get<std::size_t>();
}

}  // namespace

void SynthSpec::validate() const {
  if (domains.empty()) throw std::invalid_argument("SynthSpec: no domains");
  for (const auto& d : domains) {
    if (d.name.empty()) throw std::invalid_argument("SynthSpec: domain without a name");
    if (d.count == 0) throw std::invalid_argument("SynthSpec: domain '" + d.name + "' has count 0");
    if (!is_fraction(d.positive_fraction) || !is_fraction(d.neutral_fraction))
      throw std::invalid_argument("SynthSpec: fractions for '" + d.name + "' must be in [0, 1]");
  }
  for (double f : {overlap, sentiment_rate, title_sentiment_rate, domain_share})
    if (!is_fraction(f)) throw std::invalid_argument("SynthSpec: rates must be in [0, 1]");
  if (neutral_vocab == 0) throw std::invalid_argument("SynthSpec: neutral_vocab must be >= 1");
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("synth spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("synth spec must be a JSON object");
  detail::reject_unknown_keys(root, "synth spec",
                              {"seed", "domains", "sentiment_vocab", "neutral_vocab",
                               "domain_vocab", "overlap", "sentiment_rate",
                               "title_sentiment_rate", "domain_share", "title_tokens",
                               "body_tokens"});
  SynthSpec spec;
  auto seed = root.find("seed");
  if (seed != root.end()) {
    if (!seed->is_number_unsigned()) throw ConfigError("\"seed\" must be a non-negative integer", "seed");
    spec.seed = seed->get<std::uint64_t>();
  }
  spec.sentiment_vocab = get_count(root, "sentiment_vocab", spec.sentiment_vocab);
  spec.neutral_vocab = get_count(root, "neutral_vocab", spec.neutral_vocab);
  spec.domain_vocab = get_count(root, "domain_vocab", spec.domain_vocab);
  spec.overlap = get_number(root, "overlap", spec.overlap);
  spec.sentiment_rate = get_number(root, "sentiment_rate", spec.sentiment_rate);
  spec.title_sentiment_rate = get_number(root, "title_sentiment_rate", spec.title_sentiment_rate);
  spec.domain_share = get_number(root, "domain_share", spec.domain_share);
  spec.title_tokens = get_count(root, "title_tokens", spec.title_tokens);
  spec.body_tokens = get_count(root, "body_tokens", spec.body_tokens);

  auto domains = root.find("domains");
  if (domains == root.end() || !domains->is_array())
    throw ConfigError("synth spec needs a \"domains\" array", "domains");
  for (const auto& d : *domains) {
    if (!d.is_object()) throw ConfigError("each entry of \"domains\" must be an object", "domains");
    detail::reject_unknown_keys(d, "domains[]",
                                {"name", "count", "positive_fraction", "neutral_fraction"});
    SynthDomain dom;
    auto name = d.find("name");
    if (name == d.end() || !name->is_string()) throw ConfigError("domain needs a \"name\"", "name");
    dom.name = name->get<std::string>();
    dom.count = get_count(d, "count", 0);
    dom.positive_fraction = get_number(d, "positive_fraction", 0.5);
    dom.neutral_fraction = get_number(d, "neutral_fraction", 0.0);
    spec.domains.push_back(std::move(dom));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::vector<Review> synth_corpus(const SynthSpec& spec) {
  spec.validate();
  const Vocabulary vocab = build_vocabulary(spec);
  SplitMix64 rng(spec.seed);
  std::vector<Review> out;
  ReviewId next_id = 1;
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    const SynthDomain& dom = spec.domains[d];
    const auto n_neutral =
        static_cast<std::size_t>(std::llround(dom.neutral_fraction * static_cast<double>(dom.count)));
    const std::size_t n_polar = dom.count - n_neutral;
    const auto n_pos = static_cast<std::size_t>(
        std::llround(dom.positive_fraction * static_cast<double>(n_polar)));
    std::vector<int> classes;
    classes.insert(classes.end(), n_pos, 1);
    classes.insert(classes.end(), n_polar - n_pos, -1);
    classes.insert(classes.end(), n_neutral, 0);
    shuffle(std::span<int>(classes), rng);
    for (int c : classes) {
      Review r;
      r.id = next_id++;
      r.domain = dom.name;
      const bool high = rng.uniform() < 0.5;
      r.stars = c > 0 ? (high ? 5 : 4) : c < 0 ? (high ? 1 : 2) : 3;
      r.title = make_text(spec, vocab, d, c, spec.title_tokens, spec.title_sentiment_rate, rng);
      r.body = make_text(spec, vocab, d, c, spec.body_tokens, spec.sentiment_rate, rng);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_corpus_jsonl(std::span<const Review> reviews, std::ostream& out) {
  for (const auto& r : reviews) {
    const json line = {
        {"id", r.id}, {"domain", r.domain}, {"stars", r.stars}, {"title", r.title}, {"text", r.body}};
    out << line.dump() << '\n';
  }
}

std::vector<LabeledExample> gaussian_examples(const GaussianDomainSpec& domain, std::size_t n,
                                              double positive_fraction, ReviewId first_id,
                                              SplitMix64& rng) {
  if (!is_fraction(positive_fraction))
    throw std::invalid_argument("gaussian_examples: positive_fraction must be in [0, 1]");
  const auto n_pos =
      static_cast<std::size_t>(std::llround(positive_fraction * static_cast<double>(n)));
  std::vector<Polarity> labels(n_pos, Polarity::positive);
  labels.resize(n, Polarity::negative);
  shuffle(std::span<Polarity>(labels), rng);

  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sign_value(labels[i]);
    const double x0 = s * domain.mean[0] + domain.stddev * rng.normal();
    const double x1 = s * domain.mean[1] + domain.stddev * rng.normal();
    out.push_back({first_id + i, domain.name, SparseVector::from_pairs({{0, x0}, {1, x1}}),
                   labels[i], Provenance::gold});
  }
  return out;
}

std::vector<LabeledExample> separable_examples(std::size_t n, double margin, ReviewId first_id,
                                               SplitMix64& rng) {
  if (!(margin >= 0.0 && margin < 1.0))
    throw std::invalid_argument("separable_examples: margin must be in [0, 1)");
  constexpr double ux = 0.6, uy = 0.8;
  std::vector<LabeledExample> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x0 = 2.0 * rng.uniform() - 1.0;
    const double x1 = 2.0 * rng.uniform() - 1.0;
    if (x0 * x0 + x1 * x1 > 1.0) continue;
    const double m = ux * x0 + uy * x1;
    if (std::abs(m) < margin || m == 0.0) continue;
    out.push_back({first_id + out.size(), "separable", SparseVector::from_pairs({{0, x0}, {1, x1}}),
                   polarity_of(m), Provenance::gold});
  }
  return out;
}

DatasetSplit fixture_split(const FixtureSpec& spec, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DatasetSplit split;
  split.seed = seed;
  auto draw = [&](std::size_t n, double positive_fraction, ReviewId first_id) {
    if (spec.kind == FixtureSpec::Kind::two_gaussians)
      return gaussian_examples(spec.gaussian, n, positive_fraction, first_id, rng);
    return separable_examples(n, spec.margin, first_id, rng);
  };
  ReviewId next_id = 1;
  split.train = draw(spec.seed_size, 0.5, next_id);
  next_id += spec.seed_size;
  for (auto& ex : draw(spec.pool_size, spec.positive_fraction, next_id)) {
    split.pool_gold.insert(ex.review_id, ex.label);
    split.pool.push_back({ex.review_id, ex.domain, std::move(ex.features)});
  }
  next_id += spec.pool_size;
  split.test = draw(spec.test_size, 0.5, next_id);
  return split;
}

}  // namespace sentssl
