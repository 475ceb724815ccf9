#include "sentssl/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/rng.hpp"

namespace sentssl {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxReportedProblems = 20;
constexpr std::uint64_t kPoolSalt = 0x706f6f6c5f647261ULL;  // "pool_dra"
constexpr std::uint64_t kNoiseSalt = 0x6e6f6973655f666cULL;  // "noise_fl"

ReviewId parse_id(const json& value) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer()) throw DataError("\"id\" must not be negative");
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s.empty()) throw DataError("\"id\" is an empty string");
    std::uint64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
    if (ec == std::errc() && ptr == s.data() + s.size()) return parsed;
    return fnv1a64(s);
  }
  throw DataError("\"id\" must be a string or an integer");
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw DataError(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

Review parse_review_line(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  Review r;
  r.id = parse_id(require(obj, "id"));
  r.domain = require_string(obj, "domain");
  const json& stars = require(obj, "stars");
  if (!stars.is_number_integer()) throw DataError("\"stars\" must be an integer");
  const auto s = stars.get<std::int64_t>();
  if (s < 1 || s > 5) throw DataError("\"stars\" out of range 1..5");
  r.stars = static_cast<int>(s);
  r.title = require_string(obj, "title");
  r.body = require_string(obj, "text");
  return r;
}

IngestResult ingest(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  std::unordered_set<ReviewId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (options.limit && result.reviews.size() >= *options.limit) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Review r = parse_review_line(line);
      if (!seen.insert(r.id).second)
        throw DataError("duplicate id " + std::to_string(r.id));
      result.reviews.push_back(std::move(r));
    } catch (const DataError& e) {
      const std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
      if (options.strict) throw DataError(msg);
      ++result.skipped;
      if (result.problems.size() < kMaxReportedProblems) result.problems.push_back(msg);
    }
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return ingest(in, options);
}

std::optional<Polarity> derive_label(int stars) {
  if (stars < 1 || stars > 5)
    throw std::invalid_argument("derive_label: stars must be in 1..5, got " +
                                std::to_string(stars));
  if (stars >= 4) return Polarity::positive;
  if (stars <= 2) return Polarity::negative;
  return std::nullopt;
}

std::vector<LabeledExample> gold_examples(const std::vector<Review>& reviews,
                                          const FeatureConfig& features) {
  std::vector<LabeledExample> out;
  out.reserve(reviews.size());
  for (const auto& r : reviews) {
    const auto label = derive_label(r.stars);
    if (!label) continue;
    out.push_back({r.id, r.domain, featurize(r, features), *label, Provenance::gold});
  }
  return out;
}

void BalanceSpec::validate() const {
  for (const auto& [domain, size] : per_domain_test_size) {
    if (size == 0)
      throw std::invalid_argument("BalanceSpec: test size for domain '" + domain + "' is zero");
    if (class_balance == ClassBalance::balanced && size % 2 != 0)
      throw std::invalid_argument("BalanceSpec: balanced test size for domain '" + domain +
                                  "' must be even, got " + std::to_string(size));
  }
}

std::vector<TestSizeTier> default_test_size_tiers() {
  return {{1, 100000}, {9, 10000}, {30, 1000}, {33, 100}};
}

const std::vector<std::string>& reference_domains() {
  static const std::vector<std::string> domains = {
      "books",      "movies",      "elect",       "music",        "kindle",      "videos",
      "kitchen",    "health",      "mp3",         "video_games",  "home",        "sports",
      "toys",       "garden_pets", "clothing",    "beauty",       "baby",        "camera",
      "food",       "software",    "shoes",       "cell_phones",  "patio",       "office",
      "auto",       "computer",    "watches",     "musical_inst", "android",     "jewelry",
      "magazine",   "arts",        "industrial"};
  return domains;
}

std::map<std::string, std::size_t> tiered_test_sizes(const std::vector<std::string>& ranked_domains,
                                                     const std::vector<TestSizeTier>& tiers) {
  if (tiers.empty()) throw std::invalid_argument("tiered_test_sizes: no tiers");
  std::map<std::string, std::size_t> sizes;
  for (std::size_t i = 0; i < ranked_domains.size(); ++i) {
    const std::size_t rank = i + 1;
    auto tier = std::find_if(tiers.begin(), tiers.end(),
                             [rank](const TestSizeTier& t) { return rank <= t.last_rank; });
    sizes[ranked_domains[i]] = tier == tiers.end() ? tiers.back().test_size : tier->test_size;
  }
  return sizes;
}

std::optional<Polarity> HiddenLabels::audit(ReviewId id) const {
  auto it = labels_.find(id);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

DatasetSplit build_balanced(const std::vector<Review>& corpus, const BalanceSpec& spec,
                            const FeatureConfig& features, std::uint64_t seed) {
  spec.validate();
  features.validate();

  // Labelable reviews per domain, as positions into `corpus`.
  std::map<std::string, std::vector<std::size_t>> positives, negatives;
  std::vector<std::optional<Polarity>> labels(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    labels[i] = derive_label(corpus[i].stars);
    if (!labels[i]) continue;
    auto& bucket = *labels[i] == Polarity::positive ? positives : negatives;
    bucket[corpus[i].domain].push_back(i);
  }

  std::vector<bool> in_test(corpus.size(), false);
  for (const auto& [domain, size] : spec.per_domain_test_size) {
    auto& pos = positives[domain];
    auto& neg = negatives[domain];
    SplitMix64 rng(derive_seed(seed, fnv1a64(domain)));
    std::vector<std::size_t> chosen;
    if (spec.class_balance == ClassBalance::balanced) {
      const std::size_t half = size / 2;
      if (pos.size() < half || neg.size() < half)
        throw DataError("domain '" + domain + "' has " + std::to_string(pos.size()) +
                        " positive and " + std::to_string(neg.size()) +
                        " negative reviews; balanced test size " + std::to_string(size) +
                        " needs " + std::to_string(half) + " of each");
      shuffle(std::span<std::size_t>(pos), rng);
      shuffle(std::span<std::size_t>(neg), rng);
      chosen.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(half));
      chosen.insert(chosen.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(half));
    } else {
      std::vector<std::size_t> all(pos);
      all.insert(all.end(), neg.begin(), neg.end());
      std::sort(all.begin(), all.end());
      if (all.size() < size)
        throw DataError("domain '" + domain + "' has " + std::to_string(all.size()) +
                        " labelable reviews; test size " + std::to_string(size) + " requested");
      shuffle(std::span<std::size_t>(all), rng);
      chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
    }
    for (std::size_t i : chosen) in_test[i] = true;
  }

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!labels[i]) continue;
    const Review& r = corpus[i];
    LabeledExample ex{r.id, r.domain, featurize(r, features), *labels[i], Provenance::gold};
    (in_test[i] ? split.test : split.reservoir).push_back(std::move(ex));
  }
  return split;
}

DatasetSplit make_pool(DatasetSplit split, std::size_t labeled_seed_size, std::size_t pool_size,
                       ClassRatio ratio) {
  auto positive_share = [&](std::size_t n) -> std::size_t {
    switch (ratio.kind) {
      case ClassRatio::Kind::balanced:
        if (n % 2 != 0)
          throw std::invalid_argument("make_pool: balanced sizes must be even, got " +
                                      std::to_string(n));
        return n / 2;
      case ClassRatio::Kind::fraction:
        return static_cast<std::size_t>(std::llround(ratio.positive_fraction * static_cast<double>(n)));
      case ClassRatio::Kind::as_is:
        return 0;
    }
    return 0;
  };
  if (ratio.kind == ClassRatio::Kind::fraction &&
      !(ratio.positive_fraction >= 0.0 && ratio.positive_fraction <= 1.0))
    throw std::invalid_argument("make_pool: positive fraction must be in [0, 1]");

  const std::size_t need = labeled_seed_size + pool_size;
  if (split.reservoir.size() < need)
    throw DataError("reservoir holds " + std::to_string(split.reservoir.size()) +
                    " examples; " + std::to_string(need) + " requested");

  SplitMix64 rng(derive_seed(split.seed, kPoolSalt));
  std::vector<std::size_t> train_idx, pool_idx;

  if (ratio.kind == ClassRatio::Kind::as_is) {
    auto order = shuffled_indices(split.reservoir.size(), rng);
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(labeled_seed_size));
    pool_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(labeled_seed_size),
                    order.begin() + static_cast<std::ptrdiff_t>(need));
  } else {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < split.reservoir.size(); ++i)
      (split.reservoir[i].label == Polarity::positive ? pos : neg).push_back(i);
    const std::size_t train_pos = positive_share(labeled_seed_size);
    const std::size_t pool_pos = positive_share(pool_size);
    const std::size_t want_pos = train_pos + pool_pos;
    const std::size_t want_neg = need - want_pos;
    if (pos.size() < want_pos || neg.size() < want_neg)
      throw DataError("reservoir has " + std::to_string(pos.size()) + " positive and " +
                      std::to_string(neg.size()) + " negative examples; need " +
                      std::to_string(want_pos) + " and " + std::to_string(want_neg));
    shuffle(std::span<std::size_t>(pos), rng);
    shuffle(std::span<std::size_t>(neg), rng);
    auto take = [](const std::vector<std::size_t>& from, std::size_t begin, std::size_t count,
                   std::vector<std::size_t>& into) {
      into.insert(into.end(), from.begin() + static_cast<std::ptrdiff_t>(begin),
                  from.begin() + static_cast<std::ptrdiff_t>(begin + count));
    };
    take(pos, 0, train_pos, train_idx);
    take(neg, 0, labeled_seed_size - train_pos, train_idx);
    take(pos, train_pos, pool_pos, pool_idx);
    take(neg, labeled_seed_size - train_pos, pool_size - pool_pos, pool_idx);
  }

  // Keep reservoir (corpus) order inside each partition.
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(pool_idx.begin(), pool_idx.end());
  std::vector<char> used(split.reservoir.size(), 0);
  for (std::size_t i : train_idx) {
    used[i] = 1;
    split.train.push_back(split.reservoir[i]);
  }
  for (std::size_t i : pool_idx) {
    used[i] = 1;
    const LabeledExample& ex = split.reservoir[i];
    split.pool.push_back({ex.review_id, ex.domain, ex.features});
    split.pool_gold.insert(ex.review_id, ex.label);
  }
  std::vector<LabeledExample> rest;
  rest.reserve(split.reservoir.size() - need);
  for (std::size_t i = 0; i < split.reservoir.size(); ++i)
    if (!used[i]) rest.push_back(std::move(split.reservoir[i]));
  split.reservoir = std::move(rest);
  return split;
}

std::size_t noise_flip_count(double rate, std::size_t n) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw std::invalid_argument("noise rate must be in [0, 1]");
  const double exact = rate * static_cast<double>(n);
  const auto count = static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
  return std::min(count, n);
}

std::vector<LabeledExample> inject_label_noise(std::vector<LabeledExample> train, double rate,
                                               std::uint64_t seed) {
  const std::size_t flips = noise_flip_count(rate, train.size());
  if (flips == 0) return train;
  SplitMix64 rng(derive_seed(seed, kNoiseSalt));
  const auto order = shuffled_indices(train.size(), rng);
  for (std::size_t i = 0; i < flips; ++i) {
    LabeledExample& ex = train[order[i]];
    ex.label = flipped(ex.label);
    ex.provenance = Provenance::noisy;
  }
  return train;
}

void write_split_manifest(const DatasetSplit& split, std::ostream& out) {
  auto emit = [&](const char* name, auto&& ids) {
    json line = {{"partition", name}, {"ids", ids}};
    out << line.dump() << '\n';
  };
  std::vector<ReviewId> ids;
  for (const auto& e : split.train) ids.push_back(e.review_id);
  emit("train", ids);
  ids.clear();
  for (const auto& e : split.pool) ids.push_back(e.id);
  emit("pool", ids);
  ids.clear();
  for (const auto& e : split.test) ids.push_back(e.review_id);
  emit("test", ids);
  ids.clear();
  for (const auto& e : split.reservoir) ids.push_back(e.review_id);
  emit("reservoir", ids);
}

}  // namespace sentssl
