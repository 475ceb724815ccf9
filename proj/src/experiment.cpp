#include "sentssl/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "json_keys.hpp"
#include "sentssl/csv.hpp"
#include "sentssl/errors.hpp"
#include "sentssl/rng.hpp"
#include "sentssl/weak_labels.hpp"

namespace sentssl {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSourceSplitSalt = 0x736f757263655f73ULL;
constexpr std::uint64_t kTargetSplitSalt = 0x7461726765745f73ULL;

// ---------------------------------------------------------------------------
// JSON field access
// ---------------------------------------------------------------------------

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::size_t as_count(const json& v, const char* key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(std::string("\"") + key + "\" must be a non-negative integer", key);
  return v.get<std::size_t>();
}

double as_number(const json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number", key);
  return v.get<double>();
}

bool as_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw ConfigError(std::string("\"") + key + "\" must be true or false", key);
  return v.get<bool>();
}

std::string as_string(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(std::string("\"") + key + "\" must be a string", key);
  return v.get<std::string>();
}

template <typename T, typename Read>
void read_opt(const json& obj, const char* key, T& into, Read read) {
  if (const json* v = find(obj, key)) into = read(*v, key);
}

fs::path existing_path(const json& v, const char* key, const fs::path& base_dir) {
  fs::path p = as_string(v, key);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  p = p.lexically_normal();
  if (!fs::exists(p))
    throw ConfigError(std::string("\"") + key + "\" refers to a missing file: " + p.string(), key);
  return fs::absolute(p);
}

template <typename Enum>
Enum parse_enum(const json& v, const char* key,
                std::initializer_list<std::pair<std::string_view, Enum>> options) {
  const std::string s = as_string(v, key);
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (name == s) return value;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  }
  throw ConfigError("bad value \"" + s + "\" for \"" + key + "\" (expected one of: " + allowed + ")",
                    key);
}

BasicPolicy parse_basic_policy(const json& v, std::uint64_t default_seed) {
  if (v.is_string()) {
    const auto kind = parse_enum<BasicPolicy::Kind>(
        v, "policy",
        {{"random", BasicPolicy::Kind::random}, {"highest_margin", BasicPolicy::Kind::highest_margin}});
    return {kind, default_seed};
  }
  if (!v.is_object()) throw ConfigError("\"policy\" must be a string or an object", "policy");
  detail::reject_unknown_keys(v, "policy", {"kind", "seed"});
  const json* kind = find(v, "kind");
  if (!kind) throw ConfigError("policy object needs \"kind\"", "kind");
  if (kind->is_string() && kind->get<std::string>() == "hybrid")
    throw ConfigError("hybrid policies cannot be nested", "kind");
  BasicPolicy p = parse_basic_policy(*kind, default_seed);
  if (const json* seed = find(v, "seed")) {
    if (!seed->is_number_unsigned()) throw ConfigError("\"seed\" must be a non-negative integer", "seed");
    p.seed = seed->get<std::uint64_t>();
  }
  return p;
}

SelectionPolicy parse_policy(const json& v, std::uint64_t default_seed, std::size_t max_iterations) {
  if (v.is_object()) {
    const json* kind = find(v, "kind");
    if (kind && kind->is_string() && kind->get<std::string>() == "hybrid") {
      detail::reject_unknown_keys(v, "policy", {"kind", "first", "second", "switch_after"});
      const json* first = find(v, "first");
      const json* second = find(v, "second");
      if (!first) throw ConfigError("hybrid policy needs \"first\"", "first");
      if (!second) throw ConfigError("hybrid policy needs \"second\"", "second");
      std::size_t switch_after = std::max<std::size_t>(1, max_iterations / 2);
      read_opt(v, "switch_after", switch_after, as_count);
      if (switch_after == 0) throw ConfigError("\"switch_after\" must be >= 1", "switch_after");
      return SelectionPolicy::hybrid(parse_basic_policy(*first, default_seed),
                                     parse_basic_policy(*second, default_seed), switch_after);
    }
  }
  const BasicPolicy p = parse_basic_policy(v, default_seed);
  return p.kind == BasicPolicy::Kind::random ? SelectionPolicy::random(p.seed)
                                             : SelectionPolicy::highest_margin();
}

json basic_policy_json(const BasicPolicy& p) {
  if (p.kind == BasicPolicy::Kind::random) return {{"kind", "random"}, {"seed", p.seed}};
  return {{"kind", "highest_margin"}};
}

json policy_json(const SelectionPolicy& p) {
  if (!p.is_hybrid()) return basic_policy_json(p.first());
  return {{"kind", "hybrid"},
          {"first", basic_policy_json(p.first())},
          {"second", basic_policy_json(*p.second())},
          {"switch_after", p.switch_after()}};
}

FixtureSpec parse_fixture(const json& v) {
  if (!v.is_object()) throw ConfigError("\"fixture\" must be an object", "fixture");
  detail::reject_unknown_keys(v, "fixture",
                              {"kind", "seed_size", "pool_size", "test_size", "positive_fraction",
                               "mean", "stddev", "margin"});
  FixtureSpec f;
  if (const json* kind = find(v, "kind"))
    f.kind = parse_enum<FixtureSpec::Kind>(
        *kind, "kind",
        {{"two_gaussians", FixtureSpec::Kind::two_gaussians},
         {"separable", FixtureSpec::Kind::separable}});
  read_opt(v, "seed_size", f.seed_size, as_count);
  read_opt(v, "pool_size", f.pool_size, as_count);
  read_opt(v, "test_size", f.test_size, as_count);
  read_opt(v, "positive_fraction", f.positive_fraction, as_number);
  read_opt(v, "stddev", f.gaussian.stddev, as_number);
  read_opt(v, "margin", f.margin, as_number);
  if (const json* mean = find(v, "mean")) {
    if (!mean->is_array() || mean->size() != 2)
      throw ConfigError("\"mean\" must be an array of two numbers", "mean");
    f.gaussian.mean = {as_number((*mean)[0], "mean"), as_number((*mean)[1], "mean")};
  }
  if (f.seed_size == 0 || f.test_size == 0)
    throw ConfigError("fixture seed_size and test_size must be >= 1", "fixture");
  if (!(f.positive_fraction >= 0.0 && f.positive_fraction <= 1.0))
    throw ConfigError("\"positive_fraction\" must be in [0, 1]", "positive_fraction");
  if (!(f.margin >= 0.0 && f.margin < 1.0)) throw ConfigError("\"margin\" must be in [0, 1)", "margin");
  if (!(f.gaussian.stddev > 0.0)) throw ConfigError("\"stddev\" must be positive", "stddev");
  return f;
}

json fixture_json(const FixtureSpec& f) {
  return {{"kind", f.kind == FixtureSpec::Kind::separable ? "separable" : "two_gaussians"},
          {"seed_size", f.seed_size},
          {"pool_size", f.pool_size},
          {"test_size", f.test_size},
          {"positive_fraction", f.positive_fraction},
          {"mean", {f.gaussian.mean[0], f.gaussian.mean[1]}},
          {"stddev", f.gaussian.stddev},
          {"margin", f.margin}};
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// ---------------------------------------------------------------------------
// Output staging
// ---------------------------------------------------------------------------

std::string hex(const unsigned char* data, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Files are written as <name>.partial and renamed on commit(); anything not
// committed is deleted on destruction.
class StagedOutputs {
 public:
  explicit StagedOutputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;

  ~StagedOutputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& name : names_) fs::remove(partial(name), ec);
  }

  std::ofstream open(const std::string& name) {
    if (std::find(names_.begin(), names_.end(), name) != names_.end())
      throw std::logic_error("output written twice: " + name);
    names_.push_back(name);
    std::ofstream out(partial(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + partial(name).string());
    return out;
  }

  std::vector<OutputFile> commit() {
    std::vector<OutputFile> files;
    for (const auto& name : names_) {
      fs::rename(partial(name), dir_ / name);
      files.push_back({name, sha256_file(dir_ / name)});
    }
    committed_ = true;
    std::sort(files.begin(), files.end(),
              [](const OutputFile& a, const OutputFile& b) { return a.name < b.name; });
    return files;
  }

 private:
  fs::path partial(const std::string& name) const { return dir_ / (name + ".partial"); }

  fs::path dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

// ---------------------------------------------------------------------------
// Data preparation
// ---------------------------------------------------------------------------

std::vector<Review> load_corpus(const fs::path& path, bool strict) {
  auto result = ingest(path, IngestOptions{std::nullopt, strict});
  if (result.skipped > 0) {
    std::cerr << "warning: skipped " << result.skipped << " malformed line(s) in " << path.string()
              << '\n';
    for (const auto& p : result.problems) std::cerr << "  " << p << '\n';
  }
  if (result.reviews.empty()) throw DataError("corpus " + path.string() + " contains no reviews");
  return std::move(result.reviews);
}

std::set<std::string> domains_of(const std::vector<Review>& reviews) {
  std::set<std::string> out;
  for (const auto& r : reviews) out.insert(r.domain);
  return out;
}

std::map<std::string, std::size_t> test_sizes_for(const ExperimentConfig& c,
                                                  const std::set<std::string>& domains) {
  if (!c.test_sizes.empty()) return c.test_sizes;
  std::map<std::string, std::size_t> sizes;
  for (const auto& d : domains) sizes[d] = c.test_size;
  return sizes;
}

DatasetSplit draw_pool(DatasetSplit split, std::size_t seed_size,
                       std::optional<std::size_t> pool_size, ClassRatio ratio) {
  if (pool_size) return make_pool(std::move(split), seed_size, *pool_size, ratio);
  if (split.reservoir.size() < seed_size)
    throw DataError("reservoir holds " + std::to_string(split.reservoir.size()) +
                    " examples; seed size " + std::to_string(seed_size) + " requested");
  const std::size_t rest = split.reservoir.size() - seed_size;
  return make_pool(std::move(split), seed_size, rest, ClassRatio::as_is());
}

DatasetSplit single_split(const ExperimentConfig& c, std::vector<fs::path>& inputs) {
  if (c.fixture) return fixture_split(*c.fixture, c.seed);
  inputs.push_back(*c.corpus);
  const auto reviews = load_corpus(*c.corpus, c.ingest_strict);
  BalanceSpec spec{test_sizes_for(c, domains_of(reviews)), c.test_balance};
  auto split = build_balanced(reviews, spec, c.features, c.seed);
  return draw_pool(std::move(split), c.seed_size, c.pool_size, c.pool_ratio);
}

void write_records(StagedOutputs& out, const std::string& name,
                   const std::vector<IterationRecord>& records) {
  auto f = out.open(name);
  write_records_csv(records, f);
}

void write_split(StagedOutputs& out, const DatasetSplit& split, const std::string& name) {
  auto f = out.open(name);
  write_split_manifest(split, f);
}

void run_ssl_kind(const ExperimentConfig& c, StagedOutputs& out, std::vector<fs::path>& inputs) {
  const DatasetSplit split = single_split(c, inputs);
  write_split(out, split, "split.jsonl");
  switch (c.kind) {
    case ExperimentKind::ssl:
      write_records(out, "records.csv", run_ssl(split, c.ssl, c.policy));
      break;
    case ExperimentKind::noise:
      for (const auto& curve : run_noise_experiment(split, c.ssl, c.policy, c.noise_rates))
        write_records(out, "records_noise_" + format_double(curve.rate) + ".csv", curve.records);
      break;
    case ExperimentKind::learner_compare:
      for (LearnerKind kind : {LearnerKind::perceptron, LearnerKind::arow}) {
        SslConfig cfg = c.ssl;
        cfg.learner.kind = kind;
        write_records(out, "records_" + std::string(to_string(kind)) + ".csv",
                      run_ssl(split, cfg, c.policy));
      }
      break;
    default:
      throw std::logic_error("run_ssl_kind: unexpected experiment kind");
  }
}

void run_da_pair_kind(const ExperimentConfig& c, StagedOutputs& out, std::vector<fs::path>& inputs) {
  inputs.push_back(*c.source_corpus);
  inputs.push_back(*c.target_corpus);
  const auto source_reviews = load_corpus(*c.source_corpus, c.ingest_strict);
  const auto target_reviews = load_corpus(*c.target_corpus, c.ingest_strict);

  DatasetSplit source = build_balanced(source_reviews, BalanceSpec{{}, c.test_balance}, c.features,
                                       derive_seed(c.seed, kSourceSplitSalt));
  const std::size_t n_source = c.source_train_size.value_or(source.reservoir.size());
  source = make_pool(std::move(source), n_source, 0, ClassRatio::as_is());

  BalanceSpec target_spec{test_sizes_for(c, domains_of(target_reviews)), c.test_balance};
  DatasetSplit target = build_balanced(target_reviews, target_spec, c.features,
                                       derive_seed(c.seed, kTargetSplitSalt));
  // Target labels are drawn in both settings so the pool is identical.
  target = draw_pool(std::move(target), c.target_train_size, c.pool_size, c.pool_ratio);
  write_split(out, source, "split_source.jsonl");
  write_split(out, target, "split_target.jsonl");

  std::optional<std::span<const LabeledExample>> target_train;
  if (c.da_setting == DaSetting::mixed_train) target_train = std::span<const LabeledExample>(target.train);
  write_records(out, "records.csv",
                run_da_pair(source.train, target.pool, target.pool_gold, target.test, target_train,
                            c.da_setting, c.ssl, c.policy));
}

void run_one_to_many_kind(const ExperimentConfig& c, StagedOutputs& out,
                          std::vector<fs::path>& inputs) {
  inputs.push_back(*c.corpus);
  const auto reviews = load_corpus(*c.corpus, c.ingest_strict);
  const std::string& source_domain = *c.source_domain;
  auto domains = domains_of(reviews);
  if (!domains.count(source_domain))
    throw DataError("source domain '" + source_domain + "' does not occur in the corpus");
  domains.erase(source_domain);

  auto sizes = test_sizes_for(c, domains);
  sizes.erase(source_domain);
  DatasetSplit split = build_balanced(reviews, BalanceSpec{sizes, c.test_balance}, c.features, c.seed);

  // Source reservoir feeds the labelled seed, every other domain the pool.
  DatasetSplit source, others;
  source.seed = derive_seed(c.seed, kSourceSplitSalt);
  others.seed = derive_seed(c.seed, kTargetSplitSalt);
  for (auto& ex : split.reservoir)
    (ex.domain == source_domain ? source : others).reservoir.push_back(std::move(ex));
  const std::size_t n_source = c.source_train_size.value_or(source.reservoir.size());
  source = make_pool(std::move(source), n_source, 0, ClassRatio::as_is());
  others = draw_pool(std::move(others), 0, c.pool_size, c.pool_ratio);
  others.test = std::move(split.test);
  write_split(out, source, "split_source.jsonl");
  write_split(out, others, "split_pool.jsonl");

  std::map<std::string, std::vector<LabeledExample>> tests;
  for (const auto& ex : others.test) tests[ex.domain].push_back(ex);
  const auto result =
      run_da_one_to_many(source.train, others.pool, others.pool_gold, tests, c.ssl, c.policy);
  write_records(out, "records.csv", result.records);
  auto f = out.open("usage.csv");
  write_usage_csv(result.usage, f);
}

void run_wsl_kind(const ExperimentConfig& c, StagedOutputs& out, std::vector<fs::path>& inputs) {
  inputs.push_back(*c.corpus);
  Lexicon lexicon = default_lexicon();
  if (c.lexicon_positive) {
    inputs.push_back(*c.lexicon_positive);
    inputs.push_back(*c.lexicon_negative);
    lexicon = load_lexicon(*c.lexicon_positive, *c.lexicon_negative);
  }
  const auto reviews = load_corpus(*c.corpus, c.ingest_strict);
  BalanceSpec spec{test_sizes_for(c, domains_of(reviews)), c.test_balance};
  const DatasetSplit split = build_balanced(reviews, spec, c.features, c.seed);
  write_split(out, split, "split.jsonl");

  std::set<ReviewId> test_ids;
  for (const auto& ex : split.test) test_ids.insert(ex.review_id);
  std::vector<Review> stream;
  for (const auto& r : reviews)
    if (!test_ids.count(r.id)) stream.push_back(r);

  const WeakLabelOptions options{c.weak_include_body};
  const WslCurve curve =
      run_wsl(stream, lexicon, split.test, c.ssl.learner, c.features, c.checkpoints, options);
  if (curve.truncated)
    std::cerr << "warning: fewer weak labels than the largest checkpoint; curve truncated\n";
  {
    auto f = out.open("wsl_curve.csv");
    write_wsl_csv(curve, f);
  }

  std::vector<Review> polar;
  std::size_t labeled = 0;
  for (const auto& r : stream) {
    if (weak_label(r, lexicon, options).label) ++labeled;
    if (derive_label(r.stars)) polar.push_back(r);
  }
  const RuleConfusion q = weak_rule_quality(polar, lexicon, options);
  const double coverage =
      stream.empty() ? 0.0 : static_cast<double>(labeled) / static_cast<double>(stream.size());
  auto f = out.open("wsl_rule_quality.csv");
  f << "tp,fp,tn,fn,abstain,coverage\n"
    << q.tp << ',' << q.fp << ',' << q.tn << ',' << q.fn << ',' << q.abstain << ','
    << format_double(coverage) << '\n';
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::ssl: return "ssl";
    case ExperimentKind::da_pair: return "da_pair";
    case ExperimentKind::da_one_to_many: return "da_one_to_many";
    case ExperimentKind::wsl: return "wsl";
    case ExperimentKind::noise: return "noise";
    case ExperimentKind::learner_compare: return "learner_compare";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(
      doc, "",
      {"kind", "corpus", "source_corpus", "target_corpus", "fixture", "source_domain",
       "ingest_strict", "dims_log2", "use_bigrams", "normalize", "fields", "learner", "arow_r",
       "epochs", "batch_size", "max_iterations", "retrain_mode", "policy", "da_setting",
       "test_size", "test_balance", "seed_size", "pool_size", "pool_balance", "source_train_size",
       "target_train_size", "noise_rates", "checkpoints", "lexicon_positive", "lexicon_negative",
       "weak_include_body", "output_dir", "seed"});

  ExperimentConfig c;
  const json* kind = find(doc, "kind");
  if (!kind) throw ConfigError("missing required key \"kind\"", "kind");
  c.kind = parse_enum<ExperimentKind>(*kind, "kind",
                                      {{"ssl", ExperimentKind::ssl},
                                       {"da_pair", ExperimentKind::da_pair},
                                       {"da_one_to_many", ExperimentKind::da_one_to_many},
                                       {"wsl", ExperimentKind::wsl},
                                       {"noise", ExperimentKind::noise},
                                       {"learner_compare", ExperimentKind::learner_compare}});

  if (const json* seed = find(doc, "seed")) {
    if (!seed->is_number_unsigned()) throw ConfigError("\"seed\" must be a non-negative integer", "seed");
    c.seed = seed->get<std::uint64_t>();
  }
  auto path_of = [&](const char* key) -> std::optional<fs::path> {
    if (const json* v = find(doc, key)) return existing_path(*v, key, base_dir);
    return std::nullopt;
  };
  c.corpus = path_of("corpus");
  c.source_corpus = path_of("source_corpus");
  c.target_corpus = path_of("target_corpus");
  c.lexicon_positive = path_of("lexicon_positive");
  c.lexicon_negative = path_of("lexicon_negative");
  if (const json* f = find(doc, "fixture")) c.fixture = parse_fixture(*f);
  read_opt(doc, "source_domain", c.source_domain,
           [](const json& v, const char* k) { return std::optional<std::string>(as_string(v, k)); });
  read_opt(doc, "ingest_strict", c.ingest_strict, as_bool);
  if (const json* out = find(doc, "output_dir")) {
    fs::path p = as_string(*out, "output_dir");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.output_dir = p.lexically_normal();
  }

  // Features.
  if (const json* v = find(doc, "dims_log2")) c.features.dims_log2 = static_cast<int>(as_count(*v, "dims_log2"));
  read_opt(doc, "use_bigrams", c.features.use_bigrams, as_bool);
  read_opt(doc, "normalize", c.features.normalize, as_bool);
  if (const json* fields = find(doc, "fields")) {
    if (!fields->is_array() || fields->empty())
      throw ConfigError("\"fields\" must be a nonempty array of \"title\"/\"body\"", "fields");
    c.features.use_title = c.features.use_body = false;
    for (const auto& f : *fields) {
      const std::string s = as_string(f, "fields");
      if (s == "title") c.features.use_title = true;
      else if (s == "body") c.features.use_body = true;
      else throw ConfigError("bad value \"" + s + "\" in \"fields\" (expected title or body)", "fields");
    }
  }
  try {
    c.features.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "dims_log2");
  }

  // Learner and loop.
  if (const json* v = find(doc, "learner"))
    c.ssl.learner.kind = parse_enum<LearnerKind>(
        *v, "learner", {{"perceptron", LearnerKind::perceptron}, {"arow", LearnerKind::arow}});
  read_opt(doc, "arow_r", c.ssl.learner.r, as_number);
  if (!(c.ssl.learner.r > 0.0)) throw ConfigError("\"arow_r\" must be positive", "arow_r");
  c.ssl.learner.dims_log2 = c.fixture ? 1 : c.features.dims_log2;
  read_opt(doc, "epochs", c.ssl.epochs_per_iteration, as_count);
  read_opt(doc, "batch_size", c.ssl.batch_size, as_count);
  read_opt(doc, "max_iterations", c.ssl.max_iterations, as_count);
  if (const json* v = find(doc, "retrain_mode"))
    c.ssl.retrain_mode = parse_enum<RetrainMode>(
        *v, "retrain_mode",
        {{"from_scratch", RetrainMode::from_scratch}, {"incremental", RetrainMode::incremental}});
  c.ssl.master_seed = c.seed;
  if (c.ssl.epochs_per_iteration == 0) throw ConfigError("\"epochs\" must be >= 1", "epochs");
  if (c.ssl.batch_size == 0) throw ConfigError("\"batch_size\" must be >= 1", "batch_size");
  if (c.ssl.max_iterations == 0) throw ConfigError("\"max_iterations\" must be >= 1", "max_iterations");
  if (const json* v = find(doc, "policy")) c.policy = parse_policy(*v, c.seed, c.ssl.max_iterations);
  if (const json* v = find(doc, "da_setting"))
    c.da_setting = parse_enum<DaSetting>(
        *v, "da_setting",
        {{"source_only", DaSetting::source_only}, {"mixed_train", DaSetting::mixed_train}});

  // Splits.
  if (const json* v = find(doc, "test_size")) {
    if (v->is_object()) {
      for (const auto& [domain, size] : v->items()) c.test_sizes[domain] = as_count(size, "test_size");
      if (c.test_sizes.empty()) throw ConfigError("\"test_size\" object is empty", "test_size");
    } else {
      c.test_size = as_count(*v, "test_size");
    }
  }
  if (const json* v = find(doc, "test_balance"))
    c.test_balance = parse_enum<ClassBalance>(
        *v, "test_balance", {{"balanced", ClassBalance::balanced}, {"natural", ClassBalance::natural}});
  read_opt(doc, "seed_size", c.seed_size, as_count);
  if (const json* v = find(doc, "pool_size")) c.pool_size = as_count(*v, "pool_size");
  if (const json* v = find(doc, "pool_balance")) {
    if (v->is_number()) {
      const double p = v->get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("\"pool_balance\" fraction must be in [0, 1]", "pool_balance");
      c.pool_ratio = ClassRatio::natural(p);
    } else {
      const auto k = parse_enum<ClassRatio::Kind>(
          *v, "pool_balance",
          {{"balanced", ClassRatio::Kind::balanced}, {"as_is", ClassRatio::Kind::as_is}});
      c.pool_ratio = k == ClassRatio::Kind::balanced ? ClassRatio::balanced() : ClassRatio::as_is();
    }
  }
  if (const json* v = find(doc, "source_train_size")) c.source_train_size = as_count(*v, "source_train_size");
  read_opt(doc, "target_train_size", c.target_train_size, as_count);
  if (const json* v = find(doc, "noise_rates")) {
    if (!v->is_array() || v->empty()) throw ConfigError("\"noise_rates\" must be a nonempty array", "noise_rates");
    c.noise_rates.clear();
    for (const auto& r : *v) {
      const double rate = as_number(r, "noise_rates");
      if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("noise rates must be in [0, 1]", "noise_rates");
      c.noise_rates.push_back(rate);
    }
  }
  if (const json* v = find(doc, "checkpoints")) {
    if (!v->is_array()) throw ConfigError("\"checkpoints\" must be an array", "checkpoints");
    for (const auto& n : *v) c.checkpoints.push_back(as_count(n, "checkpoints"));
    if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()))
      throw ConfigError("\"checkpoints\" must be ascending", "checkpoints");
  }
  read_opt(doc, "weak_include_body", c.weak_include_body, as_bool);

  // Kind-specific requirements.
  auto require = [&](bool present, const char* key) {
    if (!present)
      throw ConfigError("experiment kind \"" + std::string(to_string(c.kind)) +
                            "\" requires key \"" + key + "\"",
                        key);
  };
  switch (c.kind) {
    case ExperimentKind::ssl:
    case ExperimentKind::noise:
    case ExperimentKind::learner_compare:
      if (c.corpus && c.fixture)
        throw ConfigError("give either \"corpus\" or \"fixture\", not both", "fixture");
      require(c.corpus || c.fixture, "corpus");
      break;
    case ExperimentKind::da_pair:
      require(c.source_corpus.has_value(), "source_corpus");
      require(c.target_corpus.has_value(), "target_corpus");
      break;
    case ExperimentKind::da_one_to_many:
      require(c.corpus.has_value(), "corpus");
      require(c.source_domain.has_value(), "source_domain");
      break;
    case ExperimentKind::wsl:
      require(c.corpus.has_value(), "corpus");
      require(!c.checkpoints.empty(), "checkpoints");
      break;
  }
  if (c.fixture && c.kind != ExperimentKind::ssl && c.kind != ExperimentKind::noise &&
      c.kind != ExperimentKind::learner_compare)
    throw ConfigError("\"fixture\" is only valid for ssl, noise and learner_compare", "fixture");
  if (c.lexicon_positive.has_value() != c.lexicon_negative.has_value())
    throw ConfigError("\"lexicon_positive\" and \"lexicon_negative\" must be given together",
                      c.lexicon_positive ? "lexicon_negative" : "lexicon_positive");
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = std::string(sentssl::to_string(kind));
  if (corpus) j["corpus"] = corpus->string();
  if (source_corpus) j["source_corpus"] = source_corpus->string();
  if (target_corpus) j["target_corpus"] = target_corpus->string();
  if (fixture) j["fixture"] = fixture_json(*fixture);
  if (source_domain) j["source_domain"] = *source_domain;
  j["ingest_strict"] = ingest_strict;
  j["dims_log2"] = features.dims_log2;
  j["use_bigrams"] = features.use_bigrams;
  j["normalize"] = features.normalize;
  json fields = json::array();
  if (features.use_title) fields.push_back("title");
  if (features.use_body) fields.push_back("body");
  j["fields"] = fields;
  j["learner"] = std::string(sentssl::to_string(ssl.learner.kind));
  j["arow_r"] = ssl.learner.r;
  j["epochs"] = ssl.epochs_per_iteration;
  j["batch_size"] = ssl.batch_size;
  j["max_iterations"] = ssl.max_iterations;
  j["retrain_mode"] = ssl.retrain_mode == RetrainMode::incremental ? "incremental" : "from_scratch";
  j["policy"] = policy_json(policy);
  j["da_setting"] = std::string(sentssl::to_string(da_setting));
  if (test_sizes.empty())
    j["test_size"] = test_size;
  else
    j["test_size"] = test_sizes;
  j["test_balance"] = test_balance == ClassBalance::balanced ? "balanced" : "natural";
  j["seed_size"] = seed_size;
  if (pool_size) j["pool_size"] = *pool_size;
  switch (pool_ratio.kind) {
    case ClassRatio::Kind::balanced: j["pool_balance"] = "balanced"; break;
    case ClassRatio::Kind::as_is: j["pool_balance"] = "as_is"; break;
    case ClassRatio::Kind::fraction: j["pool_balance"] = pool_ratio.positive_fraction; break;
  }
  if (source_train_size) j["source_train_size"] = *source_train_size;
  j["target_train_size"] = target_train_size;
  j["noise_rates"] = noise_rates;
  j["checkpoints"] = checkpoints;
  if (lexicon_positive) j["lexicon_positive"] = lexicon_positive->string();
  if (lexicon_negative) j["lexicon_negative"] = lexicon_negative->string();
  j["weak_include_body"] = weak_include_body;
  if (output_dir) j["output_dir"] = output_dir->string();
  j["seed"] = seed;
  return j;
}

ExperimentConfig parse_config_text(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON (line " +
                      std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      "): " + e.what());
  }
  try {
    return config_from_json(doc, base_dir);
  } catch (const ConfigError& e) {
    if (e.key().empty()) throw;
    const auto pos = text.find("\"" + e.key() + "\"");
    if (pos == std::string_view::npos) throw;
    throw ConfigError(std::string(e.what()) + " (line " + std::to_string(line_of_offset(text, pos)) +
                          ")",
                      e.key());
  }
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), fs::absolute(path).parent_path());
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialisation failed");
  std::vector<char> chunk(1 << 16);
  while (in) {
    in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), chunk.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  return hex(digest, len);
}

RunResult run_experiment(const ExperimentConfig& config, std::optional<fs::path> output_dir) {
  const fs::path dir = output_dir ? *output_dir : config.output_dir.value_or(fs::path{});
  if (dir.empty()) throw ConfigError("no output directory given", "output_dir");

  const std::string started = utc_timestamp();
  StagedOutputs out(dir);
  std::vector<fs::path> inputs;
  switch (config.kind) {
    case ExperimentKind::ssl:
    case ExperimentKind::noise:
    case ExperimentKind::learner_compare:
      run_ssl_kind(config, out, inputs);
      break;
    case ExperimentKind::da_pair:
      run_da_pair_kind(config, out, inputs);
      break;
    case ExperimentKind::da_one_to_many:
      run_one_to_many_kind(config, out, inputs);
      break;
    case ExperimentKind::wsl:
      run_wsl_kind(config, out, inputs);
      break;
  }

  RunResult result;
  result.output_dir = dir;
  result.outputs = out.commit();

  json manifest;
  manifest["tool"] = "sentssl";
  manifest["version"] = std::string(kToolVersion);
  manifest["config"] = config.to_json();
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_timestamp();
  json in_list = json::array();
  for (const auto& p : inputs)
    in_list.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  manifest["inputs"] = in_list;
  json out_list = json::array();
  for (const auto& f : result.outputs) out_list.push_back({{"file", f.name}, {"sha256", f.sha256}});
  manifest["outputs"] = out_list;
  {
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write manifest in " + dir.string());
    mf << manifest.dump(2) << '\n';
  }
  result.manifest = std::move(manifest);
  return result;
}

ReplayResult replay_manifest(const fs::path& manifest_path, std::optional<fs::path> output_dir) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.contains("config") || !manifest.contains("inputs") || !manifest.contains("outputs"))
    throw ConfigError("manifest lacks config, inputs or outputs");

  for (const auto& input : manifest["inputs"]) {
    const fs::path p = input.at("path").get<std::string>();
    if (!fs::exists(p)) throw DataError("replay input missing: " + p.string());
    if (sha256_file(p) != input.at("sha256").get<std::string>())
      throw DataError("replay input changed since the recorded run: " + p.string());
  }

  const fs::path manifest_dir = fs::absolute(manifest_path).parent_path();
  ExperimentConfig config = config_from_json(manifest["config"], manifest_dir);
  ReplayResult result;
  result.run = run_experiment(config, output_dir.value_or(manifest_dir / "replay"));

  std::map<std::string, std::string> expected;
  for (const auto& f : manifest["outputs"])
    expected[f.at("file").get<std::string>()] = f.at("sha256").get<std::string>();
  std::map<std::string, std::string> actual;
  for (const auto& f : result.run.outputs) actual[f.name] = f.sha256;
  std::set<std::string> names;
  for (const auto& [n, d] : expected) names.insert(n);
  for (const auto& [n, d] : actual) names.insert(n);
  for (const auto& n : names) {
    auto e = expected.find(n);
    auto a = actual.find(n);
    if (e == expected.end() || a == actual.end() || e->second != a->second)
      result.mismatched.push_back(n);
  }
  return result;
}

void write_feature_dump(const std::vector<Review>& reviews, const FeatureConfig& features,
                        std::ostream& out) {
  out << "review_id,term,index,value\n";
  for (const auto& r : reviews) {
    const auto terms = featurize_terms(r, features);
    double norm = 0.0;
    if (features.normalize) {
      // Normalization acts on the hashed vector, so collisions count jointly.
      norm = featurize(r, FeatureConfig{features.dims_log2, features.use_bigrams, false,
                                        features.use_title, features.use_body})
                 .norm();
    }
    for (const auto& t : terms) {
      const double value = features.normalize && norm > 0.0 ? t.count / norm : t.count;
      out << r.id << ',' << t.term << ',' << t.index << ',' << format_double(value) << '\n';
    }
  }
}

}  // namespace sentssl
