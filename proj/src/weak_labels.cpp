#include "sentssl/weak_labels.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "sentssl/corpus.hpp"
#include "sentssl/csv.hpp"
#include "sentssl/errors.hpp"

namespace sentssl {

void Lexicon::validate() const {
  auto check = [](const std::set<std::string>& terms, const char* side) {
    for (const auto& t : terms) {
      if (t.empty()) throw std::invalid_argument(std::string("Lexicon: empty ") + side + " term");
      if (tokenize(t) != std::vector<std::string>{t})
        throw std::invalid_argument(std::string("Lexicon: ") + side + " term '" + t +
                                    "' is not a single lowercase token");
    }
  };
  check(positive, "positive");
  check(negative, "negative");
  for (const auto& t : positive)
    if (negative.count(t))
      throw std::invalid_argument("Lexicon: term '" + t + "' is both positive and negative");
}

Lexicon default_lexicon() {
  return {
      {"excellent", "great", "good", "love", "loved", "wonderful", "amazing", "best", "awesome",
       "perfect"},
      {"poor", "bad", "horrible", "terrible", "awful", "worst", "disappointing", "boring", "waste",
       "mess"},
  };
}

std::set<std::string> read_term_list(std::istream& in) {
  std::set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    terms.insert(line.substr(begin, end - begin + 1));
  }
  return terms;
}

Lexicon load_lexicon(const std::filesystem::path& positive, const std::filesystem::path& negative) {
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open lexicon file " + p.string());
    return read_term_list(in);
  };
  Lexicon lex{read(positive), read(negative)};
  lex.validate();
  return lex;
}

WeakLabelOutcome weak_label(const Review& review, const Lexicon& lexicon,
                            const WeakLabelOptions& options) {
  WeakLabelOutcome out;
  auto count = [&](const std::string& text) {
    for (const auto& tok : tokenize(text)) {
      if (lexicon.positive.count(tok)) ++out.pos_hits;
      if (lexicon.negative.count(tok)) ++out.neg_hits;
    }
  };
  count(review.title);
  if (options.include_body) count(review.body);
  if (out.pos_hits > 0 && out.neg_hits == 0) out.label = Polarity::positive;
  if (out.neg_hits > 0 && out.pos_hits == 0) out.label = Polarity::negative;
  return out;
}

WeakLabeledCorpus weak_label_corpus(std::span<const Review> reviews, const Lexicon& lexicon,
                                    const FeatureConfig& features,
                                    const WeakLabelOptions& options) {
  WeakLabeledCorpus out;
  for (const auto& r : reviews) {
    const auto outcome = weak_label(r, lexicon, options);
    if (!outcome.label) continue;
    out.labeled.push_back({r.id, r.domain, featurize(r, features), *outcome.label,
                           Provenance::weak});
  }
  if (!reviews.empty())
    out.coverage = static_cast<double>(out.labeled.size()) / static_cast<double>(reviews.size());
  return out;
}

WslCurve run_wsl(std::span<const Review> corpus, const Lexicon& lexicon,
                 std::span<const LabeledExample> gold_test, const LearnerSpec& learner_spec,
                 const FeatureConfig& features, std::span<const std::size_t> checkpoints,
                 const WeakLabelOptions& options) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("run_wsl: checkpoints must be ascending");
  if (gold_test.empty()) throw std::invalid_argument("run_wsl: empty gold test set");
  features.validate();

  Learner learner(learner_spec);
  WslCurve curve;
  std::size_t seen = 0;
  auto next = checkpoints.begin();
  auto record_due = [&] {
    while (next != checkpoints.end() && *next == seen) {
      curve.points.push_back({seen, evaluate(learner, gold_test).error_rate});
      ++next;
    }
  };
  record_due();
  for (const auto& r : corpus) {
    if (next == checkpoints.end()) break;
    const auto outcome = weak_label(r, lexicon, options);
    if (!outcome.label) continue;
    learner.update(featurize(r, features), *outcome.label);
    ++seen;
    record_due();
  }
  curve.truncated = next != checkpoints.end();
  return curve;
}

RuleConfusion weak_rule_quality(std::span<const Review> reviews, const Lexicon& lexicon,
                                const WeakLabelOptions& options) {
  RuleConfusion c;
  for (const auto& r : reviews) {
    const auto gold = derive_label(r.stars);
    if (!gold)
      throw std::invalid_argument("weak_rule_quality: review " + std::to_string(r.id) +
                                  " has 3 stars and no gold label");
    const auto weak = weak_label(r, lexicon, options).label;
    if (!weak)
      ++c.abstain;
    else if (*weak == Polarity::positive)
      ++(*gold == Polarity::positive ? c.tp : c.fp);
    else
      ++(*gold == Polarity::negative ? c.tn : c.fn);
  }
  return c;
}

void write_wsl_csv(const WslCurve& curve, std::ostream& out) {
  out << "n_weak_examples,error_rate\n";
  for (const auto& p : curve.points)
    out << p.n_weak_examples << ',' << format_double(p.error_rate) << '\n';
}

}  // namespace sentssl
