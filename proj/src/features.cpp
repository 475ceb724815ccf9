#include "sentssl/features.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace sentssl {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at text[pos] and advances pos. Malformed
// sequences yield U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra = 0;
  char32_t cp = 0;
  char32_t min_cp = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min_cp = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min_cp = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min_cp = 0x10000;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + static_cast<std::size_t>(extra) >= text.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += static_cast<std::size_t>(extra) + 1;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

// Letters and digits. Exact for ASCII; outside ASCII every code point counts
// except the punctuation, symbol, space and emoji blocks listed here.
bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return in(cp, '0', '9') || in(cp, 'a', 'z') || in(cp, 'A', 'Z');
  }
  if (in(cp, 0x80, 0xBF)) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (in(cp, 0x0300, 0x036F)) return false;
  if (cp == 0x1680) return false;
  if (in(cp, 0x2000, 0x2BFF)) return false;
  if (in(cp, 0x2E00, 0x2E7F)) return false;
  if (in(cp, 0x3000, 0x303F)) return false;
  if (in(cp, 0xD800, 0xDFFF)) return false;
  if (in(cp, 0xFE10, 0xFE1F) || in(cp, 0xFE30, 0xFE6F)) return false;
  if (in(cp, 0xFF00, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
      in(cp, 0xFF5B, 0xFF65))
    return false;
  if (in(cp, 0xFFF0, 0xFFFF)) return false;
  if (in(cp, 0x1F000, 0x1FAFF)) return false;
  return true;
}

// Simple (one-to-one) case folding for Latin, Greek, Cyrillic, Armenian and
// fullwidth Latin.
char32_t fold_case(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (cp < 0x80) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x100, 0x137) || in(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp == 0x386) return 0x3AC;
  if (in(cp, 0x388, 0x38A)) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0x531, 0x556)) return cp + 0x30;
  if (cp == 0x1E9E) return 0xDF;
  if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
  return cp;
}

void add_field_terms(std::string_view text, std::string_view uni_prefix,
                     std::string_view bi_prefix, bool use_bigrams,
                     std::vector<std::string>& terms) {
  const auto tokens = tokenize(text);
  for (const auto& tok : tokens) {
    std::string term(uni_prefix);
    term += tok;
    terms.push_back(std::move(term));
  }
  if (!use_bigrams) return;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    std::string term(bi_prefix);
    term += tokens[i - 1];
    term += '_';
    term += tokens[i];
    terms.push_back(std::move(term));
  }
}

std::vector<std::string> review_terms(const Review& review, const FeatureConfig& config) {
  std::vector<std::string> terms;
  if (config.use_title) add_field_terms(review.title, "t:", "t2:", config.use_bigrams, terms);
  if (config.use_body) add_field_terms(review.body, "b:", "b2:", config.use_bigrams, terms);
  return terms;
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::gold: return "gold";
    case Provenance::pseudo: return "pseudo";
    case Provenance::weak: return "weak";
    case Provenance::noisy: return "noisy";
  }
  return "unknown";
}

void FeatureConfig::validate() const {
  if (dims_log2 < 8 || dims_log2 > 30)
    throw std::invalid_argument("FeatureConfig: dims_log2 must be in [8, 30], got " +
                                std::to_string(dims_log2));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode_utf8(text, pos);
    if (is_word_char(cp)) {
      encode_utf8(fold_case(cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint32_t hash_term(std::string_view term, int dims_log2) noexcept {
  const std::uint64_t mask = (std::uint64_t{1} << dims_log2) - 1;
  return static_cast<std::uint32_t>(fnv1a64(term) & mask);
}

std::vector<HashedTerm> featurize_terms(const Review& review, const FeatureConfig& config) {
  config.validate();
  std::vector<HashedTerm> out;
  std::unordered_map<std::string, std::size_t> position;
  for (auto& term : review_terms(review, config)) {
    auto it = position.find(term);
    if (it != position.end()) {
      out[it->second].count += 1.0;
      continue;
    }
    position.emplace(term, out.size());
    const auto index = hash_term(term, config.dims_log2);
    out.push_back(HashedTerm{std::move(term), index, 1.0});
  }
  return out;
}

SparseVector featurize(const Review& review, const FeatureConfig& config) {
  config.validate();
  const auto terms = review_terms(review, config);
  std::vector<std::pair<std::uint32_t, double>> pairs;
  pairs.reserve(terms.size());
  for (const auto& term : terms) pairs.emplace_back(hash_term(term, config.dims_log2), 1.0);
  SparseVector v = SparseVector::from_pairs(std::move(pairs));
  if (config.normalize && !v.empty()) v = v.scaled(1.0 / v.norm());
  return v;
}

}  // namespace sentssl
