#pragma once

// Internal helpers for strict JSON configuration objects.

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sentssl/errors.hpp"

namespace sentssl::detail {

/// Levenshtein distance.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Closest allowed key within edit distance 2, or empty.
inline std::string nearest_key(std::string_view key, std::initializer_list<std::string_view> allowed) {
  std::string best;
  std::size_t best_d = 3;
  for (auto candidate : allowed) {
    const auto d = edit_distance(key, candidate);
    if (d < best_d) {
      best_d = d;
      best = candidate;
    }
  }
  return best;
}

/// Throws ConfigError on the first key of `obj` not in `allowed`.
inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view context,
                                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string msg = "unknown key \"" + key + "\"";
    if (!context.empty()) msg += " in " + std::string(context);
    const auto hint = nearest_key(key, allowed);
    if (!hint.empty()) msg += "; did you mean \"" + hint + "\"?";
    throw ConfigError(msg, key);
  }
}

}  // namespace sentssl::detail
