#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentssl/corpus.hpp"
#include "sentssl/ssl_engine.hpp"

namespace sentssl {

enum class DaSetting {
  source_only,  // seed the learner with source labels only
  mixed_train,  // seed with source labels plus target labels
};

std::string_view to_string(DaSetting setting) noexcept;

/// One-to-one adaptation: self-train from the source (optionally mixed with
/// labelled target data) over an unlabelled target pool, evaluating on the
/// target test set. mixed_train without target_train throws
/// std::invalid_argument.
std::vector<IterationRecord> run_da_pair(std::span<const LabeledExample> source_train,
                                         std::span<const PoolEntry> target_pool,
                                         const HiddenLabels& target_gold,
                                         std::span<const LabeledExample> target_test,
                                         std::optional<std::span<const LabeledExample>> target_train,
                                         DaSetting setting, const SslConfig& ssl,
                                         const SelectionPolicy& policy);

struct UsageCurve {
  std::string domain;
  std::size_t available = 0;         // initial labelled + pool share of this domain
  std::vector<std::size_t> used_at;  // cumulative, one entry per record

  double percentage(std::size_t iteration) const {
    return available == 0 ? 0.0
                          : static_cast<double>(used_at.at(iteration)) /
                                static_cast<double>(available);
  }

  friend bool operator==(const UsageCurve&, const UsageCurve&) = default;
};

struct OneToManyResult {
  std::vector<IterationRecord> records;
  std::vector<UsageCurve> usage;  // sorted by domain name
};

/// Self-trains from a single-domain source into a pool spanning other
/// domains and tracks how much of each domain has been absorbed. Records
/// are evaluated on the union of `tests`. Throws DataError if the source
/// spans several domains or its domain appears in the pool.
OneToManyResult run_da_one_to_many(std::span<const LabeledExample> source_train,
                                   std::span<const PoolEntry> multi_pool,
                                   const HiddenLabels& pool_gold,
                                   const std::map<std::string, std::vector<LabeledExample>>& tests,
                                   const SslConfig& ssl, const SelectionPolicy& policy);

/// The top_n most and bottom_n least frequent curves by `available`; ties
/// keep input order. Returned most frequent first. Throws
/// std::invalid_argument if top_n + bottom_n exceeds the curve count.
std::vector<UsageCurve> usage_report(std::span<const UsageCurve> curves, std::size_t top_n,
                                     std::size_t bottom_n);

/// CSV: iteration,domain,available,used,pct
void write_usage_csv(std::span<const UsageCurve> curves, std::ostream& out);

}  // namespace sentssl
