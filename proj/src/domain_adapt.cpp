#include "sentssl/domain_adapt.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "sentssl/csv.hpp"
#include "sentssl/errors.hpp"

namespace sentssl {

std::string_view to_string(DaSetting setting) noexcept {
  return setting == DaSetting::mixed_train ? "mixed_train" : "source_only";
}

std::vector<IterationRecord> run_da_pair(std::span<const LabeledExample> source_train,
                                         std::span<const PoolEntry> target_pool,
                                         const HiddenLabels& target_gold,
                                         std::span<const LabeledExample> target_test,
                                         std::optional<std::span<const LabeledExample>> target_train,
                                         DaSetting setting, const SslConfig& ssl,
                                         const SelectionPolicy& policy) {
  if (setting == DaSetting::mixed_train && (!target_train || target_train->empty()))
    throw std::invalid_argument("run_da_pair: mixed_train requires labelled target examples");
  if (target_test.empty()) throw std::invalid_argument("run_da_pair: target test set is empty");

  std::vector<LabeledExample> seed(source_train.begin(), source_train.end());
  if (setting == DaSetting::mixed_train)
    seed.insert(seed.end(), target_train->begin(), target_train->end());
  std::vector<PoolEntry> pool(target_pool.begin(), target_pool.end());
  return self_train(std::move(seed), std::move(pool), target_test, target_gold, ssl, policy)
      .records;
}

OneToManyResult run_da_one_to_many(std::span<const LabeledExample> source_train,
                                   std::span<const PoolEntry> multi_pool,
                                   const HiddenLabels& pool_gold,
                                   const std::map<std::string, std::vector<LabeledExample>>& tests,
                                   const SslConfig& ssl, const SelectionPolicy& policy) {
  if (source_train.empty()) throw std::invalid_argument("run_da_one_to_many: empty source");
  const std::string& source_domain = source_train.front().domain;
  for (const auto& ex : source_train)
    if (ex.domain != source_domain)
      throw DataError("source training set spans domains '" + source_domain + "' and '" +
                      ex.domain + "'");
  for (const auto& e : multi_pool)
    if (e.domain == source_domain)
      throw DataError("source domain '" + source_domain + "' appears in the unlabelled pool");

  std::vector<LabeledExample> test;
  for (const auto& [domain, examples] : tests) test.insert(test.end(), examples.begin(), examples.end());

  std::map<std::string, std::size_t> available, used;
  available[source_domain] = source_train.size();
  used[source_domain] = source_train.size();
  for (const auto& e : multi_pool) {
    ++available[e.domain];
    used.try_emplace(e.domain, 0);
  }

  std::map<std::string, std::vector<std::size_t>> history;
  auto observer = [&](const IterationRecord&, std::span<const PoolEntry> selected) {
    for (const auto& e : selected) ++used[e.domain];
    for (const auto& [domain, n] : used) history[domain].push_back(n);
  };

  OneToManyResult result;
  result.records =
      self_train({source_train.begin(), source_train.end()}, {multi_pool.begin(), multi_pool.end()},
                 test, pool_gold, ssl, policy, observer)
          .records;
  for (auto& [domain, counts] : history)
    result.usage.push_back({domain, available[domain], std::move(counts)});
  return result;
}

std::vector<UsageCurve> usage_report(std::span<const UsageCurve> curves, std::size_t top_n,
                                     std::size_t bottom_n) {
  if (top_n + bottom_n > curves.size())
    throw std::invalid_argument("usage_report: top_n + bottom_n exceeds the number of curves");
  std::vector<std::size_t> rank(curves.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return curves[a].available > curves[b].available;
  });
  std::vector<UsageCurve> out;
  out.reserve(top_n + bottom_n);
  for (std::size_t i = 0; i < top_n; ++i) out.push_back(curves[rank[i]]);
  for (std::size_t i = curves.size() - bottom_n; i < curves.size(); ++i)
    out.push_back(curves[rank[i]]);
  return out;
}

void write_usage_csv(std::span<const UsageCurve> curves, std::ostream& out) {
  out << "iteration,domain,available,used,pct\n";
  std::size_t iterations = 0;
  for (const auto& c : curves) iterations = std::max(iterations, c.used_at.size());
  for (std::size_t i = 0; i < iterations; ++i) {
    for (const auto& c : curves) {
      if (i >= c.used_at.size()) continue;
      out << i << ',' << c.domain << ',' << c.available << ',' << c.used_at[i] << ','
          << format_double(c.percentage(i)) << '\n';
    }
  }
}

}  // namespace sentssl
