#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"
#include "portsel/random.hpp"

namespace portsel {

// Ordered, disjoint test partitions over a dataset with their complementary
// training sets. One test partition for a train-test split, k for k-fold
// cross-validation. Index sets are sorted ascending so downstream training is
// independent of shuffle order.
struct partitioning {
  dataset_ptr data;
  std::vector<std::vector<int>> test_partitions;
  std::vector<std::vector<int>> train_partitions;
  std::uint64_t seed = default_seed;
};

namespace detail {

// Instances grouped by canonical best label (group order = algorithm column
// order), each group shuffled by the seeded generator.
inline std::vector<std::vector<int>> shuffled_label_groups(const dataset& d, rng& r) {
  std::vector<std::vector<int>> groups(d.algorithm_names.size());
  for (std::size_t i = 0; i < d.n_instances(); ++i)
    groups[d.best_index[i]].push_back(static_cast<int>(i));
  for (auto& g : groups) shuffle(g, r);
  return groups;
}

inline std::vector<int> shuffled_all(const dataset& d, rng& r) {
  std::vector<int> idx(d.n_instances());
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, r);
  return idx;
}

inline void sort_partitions(partitioning& p) {
  for (auto& t : p.test_partitions) std::sort(t.begin(), t.end());
  for (auto& t : p.train_partitions) std::sort(t.begin(), t.end());
}

inline std::vector<int> complement(std::size_t n, const std::vector<int>& part) {
  std::vector<char> in(n, 0);
  for (int i : part) in[i] = 1;
  std::vector<int> out;
  out.reserve(n - part.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace detail

// Single stratified train-test split. |train| = round(ratio * n); under
// stratification each label contributes floor or ceil of its proportional
// share (largest-remainder apportionment), so per-label counts stay within
// one of ratio-proportional.
inline partitioning train_test(dataset_ptr data, double ratio = 0.6, bool stratify = true,
                               std::uint64_t seed = default_seed) {
  const dataset& d = *data;
  if (!(ratio > 0.0 && ratio < 1.0)) throw config_error("train-test ratio must be in (0, 1)");
  const std::size_t n = d.n_instances();
  if (n < 2) throw validation_error("train-test split needs at least 2 instances");
  const std::size_t train_size = static_cast<std::size_t>(std::floor(ratio * n + 0.5));
  if (train_size == 0 || train_size == n)
    throw config_error("ratio leaves an empty train or test partition");

  rng r(seed);
  std::vector<int> train;
  if (stratify) {
    auto groups = detail::shuffled_label_groups(d, r);
    std::vector<std::size_t> take(groups.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double share = ratio * groups[g].size();
      take[g] = static_cast<std::size_t>(std::floor(share));
      total += take[g];
      remainders.emplace_back(share - std::floor(share), g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t extras = train_size - total;
    for (std::size_t k = 0; extras > 0; k = (k + 1) % remainders.size()) {
      const std::size_t g = remainders[k].second;
      if (take[g] < groups[g].size()) {  // never take more than a group holds
        ++take[g];
        --extras;
      }
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
      train.insert(train.end(), groups[g].begin(), groups[g].begin() + take[g]);
  } else {
    auto idx = detail::shuffled_all(d, r);
    train.assign(idx.begin(), idx.begin() + train_size);
  }

  partitioning p{std::move(data), {detail::complement(n, train)}, {std::move(train)}, seed};
  detail::sort_partitions(p);
  return p;
}

// k stratified cross-validation folds. Instances are dealt round-robin with a
// running fold position that carries across label groups, so fold sizes stay
// within one overall and per label.
inline partitioning cv_folds(dataset_ptr data, int nfolds = 10, bool stratify = true,
                             std::uint64_t seed = default_seed) {
  const dataset& d = *data;
  const std::size_t n = d.n_instances();
  if (nfolds < 2 || static_cast<std::size_t>(nfolds) > n)
    throw config_error("nfolds must be between 2 and the number of instances");

  rng r(seed);
  partitioning p;
  p.seed = seed;
  p.test_partitions.assign(nfolds, {});
  std::size_t pos = 0;
  auto deal = [&](const std::vector<int>& idx) {
    for (int i : idx) {
      p.test_partitions[pos % nfolds].push_back(i);
      ++pos;
    }
  };
  if (stratify) {
    for (const auto& g : detail::shuffled_label_groups(d, r)) deal(g);
  } else {
    deal(detail::shuffled_all(d, r));
  }
  for (const auto& t : p.test_partitions) p.train_partitions.push_back(detail::complement(n, t));
  p.data = std::move(data);
  detail::sort_partitions(p);
  return p;
}

}  // namespace portsel
