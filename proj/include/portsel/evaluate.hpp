#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"
#include "portsel/scores.hpp"
#include "portsel/selectors.hpp"

namespace portsel {

struct eval_config {
  std::optional<double> timeout;  // defaults to the largest performance value
  double par_factor = 10.0;
  bool include_costs = true;

  void validate() const {
    if (timeout && !(*timeout > 0.0)) throw config_error("timeout must be positive");
    if (!(par_factor >= 1.0)) throw config_error("par_factor must be at least 1");
  }
};

// A baseline choice rule: a fixed or per-instance algorithm pick over a
// dataset. Baselines need no features, so they never pay feature costs.
struct selector {
  std::string name;
  std::function<int(const dataset&, int)> choose;  // algorithm column for instance i
  bool pays_costs = false;
};

// The perfect predictor: always the per-instance best algorithm.
inline selector vbs(const dataset&) {
  return {"vbs", [](const dataset& d, int i) { return d.best_index[i]; }, false};
}

// Per-instance ranking of the virtual best: algorithms ordered by their true
// performance.
inline prediction vbs_prediction(const dataset& d, int i) {
  std::vector<double> perf(d.algorithm_names.size());
  for (std::size_t j = 0; j < perf.size(); ++j) perf[j] = d.performances(i, j);
  return detail::rank_scores(perf, d.algorithm_names, d.minimize);
}

// Always the given algorithm.
inline selector fixed_choice(const dataset& d, const std::string& algorithm) {
  const int a = d.algorithm_index(algorithm);
  return {algorithm, [a](const dataset&, int) { return a; }, false};
}

enum class single_best_mode { performance, par, successes, count };

inline single_best_mode parse_single_best_mode(const std::string& s) {
  if (s == "performance") return single_best_mode::performance;
  if (s == "par") return single_best_mode::par;
  if (s == "successes") return single_best_mode::successes;
  if (s == "count") return single_best_mode::count;
  throw config_error("invalid single-best mode '" + s +
                     "' (expected performance, par, successes or count)");
}

// Per-algorithm aggregate the single-best variants rank by: cumulative
// performance, cumulative PAR score, number of successful runs, or the number
// of instances on which the algorithm is among the best.
inline std::vector<double> single_best_totals(const dataset& d,
                                              single_best_mode mode = single_best_mode::performance,
                                              eval_config cfg = {}) {
  cfg.validate();
  const std::size_t m = d.algorithm_names.size();
  std::vector<double> totals(m, 0.0);
  const bool needs_runs = mode == single_best_mode::par || mode == single_best_mode::successes;
  const double timeout = needs_runs ? resolve_timeout(d, cfg.timeout) : 0.0;
  for (std::size_t i = 0; i < d.n_instances(); ++i) {
    for (std::size_t a = 0; a < m; ++a) {
      switch (mode) {
        case single_best_mode::performance:
          totals[a] += d.performances(i, a);
          break;
        case single_best_mode::par:
          totals[a] += par_cell(d, i, a, timeout, cfg.par_factor);
          break;
        case single_best_mode::successes:
          totals[a] += run_success(d, i, a, timeout) ? 1.0 : 0.0;
          break;
        case single_best_mode::count:
          totals[a] +=
              std::count(d.best_sets[i].begin(), d.best_sets[i].end(), static_cast<int>(a));
          break;
      }
    }
  }
  return totals;
}

inline selector single_best(const dataset& d,
                            single_best_mode mode = single_best_mode::performance,
                            eval_config cfg = {}) {
  const auto totals = single_best_totals(d, mode, cfg);
  // performance/par: lower total wins under minimisation; successes/count:
  // higher always wins. Ties go to the earlier algorithm column.
  const bool lower_wins =
      (mode == single_best_mode::performance || mode == single_best_mode::par) && d.minimize;
  std::size_t best = 0;
  for (std::size_t a = 1; a < totals.size(); ++a)
    if (lower_wins ? totals[a] < totals[best] : totals[a] > totals[best]) best = a;
  std::string name = "single_best";
  if (mode == single_best_mode::par) name += "_par";
  if (mode == single_best_mode::successes) name += "_successes";
  if (mode == single_best_mode::count) name += "_count";
  const int choice = static_cast<int>(best);
  return {name, [choice](const dataset&, int) { return choice; }, false};
}

namespace detail {

// A run counts as solved when its recorded success flag holds and the
// effective time (performance plus any charged feature cost) stays under the
// timeout. The PAR score is that effective time, or factor * timeout.
inline double scored_par(const dataset& d, std::size_t i, std::size_t a, double cost,
                         double timeout, double factor) {
  if (!run_success(d, i, a, timeout)) return factor * timeout;
  const double effective = d.performances(i, a) + cost;
  if (effective >= timeout) return factor * timeout;
  return effective;
}

inline bool scored_success(const dataset& d, std::size_t i, std::size_t a, double cost,
                           double timeout) {
  return run_success(d, i, a, timeout) && d.performances(i, a) + cost < timeout;
}

inline double penalty(const dataset& d, std::size_t i, std::size_t a) {
  const double best = d.performances(i, d.best_index[i]);
  const double chosen = d.performances(i, a);
  return d.minimize ? chosen - best : best - chosen;
}

// Walks (instance, chosen algorithm, cost) in evaluation order and feeds each
// to `emit`. Three traversals: a baseline over a whole dataset, a baseline
// over the test partitions, or a model's stored test predictions.
template <class Emit>
void walk_choices(const dataset& d, const selector& s, const eval_config& cfg, Emit&& emit) {
  for (std::size_t i = 0; i < d.n_instances(); ++i) {
    const double cost = s.pays_costs && cfg.include_costs ? instance_cost(d, i) : 0.0;
    emit(i, static_cast<std::size_t>(s.choose(d, static_cast<int>(i))), cost);
  }
}

template <class Emit>
void walk_choices(const partitioning& p, const selector& s, const eval_config& cfg, Emit&& emit) {
  const dataset& d = *p.data;
  for (const auto& part : p.test_partitions)
    for (int i : part) {
      const double cost = s.pays_costs && cfg.include_costs ? instance_cost(d, i) : 0.0;
      emit(static_cast<std::size_t>(i), static_cast<std::size_t>(s.choose(d, i)), cost);
    }
}

template <class Emit>
void walk_choices(const partitioning& p, const selection_model& m, const eval_config& cfg,
                  Emit&& emit) {
  const dataset& d = *p.data;
  if (m.parts.test_partitions != p.test_partitions)
    throw validation_error("model was built on a different partitioning");
  for (std::size_t k = 0; k < p.test_partitions.size(); ++k) {
    const auto& part = p.test_partitions[k];
    if (m.predictions[k].size() != part.size())
      throw validation_error("prediction count does not match partition size");
    for (std::size_t j = 0; j < part.size(); ++j) {
      const std::size_t i = part[j];
      const std::size_t a = d.algorithm_index(m.predictions[k][j].best());
      const double cost = cfg.include_costs ? instance_cost(d, i) : 0.0;
      emit(i, a, cost);
    }
  }
}

}  // namespace detail

// Each evaluation function returns one value per evaluated instance, in
// dataset order for a plain dataset and in test-partition traversal order for
// a partitioning.

template <class Subject>
std::vector<double> par_scores(const Subject& subject, const auto& chooser, eval_config cfg = {}) {
  cfg.validate();
  const dataset& d = [&]() -> const dataset& {
    if constexpr (std::is_same_v<Subject, partitioning>) return *subject.data;
    else return subject;
  }();
  const double timeout = resolve_timeout(d, cfg.timeout);
  std::vector<double> out;
  detail::walk_choices(subject, chooser, cfg, [&](std::size_t i, std::size_t a, double cost) {
    out.push_back(detail::scored_par(d, i, a, cost, timeout, cfg.par_factor));
  });
  return out;
}

template <class Subject>
std::vector<bool> successes(const Subject& subject, const auto& chooser, eval_config cfg = {}) {
  cfg.validate();
  const dataset& d = [&]() -> const dataset& {
    if constexpr (std::is_same_v<Subject, partitioning>) return *subject.data;
    else return subject;
  }();
  const double timeout = resolve_timeout(d, cfg.timeout);
  std::vector<bool> out;
  detail::walk_choices(subject, chooser, cfg, [&](std::size_t i, std::size_t a, double cost) {
    out.push_back(detail::scored_success(d, i, a, cost, timeout));
  });
  return out;
}

// Extra performance of the chosen algorithm over the per-instance best; no
// cost or PAR adjustment, zero whenever a best algorithm was chosen.
template <class Subject>
std::vector<double> misclassification_penalties(const Subject& subject, const auto& chooser) {
  const dataset& d = [&]() -> const dataset& {
    if constexpr (std::is_same_v<Subject, partitioning>) return *subject.data;
    else return subject;
  }();
  std::vector<double> out;
  eval_config cfg;
  cfg.include_costs = false;
  detail::walk_choices(subject, chooser, cfg, [&](std::size_t i, std::size_t a, double) {
    out.push_back(detail::penalty(d, i, a));
  });
  return out;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw error("mean of zero values");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline int solved_count(const std::vector<bool>& v) {
  return static_cast<int>(std::count(v.begin(), v.end(), true));
}

}  // namespace portsel
