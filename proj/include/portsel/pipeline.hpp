#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "portsel/builder_config.hpp"
#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"
#include "portsel/learners.hpp"
#include "portsel/partition.hpp"
#include "portsel/selectors.hpp"
#include "portsel/table.hpp"

namespace portsel {

// Staged selection in the style of portfolio SAT solvers: a cheap presolver
// dispatches easy instances, a gate regressor predicts the feature
// computation time and falls back to a backup solver when it is too high, an
// optional class split (e.g. satisfiable vs unsatisfiable) routes instances
// to per-class selectors trained on the remaining data.

// Drops the instances a presolver run within `limit` would already solve.
inline dataset_ptr presolve_filter(const dataset& d, const std::string& presolver, double limit) {
  if (limit < 0.0) throw config_error("presolve limit must not be negative");
  const int a = d.algorithm_index(presolver);
  std::vector<int> keep;
  for (std::size_t i = 0; i < d.n_instances(); ++i)
    if (d.performances(i, a) > limit) keep.push_back(static_cast<int>(i));
  if (keep.empty())
    throw validation_error("presolve filter removed every instance (limit " +
                           std::to_string(limit) + ")");
  return subset_instances(d, keep);
}

struct staged_config {
  std::string presolver;
  double presolve_limit = 1.0;
  std::string backup;
  // gate: only active when reduced features and feature times are supplied
  regressor_spec gate_regressor{};
  std::optional<double> feature_time_limit;
  // class split
  std::optional<classifier_spec> class_classifier;
  builder_config builder{};
  bool minimize = true;
  int nfolds = 10;
  bool stratify = true;
  std::uint64_t seed = default_seed;
  int jobs = 1;
};

struct staged_selector {
  staged_config cfg;
  std::shared_ptr<regressor_model> gate;           // null when no gate
  std::shared_ptr<classifier_model> class_model;   // null when no class split
  std::vector<std::string> class_names;            // single "" entry when no split
  std::vector<selection_model> class_selectors;    // parallel to class_names
  std::vector<std::string> warnings;
  std::size_t n_in_scope = 0;                      // instances surviving the filters
};

enum class stage { presolved, backup, selected };

struct staged_decision {
  stage taken;
  std::string algorithm;
  std::optional<prediction> pred;  // set when taken == stage::selected
};

// What the decision procedure sees for one new instance: whether the caller's
// presolver run already solved it, the cheap feature subset, and a supplier
// for the full feature row (whose failure routes to the backup solver).
struct staged_input {
  bool presolved = false;
  std::vector<double> reduced_features;
  std::function<std::optional<std::vector<double>>()> full_features;
};

namespace detail {

// key -> row map over the join-key columns shared with the performance table
inline std::unordered_map<std::string, int> side_table_index(
    const table& t, const std::vector<std::string>& key, const std::string& what) {
  t.check_rectangular();
  return key_index(key_table(t, key, what), what);
}

inline int single_value_column(const table& t, const std::vector<std::string>& key,
                               const std::string& what) {
  const auto kt = key_table(t, key, what);
  if (kt.value_cols.size() != 1)
    throw schema_error(what + " must have exactly one value column besides the join key");
  return kt.value_cols.front();
}

}  // namespace detail

// Trains the staged selector from raw tables. The tables merge on the columns
// the feature and performance tables share; the training pool for the
// selectors keeps only instances the presolver does not dispatch and (when a
// gate is configured) whose recorded feature time is under the limit.
inline staged_selector build_staged(const staged_config& cfg, const table& feature_table,
                                    const std::optional<table>& reduced_feature_table,
                                    const table& performance_table,
                                    const std::optional<table>& class_table = {},
                                    const std::optional<table>& feature_times = {}) {
  feature_table.check_rectangular();
  performance_table.check_rectangular();
  if (!(cfg.presolve_limit > 0.0)) throw config_error("presolve limit must be positive");
  if (performance_table.column_index(cfg.presolver) < 0)
    throw schema_error("presolver '" + cfg.presolver + "' is not a performance column");
  if (performance_table.column_index(cfg.backup) < 0)
    throw schema_error("backup solver '" + cfg.backup + "' is not a performance column");

  std::vector<std::string> key;
  for (const auto& c : performance_table.columns)
    if (feature_table.column_index(c) >= 0) key.push_back(c);
  if (key.empty()) throw join_error("feature and performance tables share no columns");

  const bool gate_active = cfg.feature_time_limit.has_value();
  if (gate_active && (!reduced_feature_table || !feature_times))
    throw config_error("a feature-time gate needs reduced features and recorded feature times");

  staged_selector s;
  s.cfg = cfg;

  // gate regressor: reduced features -> recorded feature time, on all instances
  std::unordered_map<std::string, int> time_rows;
  int time_col = -1;
  if (gate_active) {
    const table& rt = *reduced_feature_table;
    rt.check_rectangular();
    const auto rkt = detail::key_table(rt, key, "reduced feature table");
    for (int c : rkt.value_cols)
      if (feature_table.column_index(rt.columns[c]) < 0)
        throw schema_error("reduced feature '" + rt.columns[c] +
                           "' is not part of the full feature set");
    time_rows = detail::side_table_index(*feature_times, key, "feature time table");
    time_col = detail::single_value_column(*feature_times, key, "feature time table");

    matrix X(0, rkt.value_cols.size());
    std::vector<double> y;
    for (std::size_t r = 0; r < rt.rows.size(); ++r) {
      auto it = time_rows.find(rkt.key_of(r));
      if (it == time_rows.end()) continue;
      std::vector<double> row;
      for (int c : rkt.value_cols)
        row.push_back(parse_numeric_cell(rt.rows[r][c], "reduced feature '" + rt.columns[c] + "'"));
      X.append_row(row);
      y.push_back(parse_numeric_cell(feature_times->rows[it->second][time_col], "feature time"));
    }
    if (X.rows() == 0) throw join_error("no instances shared by reduced features and feature times");
    s.gate = cfg.gate_regressor.trainer()(X, y);
  }

  // in-scope mask over performance rows: not presolved, feature time under limit
  const auto pkt = detail::key_table(performance_table, key, "performance table");
  const int presolver_col = performance_table.column_index(cfg.presolver);
  std::vector<char> in_scope(performance_table.rows.size(), 0);
  for (std::size_t r = 0; r < performance_table.rows.size(); ++r) {
    const double presolver_perf = parse_numeric_cell(
        performance_table.rows[r][presolver_col], "performance of presolver");
    bool keep = presolver_perf > cfg.presolve_limit;
    if (keep && gate_active) {
      auto it = time_rows.find(pkt.key_of(r));
      if (it == time_rows.end())
        throw schema_error("feature time table has no row for an instance in scope");
      const double t = parse_numeric_cell(feature_times->rows[it->second][time_col], "feature time");
      keep = t < *cfg.feature_time_limit;
    }
    in_scope[r] = keep;
  }
  s.n_in_scope = static_cast<std::size_t>(std::count(in_scope.begin(), in_scope.end(), 1));
  if (s.n_in_scope == 0)
    throw validation_error("presolve and feature-time filters removed every instance");

  // class labels per in-scope performance row
  std::vector<std::string> row_class(performance_table.rows.size());
  if (cfg.class_classifier) {
    if (!class_table) throw config_error("a class split needs a class table");
    const auto class_rows = detail::side_table_index(*class_table, key, "class table");
    const int class_col = detail::single_value_column(*class_table, key, "class table");
    for (std::size_t r = 0; r < performance_table.rows.size(); ++r) {
      if (!in_scope[r]) continue;
      auto it = class_rows.find(pkt.key_of(r));
      if (it == class_rows.end())
        throw validation_error("class table is missing an instance that is in scope");
      row_class[r] = class_table->rows[it->second][class_col];
      if (std::find(s.class_names.begin(), s.class_names.end(), row_class[r]) ==
          s.class_names.end())
        s.class_names.push_back(row_class[r]);
    }
    if (s.class_names.size() == 1)
      s.warnings.push_back("class table has a single class '" + s.class_names.front() +
                           "'; training one selector");
  } else {
    s.class_names.push_back("");
  }

  // per-class selector on the filtered data, via the regular merge
  for (std::size_t c = 0; c < s.class_names.size(); ++c) {
    table subset{performance_table.columns, {}};
    for (std::size_t r = 0; r < performance_table.rows.size(); ++r)
      if (in_scope[r] && (!cfg.class_classifier || row_class[r] == s.class_names[c]))
        subset.rows.push_back(performance_table.rows[r]);
    auto data = input(feature_table, subset, {}, {}, cfg.minimize);
    const int nfolds = std::min<int>(cfg.nfolds, static_cast<int>(data->n_instances()));
    auto folds = cv_folds(std::move(data), nfolds, cfg.stratify, derive_seed(cfg.seed, c));
    s.class_selectors.push_back(cfg.builder.build(folds, cfg.jobs));
  }

  // class predictor on the full features of the in-scope instances
  if (cfg.class_classifier && s.class_names.size() > 1) {
    const auto fkt = detail::key_table(feature_table, key, "feature table");
    const auto frow = detail::key_index(fkt, "feature table");
    matrix X(0, fkt.value_cols.size());
    std::vector<std::string> y;
    for (std::size_t r = 0; r < performance_table.rows.size(); ++r) {
      if (!in_scope[r]) continue;
      auto it = frow.find(pkt.key_of(r));
      if (it == frow.end()) continue;
      std::vector<double> row;
      for (int col : fkt.value_cols)
        row.push_back(parse_numeric_cell(feature_table.rows[it->second][col],
                                         "feature '" + feature_table.columns[col] + "'"));
      X.append_row(row);
      y.push_back(row_class[r]);
    }
    s.class_model = cfg.class_classifier->trainer()(X, y);
  }

  return s;
}

// One decision for a new instance. Stage order: the caller's presolver
// outcome, the feature-time gate, then the (class-routed) selector.
inline staged_decision decide(const staged_selector& s, const staged_input& in) {
  if (in.presolved) return {stage::presolved, s.cfg.presolver, {}};
  if (s.gate) {
    const double t = s.gate->predict_one(in.reduced_features);
    if (t > *s.cfg.feature_time_limit) return {stage::backup, s.cfg.backup, {}};
  }
  std::optional<std::vector<double>> features;
  if (in.full_features) {
    try {
      features = in.full_features();
    } catch (...) {
      features = std::nullopt;
    }
  }
  if (!features) return {stage::backup, s.cfg.backup, {}};

  std::size_t which = 0;
  if (s.class_model) {
    const std::string label = s.class_model->predict_one(*features);
    const auto it = std::find(s.class_names.begin(), s.class_names.end(), label);
    if (it == s.class_names.end()) return {stage::backup, s.cfg.backup, {}};
    which = static_cast<std::size_t>(it - s.class_names.begin());
  }
  auto preds = s.class_selectors[which].predictor(single_row(std::span<const double>(*features)));
  return {stage::selected, preds.front().best(), preds.front()};
}

}  // namespace portsel
