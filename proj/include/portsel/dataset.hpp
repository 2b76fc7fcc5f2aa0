#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "portsel/errors.hpp"
#include "portsel/matrix.hpp"
#include "portsel/table.hpp"

namespace portsel {

// Feature computation costs, one of three forms:
//   scalar        - one overhead value charged to every instance
//   per-feature   - matrix [instance x feature], summed over the features in use
//   grouped       - named feature groups with a matrix [instance x group],
//                   summed over the groups that contain a feature in use
struct per_feature_costs {
  matrix values;  // columns ordered like dataset feature_names
};

struct grouped_costs {
  std::vector<std::string> group_names;
  std::vector<std::vector<std::string>> group_members;  // parallel to group_names
  matrix values;                                        // [instance x group]
};

using feature_costs = std::variant<double, per_feature_costs, grouped_costs>;

// The merged instance table everything else operates on. Immutable after
// construction; share it via dataset_ptr.
struct dataset {
  std::vector<std::string> instance_ids;
  std::vector<std::string> feature_names;
  std::vector<std::string> algorithm_names;
  matrix features;      // [instance x feature]
  matrix performances;  // [instance x algorithm]
  std::optional<bool_matrix> successes;
  std::optional<feature_costs> costs;
  bool minimize = true;

  // Derived: per-instance best algorithms (ties retained) and the canonical
  // label, ties broken by the earliest algorithm column.
  std::vector<std::vector<int>> best_sets;
  std::vector<int> best_index;

  std::size_t n_instances() const { return instance_ids.size(); }

  int algorithm_index(const std::string& name) const {
    for (std::size_t j = 0; j < algorithm_names.size(); ++j)
      if (algorithm_names[j] == name) return static_cast<int>(j);
    throw schema_error("unknown algorithm '" + name + "'");
  }
};

using dataset_ptr = std::shared_ptr<const dataset>;

namespace detail {

inline void compute_best(dataset& d) {
  const std::size_t n = d.performances.rows();
  const std::size_t m = d.performances.cols();
  d.best_sets.assign(n, {});
  d.best_index.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = d.performances(i, 0);
    for (std::size_t j = 1; j < m; ++j) {
      const double v = d.performances(i, j);
      if (d.minimize ? v < best : v > best) best = v;
    }
    for (std::size_t j = 0; j < m; ++j)
      if (d.performances(i, j) == best) d.best_sets[i].push_back(static_cast<int>(j));
    d.best_index[i] = d.best_sets[i].front();
  }
}

inline void validate_costs(const dataset& d) {
  if (!d.costs) return;
  const std::size_t n = d.n_instances();
  auto check_matrix = [&](const matrix& m, std::size_t cols, const char* what) {
    if (m.rows() != n || m.cols() != cols)
      throw schema_error(std::string(what) + " cost matrix has wrong shape");
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
          throw validation_error("feature costs must be finite and non-negative");
  };
  if (const double* scalar = std::get_if<double>(&*d.costs)) {
    if (!(*scalar >= 0.0) || !std::isfinite(*scalar))
      throw validation_error("feature costs must be finite and non-negative");
  } else if (const auto* pf = std::get_if<per_feature_costs>(&*d.costs)) {
    check_matrix(pf->values, d.feature_names.size(), "per-feature");
  } else {
    const auto& g = std::get<grouped_costs>(*d.costs);
    if (g.group_names.size() != g.group_members.size())
      throw schema_error("cost group names and member lists differ in length");
    check_matrix(g.values, g.group_names.size(), "group");
    // every dataset feature must belong to exactly one group
    for (const auto& f : d.feature_names) {
      int owners = 0;
      for (const auto& members : g.group_members)
        owners += static_cast<int>(std::count(members.begin(), members.end(), f));
      if (owners != 1)
        throw validation_error("feature '" + f + "' must belong to exactly one cost group, found " +
                               std::to_string(owners));
    }
  }
}

inline dataset_ptr finish(dataset d) {
  if (d.algorithm_names.empty()) throw schema_error("dataset has no algorithm columns");
  if (d.instance_ids.empty()) throw validation_error("dataset has no instances");
  compute_best(d);
  validate_costs(d);
  return std::make_shared<const dataset>(std::move(d));
}

}  // namespace detail

// Pre-join cost input: a plain number, a per-feature cost table (key columns
// plus one column per feature), or group definitions with a per-group table.
struct grouped_cost_table {
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  table costs;
};

using cost_spec = std::variant<double, table, grouped_cost_table>;

namespace detail {

struct keyed_table {
  const table* t;
  std::vector<int> key_cols;    // indices of the join-key columns in t
  std::vector<int> value_cols;  // all remaining columns

  std::string key_of(std::size_t row) const {
    std::string k;
    for (int c : key_cols) {
      k += t->rows[row][c];
      k.push_back('\x1f');
    }
    return k;
  }
};

inline keyed_table key_table(const table& t, const std::vector<std::string>& key,
                             const std::string& what) {
  keyed_table kt{&t, {}, {}};
  for (const auto& k : key) {
    const int c = t.column_index(k);
    if (c < 0) throw join_error(what + " is missing join column '" + k + "'");
    kt.key_cols.push_back(c);
  }
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (std::find(key.begin(), key.end(), t.columns[j]) == key.end())
      kt.value_cols.push_back(static_cast<int>(j));
  return kt;
}

inline std::unordered_map<std::string, int> key_index(const keyed_table& kt, const std::string& what) {
  std::unordered_map<std::string, int> idx;
  idx.reserve(kt.t->rows.size());
  for (std::size_t r = 0; r < kt.t->rows.size(); ++r)
    if (!idx.emplace(kt.key_of(r), static_cast<int>(r)).second)
      throw validation_error("duplicate instance id in " + what);
  return idx;
}

// Aligns a keyed side table (successes, costs) with the merged instance order.
inline std::vector<int> align_rows(const keyed_table& kt, const std::vector<std::string>& keys,
                                   const std::string& what) {
  auto idx = key_index(kt, what);
  std::vector<int> rows;
  rows.reserve(keys.size());
  for (const auto& k : keys) {
    auto it = idx.find(k);
    if (it == idx.end()) throw schema_error(what + " has no row for instance key");
    rows.push_back(it->second);
  }
  return rows;
}

}  // namespace detail

// Merges the feature and performance tables on their shared columns and
// builds the dataset. Instances are kept in performance-table order; rows
// that do not match on the other side are dropped. When id_column is given
// (file-based ingestion) it must be one of the shared columns and supplies
// the instance ids; otherwise the ids are the joined key values.
inline dataset_ptr input(const table& feature_table, const table& performance_table,
                         const std::optional<table>& success_table = {},
                         const std::optional<cost_spec>& costs = {}, bool minimize = true,
                         const std::optional<std::string>& id_column = {}) {
  feature_table.check_rectangular();
  performance_table.check_rectangular();

  std::vector<std::string> shared;
  for (const auto& c : performance_table.columns)
    if (feature_table.column_index(c) >= 0) shared.push_back(c);
  if (shared.empty()) throw join_error("feature and performance tables share no columns");
  if (id_column && std::find(shared.begin(), shared.end(), *id_column) == shared.end())
    throw join_error("id column '" + *id_column + "' is not shared by both tables");

  auto ft = detail::key_table(feature_table, shared, "feature table");
  auto pt = detail::key_table(performance_table, shared, "performance table");
  auto feature_rows = detail::key_index(ft, "feature table");
  // reject duplicates on the performance side as well
  (void)detail::key_index(pt, "performance table");

  dataset d;
  d.minimize = minimize;
  for (int c : ft.value_cols) d.feature_names.push_back(feature_table.columns[c]);
  for (int c : pt.value_cols) d.algorithm_names.push_back(performance_table.columns[c]);
  if (d.algorithm_names.empty())
    throw schema_error("performance table has no algorithm columns besides the join key");

  const int id_col = id_column ? performance_table.column_index(*id_column) : -1;
  std::vector<std::string> keys;
  std::vector<int> f_rows, p_rows;
  for (std::size_t r = 0; r < performance_table.rows.size(); ++r) {
    const std::string key = pt.key_of(r);
    auto it = feature_rows.find(key);
    if (it == feature_rows.end()) continue;  // unmatched performance row: discarded
    keys.push_back(key);
    f_rows.push_back(it->second);
    p_rows.push_back(static_cast<int>(r));
    if (id_col >= 0) {
      d.instance_ids.push_back(performance_table.rows[r][id_col]);
    } else if (pt.key_cols.size() == 1) {
      d.instance_ids.push_back(performance_table.rows[r][pt.key_cols[0]]);
    } else {
      std::string id;
      for (std::size_t k = 0; k < pt.key_cols.size(); ++k)
        id += (k ? "|" : "") + performance_table.rows[r][pt.key_cols[k]];
      d.instance_ids.push_back(id);
    }
  }
  if (keys.empty()) throw join_error("no instances remain after merging the tables");
  {
    auto sorted = d.instance_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw validation_error("instance ids are not unique after the merge");
  }

  const std::size_t n = keys.size();
  d.features = matrix(n, d.feature_names.size());
  d.performances = matrix(n, d.algorithm_names.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ft.value_cols.size(); ++j)
      d.features(i, j) = parse_numeric_cell(
          feature_table.rows[f_rows[i]][ft.value_cols[j]],
          "feature '" + d.feature_names[j] + "' of instance " + d.instance_ids[i]);
    for (std::size_t j = 0; j < pt.value_cols.size(); ++j)
      d.performances(i, j) = parse_numeric_cell(
          performance_table.rows[p_rows[i]][pt.value_cols[j]],
          "performance '" + d.algorithm_names[j] + "' of instance " + d.instance_ids[i]);
  }

  if (success_table) {
    success_table->check_rectangular();
    auto st = detail::key_table(*success_table, shared, "success table");
    std::vector<int> cols(d.algorithm_names.size(), -1);
    if (st.value_cols.size() != d.algorithm_names.size())
      throw schema_error("success table columns do not match the algorithm columns");
    for (std::size_t j = 0; j < d.algorithm_names.size(); ++j) {
      const int c = success_table->column_index(d.algorithm_names[j]);
      if (c < 0)
        throw schema_error("success table is missing algorithm column '" + d.algorithm_names[j] + "'");
      cols[j] = c;
    }
    auto rows = detail::align_rows(st, keys, "success table");
    bool_matrix s(n, d.algorithm_names.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d.algorithm_names.size(); ++j)
        s.set(i, j, parse_bool_cell(success_table->rows[rows[i]][cols[j]],
                                    "success '" + d.algorithm_names[j] + "' of instance " +
                                        d.instance_ids[i]));
    d.successes = std::move(s);
  }

  if (costs) {
    if (const double* scalar = std::get_if<double>(&*costs)) {
      d.costs = *scalar;
    } else if (const table* ct = std::get_if<table>(&*costs)) {
      ct->check_rectangular();
      auto kt = detail::key_table(*ct, shared, "cost table");
      if (kt.value_cols.size() != d.feature_names.size())
        throw schema_error("cost table columns do not match the feature columns");
      std::vector<int> cols;
      for (const auto& f : d.feature_names) {
        const int c = ct->column_index(f);
        if (c < 0) throw schema_error("cost table is missing feature column '" + f + "'");
        cols.push_back(c);
      }
      auto rows = detail::align_rows(kt, keys, "cost table");
      per_feature_costs pf{matrix(n, cols.size())};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
          pf.values(i, j) = parse_numeric_cell(ct->rows[rows[i]][cols[j]],
                                               "cost of feature '" + d.feature_names[j] + "'");
      d.costs = std::move(pf);
    } else {
      const auto& gc = std::get<grouped_cost_table>(*costs);
      gc.costs.check_rectangular();
      auto kt = detail::key_table(gc.costs, shared, "group cost table");
      grouped_costs g;
      std::vector<int> cols;
      for (const auto& [name, members] : gc.groups) {
        const int c = gc.costs.column_index(name);
        if (c < 0) throw schema_error("group cost table is missing group column '" + name + "'");
        g.group_names.push_back(name);
        g.group_members.push_back(members);
        cols.push_back(c);
      }
      auto rows = detail::align_rows(kt, keys, "group cost table");
      g.values = matrix(n, cols.size());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
          g.values(i, j) = parse_numeric_cell(gc.costs.rows[rows[i]][cols[j]],
                                              "cost of group '" + g.group_names[j] + "'");
      d.costs = std::move(g);
    }
  }

  return detail::finish(std::move(d));
}

inline std::vector<std::string> best_labels(const dataset& d) {
  std::vector<std::string> labels;
  labels.reserve(d.n_instances());
  for (int b : d.best_index) labels.push_back(d.algorithm_names[b]);
  return labels;
}

// Keeps the given instances, in the order given.
inline dataset_ptr subset_instances(const dataset& d, std::span<const int> keep) {
  if (keep.empty()) throw validation_error("instance subset is empty");
  dataset out;
  out.minimize = d.minimize;
  out.feature_names = d.feature_names;
  out.algorithm_names = d.algorithm_names;
  for (int i : keep) out.instance_ids.push_back(d.instance_ids[i]);
  out.features = select_rows(d.features, keep);
  out.performances = select_rows(d.performances, keep);
  if (d.successes) {
    bool_matrix s(keep.size(), d.algorithm_names.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = 0; j < d.algorithm_names.size(); ++j)
        s.set(i, j, (*d.successes)(keep[i], j));
    out.successes = std::move(s);
  }
  if (d.costs) {
    if (const double* scalar = std::get_if<double>(&*d.costs)) {
      out.costs = *scalar;
    } else if (const auto* pf = std::get_if<per_feature_costs>(&*d.costs)) {
      out.costs = per_feature_costs{select_rows(pf->values, keep)};
    } else {
      const auto& g = std::get<grouped_costs>(*d.costs);
      out.costs = grouped_costs{g.group_names, g.group_members, select_rows(g.values, keep)};
    }
  }
  return detail::finish(std::move(out));
}

// Keeps the given feature columns; instances, performances and successes are
// untouched. Per-feature costs are restricted alongside; grouped costs keep
// their definitions (groups without any remaining feature stop being charged).
inline dataset_ptr restrict_features(const dataset& d, const std::vector<std::string>& kept) {
  if (kept.empty()) throw validation_error("cannot restrict a dataset to zero features");
  std::vector<int> cols;
  for (const auto& f : kept) {
    bool found = false;
    for (std::size_t j = 0; j < d.feature_names.size(); ++j)
      if (d.feature_names[j] == f) {
        cols.push_back(static_cast<int>(j));
        found = true;
        break;
      }
    if (!found) throw schema_error("unknown feature '" + f + "'");
  }
  dataset out = d;
  out.feature_names = kept;
  out.features = select_cols(d.features, cols);
  if (d.costs) {
    if (const auto* pf = std::get_if<per_feature_costs>(&*d.costs))
      out.costs = per_feature_costs{select_cols(pf->values, cols)};
  }
  out.best_sets.clear();
  return detail::finish(std::move(out));
}

// Replaces the performance matrix (and optionally successes); best labels are
// recomputed. Used by censored-value imputation.
inline dataset_ptr with_performances(const dataset& d, matrix performances,
                                     std::optional<bool_matrix> successes) {
  if (performances.rows() != d.n_instances() || performances.cols() != d.algorithm_names.size())
    throw schema_error("replacement performance matrix has wrong shape");
  dataset out = d;
  out.performances = std::move(performances);
  out.successes = std::move(successes);
  return detail::finish(std::move(out));
}

// Feature-computation overhead charged to instance i under the current
// feature set.
inline double instance_cost(const dataset& d, std::size_t i) {
  if (!d.costs) return 0.0;
  if (const double* scalar = std::get_if<double>(&*d.costs)) return *scalar;
  if (const auto* pf = std::get_if<per_feature_costs>(&*d.costs)) {
    double sum = 0.0;
    for (std::size_t j = 0; j < pf->values.cols(); ++j) sum += pf->values(i, j);
    return sum;
  }
  const auto& g = std::get<grouped_costs>(*d.costs);
  double sum = 0.0;
  for (std::size_t j = 0; j < g.group_names.size(); ++j) {
    bool used = false;
    for (const auto& f : g.group_members[j])
      if (std::find(d.feature_names.begin(), d.feature_names.end(), f) != d.feature_names.end()) {
        used = true;
        break;
      }
    if (used) sum += g.values(i, j);
  }
  return sum;
}

}  // namespace portsel
