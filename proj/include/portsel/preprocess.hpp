#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"
#include "portsel/learners.hpp"
#include "portsel/matrix.hpp"

namespace portsel {

// Per-feature min-max scaler targeting [-1, 1]. Fitted on training rows only;
// the same factors are applied to anything seen later, so values outside the
// fitted range land outside [-1, 1] (no clipping). Constant features map to 0.
struct scaler {
  std::vector<double> lo, hi;

  matrix apply(const matrix& rows) const {
    detail::check_schema(rows.cols(), lo.size());
    matrix out(rows.rows(), rows.cols());
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      const double span = hi[j] - lo[j];
      for (std::size_t i = 0; i < rows.rows(); ++i)
        out(i, j) = span == 0.0 ? 0.0 : 2.0 * (rows(i, j) - lo[j]) / span - 1.0;
    }
    return out;
  }
};

inline scaler fit_scaler(const matrix& rows) {
  if (rows.rows() == 0) throw validation_error("cannot fit a scaler on zero rows");
  scaler s;
  s.lo.assign(rows.cols(), std::numeric_limits<double>::infinity());
  s.hi.assign(rows.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < rows.rows(); ++i)
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      s.lo[j] = std::min(s.lo[j], rows(i, j));
      s.hi[j] = std::max(s.hi[j], rows(i, j));
    }
  return s;
}

inline matrix apply_scaler(const scaler& s, const matrix& rows) { return s.apply(rows); }

// Feature preprocessing hook for the model builders: fitted on the training
// rows of each partition and applied to everything that reaches the models,
// including rows passed to the full-data predictor later.
using row_transform = std::function<matrix(const matrix&)>;
using preprocessor = std::function<row_transform(const matrix&)>;

inline preprocessor normalize() {
  return [](const matrix& train_rows) -> row_transform {
    const scaler s = fit_scaler(train_rows);
    return [s](const matrix& rows) { return s.apply(rows); };
  };
}

// ---- feature filtering ----

struct variance_filter {
  double threshold = 0.0;  // drop features with variance <= threshold
};

struct correlation_filter {
  double threshold = 0.95;  // drop the later feature of a pair with |r| >= threshold
};

// Custom hook: per-feature scores; features scoring > threshold are kept.
struct scored_filter {
  std::function<std::vector<double>(const dataset&)> scorer;
  double threshold = 0.0;
};

using filter_method = std::variant<variance_filter, correlation_filter, scored_filter>;

struct filter_report {
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  std::vector<double> scores;  // aligned with the original feature order
};

namespace detail {

inline double column_variance(const matrix& m, std::size_t j) {
  const std::size_t n = m.rows();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += m(i, j);
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (m(i, j) - mean) * (m(i, j) - mean);
  return var / n;
}

// Pearson correlation; zero-variance columns count as uncorrelated.
inline double column_correlation(const matrix& m, std::size_t a, std::size_t b) {
  const std::size_t n = m.rows();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += m(i, a);
    mb += m(i, b);
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (m(i, a) - ma) * (m(i, b) - mb);
    saa += (m(i, a) - ma) * (m(i, a) - ma);
    sbb += (m(i, b) - mb) * (m(i, b) - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

// Restricts the dataset to the features the method keeps. Instances,
// performances and successes are untouched.
inline std::pair<dataset_ptr, filter_report> feature_filter(const filter_method& method,
                                                            dataset_ptr data) {
  const dataset& d = *data;
  const std::size_t f = d.feature_names.size();
  std::vector<bool> keep(f, true);
  filter_report report;
  report.scores.assign(f, 0.0);

  if (const auto* vf = std::get_if<variance_filter>(&method)) {
    for (std::size_t j = 0; j < f; ++j) {
      report.scores[j] = detail::column_variance(d.features, j);
      keep[j] = report.scores[j] > vf->threshold;
    }
  } else if (const auto* cf = std::get_if<correlation_filter>(&method)) {
    for (std::size_t a = 0; a < f; ++a) {
      if (!keep[a]) continue;
      for (std::size_t b = a + 1; b < f; ++b) {
        if (!keep[b]) continue;
        const double r = std::abs(detail::column_correlation(d.features, a, b));
        report.scores[b] = std::max(report.scores[b], r);
        if (r >= cf->threshold) keep[b] = false;
      }
    }
  } else {
    const auto& sf = std::get<scored_filter>(method);
    report.scores = sf.scorer(d);
    if (report.scores.size() != f)
      throw schema_error("feature scorer returned " + std::to_string(report.scores.size()) +
                         " scores for " + std::to_string(f) + " features");
    for (std::size_t j = 0; j < f; ++j) keep[j] = report.scores[j] > sf.threshold;
  }

  for (std::size_t j = 0; j < f; ++j)
    (keep[j] ? report.kept : report.dropped).push_back(d.feature_names[j]);
  if (report.kept.empty())
    throw validation_error("feature filter dropped every feature; relax the threshold");
  if (report.dropped.empty()) return {std::move(data), std::move(report)};
  return {restrict_features(d, report.kept), std::move(report)};
}

// ---- censored-runtime imputation ----

struct imputation_result {
  dataset_ptr data;
  bool converged = true;
  int iterations = 0;       // largest per-algorithm fit count
  int imputed_cells = 0;
  int below_recorded = 0;   // imputed values below the recorded (censored) value
};

// Replaces censored performance values (success = false) per algorithm:
// fit the regressor on uncensored rows, predict the censored ones, then refit
// on everything and re-predict until the largest change drops below epsilon.
// Uncensored cells are untouched; the result has an all-true success table
// and recomputed best labels. Predictions are deliberately not clamped, so
// imputed values below the recorded censoring point are possible; they are
// counted in the report.
inline imputation_result impute_censored(dataset_ptr data, const regressor_trainer& regressor,
                                         double epsilon = 1e-6, int max_iter = 100) {
  const dataset& d = *data;
  if (!d.successes) throw validation_error("imputation needs a success table to locate censored runs");
  if (epsilon <= 0.0) throw config_error("epsilon must be positive");
  if (max_iter < 1) throw config_error("max_iter must be at least 1");

  const std::size_t n = d.n_instances();
  const std::size_t m = d.algorithm_names.size();
  matrix perf = d.performances;
  imputation_result result;

  for (std::size_t a = 0; a < m; ++a) {
    std::vector<int> censored, uncensored;
    for (std::size_t i = 0; i < n; ++i)
      ((*d.successes)(i, a) ? uncensored : censored).push_back(static_cast<int>(i));
    if (censored.empty()) continue;
    if (uncensored.empty())
      throw validation_error("algorithm '" + d.algorithm_names[a] +
                             "' has no uncensored runs to learn from");

    matrix train_X = select_rows(d.features, uncensored);
    std::vector<double> train_y;
    for (int i : uncensored) train_y.push_back(d.performances(i, a));
    const matrix censored_X = select_rows(d.features, censored);

    auto model = regressor(train_X, train_y);
    std::vector<double> imputed = model->predict(censored_X);
    int iters = 1;
    bool converged = false;
    while (iters < max_iter) {
      matrix all_X = train_X;
      std::vector<double> all_y = train_y;
      for (std::size_t c = 0; c < censored.size(); ++c) {
        all_X.append_row(censored_X.row(c));
        all_y.push_back(imputed[c]);
      }
      auto refit = regressor(all_X, all_y);
      std::vector<double> next = refit->predict(censored_X);
      ++iters;
      double delta = 0.0;
      for (std::size_t c = 0; c < next.size(); ++c)
        delta = std::max(delta, std::abs(next[c] - imputed[c]));
      imputed = std::move(next);
      if (delta < epsilon) {
        converged = true;
        break;
      }
    }
    if (!converged) result.converged = false;
    result.iterations = std::max(result.iterations, iters);
    for (std::size_t c = 0; c < censored.size(); ++c) {
      perf(censored[c], a) = imputed[c];
      ++result.imputed_cells;
      if (imputed[c] < d.performances(censored[c], a)) ++result.below_recorded;
    }
  }

  if (result.imputed_cells == 0) {
    result.data = std::move(data);
    return result;
  }
  result.data = with_performances(d, std::move(perf), bool_matrix(n, m, true));
  return result;
}

}  // namespace portsel
