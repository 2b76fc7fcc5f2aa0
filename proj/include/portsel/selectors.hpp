#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"
#include "portsel/learners.hpp"
#include "portsel/matrix.hpp"
#include "portsel/parallel.hpp"
#include "portsel/partition.hpp"
#include "portsel/preprocess.hpp"
#include "portsel/scores.hpp"

namespace portsel {

// One instance's outcome: algorithms ranked best first with a score whose
// meaning depends on the builder (1 for plain classification, votes for
// pairwise/ensemble models, predicted or aggregated performance otherwise).
struct prediction {
  std::vector<std::pair<std::string, double>> ranking;

  const std::string& best() const {
    if (ranking.empty()) throw error("empty prediction");
    return ranking.front().first;
  }
};

// Per-test-partition predictions from the train/test protocol, plus a
// predictor backed by models trained on the entire dataset for new instances.
struct selection_model {
  std::string kind;
  std::string config;
  partitioning parts;
  std::vector<std::vector<prediction>> predictions;  // [partition][position]
  std::function<std::vector<prediction>(const matrix&)> predictor;

  std::string name() const { return config.empty() ? kind : config; }
};

inline std::vector<prediction> predict_new(const selection_model& m, const matrix& rows) {
  return m.predictor(rows);
}

namespace detail {

using row_predictor = std::function<std::vector<prediction>(const matrix&)>;

inline prediction single_choice(const dataset& d, const std::string& label) {
  d.algorithm_index(label);  // enforce membership
  return prediction{{{label, 1.0}}};
}

// Stable sort keeps the algorithm column order on score ties.
inline prediction rank_scores(const std::vector<double>& scores,
                              const std::vector<std::string>& names, bool ascending) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
  });
  prediction p;
  p.ranking.reserve(order.size());
  for (int j : order) p.ranking.emplace_back(names[j], scores[j]);
  return p;
}

inline prediction rank_votes(const std::vector<int>& votes, const std::vector<std::string>& names,
                             bool omit_zero) {
  std::vector<int> order(votes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return votes[a] > votes[b]; });
  prediction p;
  for (int j : order) {
    if (omit_zero && votes[j] == 0) continue;
    p.ranking.emplace_back(names[j], static_cast<double>(votes[j]));
  }
  return p;
}

// First-layer predictions encoded as algorithm column indices; the input a
// stacked second-layer learner trains on.
inline matrix label_matrix(const std::vector<std::shared_ptr<classifier_model>>& models,
                           const matrix& X, const dataset& d) {
  matrix out(X.rows(), models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    const auto labels = models[j]->predict(X);
    for (std::size_t i = 0; i < labels.size(); ++i)
      out(i, j) = static_cast<double>(d.algorithm_index(labels[i]));
  }
  return out;
}

// Shared train/test protocol: fit on each training partition in turn, keep
// the predictions on the matching test partition, then fit once more on the
// full data for the returned predictor. Partitions may be fitted from worker
// threads; every result lands in an index-addressed slot, so the outcome is
// identical to a sequential run.
template <class FitFn>
selection_model build_model(std::string kind, const partitioning& parts, int jobs, FitFn&& fit) {
  const dataset& d = *parts.data;
  selection_model m;
  m.kind = std::move(kind);
  m.parts = parts;
  const int np = static_cast<int>(parts.test_partitions.size());
  m.predictions.resize(np);
  for_each_index(np, jobs, [&](int p) {
    auto predict = fit(std::span<const int>(parts.train_partitions[p]));
    m.predictions[p] = predict(select_rows(d.features, parts.test_partitions[p]));
  });
  std::vector<int> all(d.n_instances());
  std::iota(all.begin(), all.end(), 0);
  auto full = fit(std::span<const int>(all));
  const std::size_t width = d.features.cols();
  m.predictor = [full = std::move(full), width](const matrix& rows) {
    check_schema(rows.cols(), width);
    return full(rows);
  };
  return m;
}

}  // namespace detail

struct classify_options {
  std::optional<classifier_trainer> combine;  // stack a second layer on the base predictions
  preprocessor pre;
  int jobs = 1;
};

// Label-classification selector. A single classifier predicts the best
// algorithm directly (score 1). A list of classifiers votes; the score is the
// vote count and unvoted algorithms do not appear. With `combine`, a second
// layer is trained on the base predictions and its choice is returned alone.
inline selection_model classify(const std::vector<classifier_trainer>& classifiers,
                                const partitioning& parts, classify_options options = {}) {
  if (classifiers.empty()) throw config_error("classify needs at least one classifier");
  dataset_ptr data = parts.data;
  const dataset& d = *data;
  const auto labels = best_labels(d);
  const bool single = classifiers.size() == 1 && !options.combine;

  auto fit = [&, data](std::span<const int> train_idx) -> detail::row_predictor {
    matrix train_X = select_rows(d.features, train_idx);
    row_transform tf;
    if (options.pre) {
      tf = options.pre(train_X);
      train_X = tf(train_X);
    }
    std::vector<std::string> y;
    y.reserve(train_idx.size());
    for (int i : train_idx) y.push_back(labels[i]);

    std::vector<std::shared_ptr<classifier_model>> models;
    models.reserve(classifiers.size());
    for (const auto& trainer : classifiers) models.push_back(trainer(train_X, y));
    std::shared_ptr<classifier_model> combiner;
    if (options.combine) combiner = (*options.combine)(detail::label_matrix(models, train_X, d), y);

    return [models, combiner, tf, data, single](const matrix& rows) {
      const matrix X = tf ? tf(rows) : rows;
      std::vector<prediction> out;
      out.reserve(X.rows());
      if (combiner) {
        for (const auto& label : combiner->predict(detail::label_matrix(models, X, *data)))
          out.push_back(detail::single_choice(*data, label));
      } else if (single) {
        for (const auto& label : models.front()->predict(X))
          out.push_back(detail::single_choice(*data, label));
      } else {
        std::vector<std::vector<std::string>> votes;
        votes.reserve(models.size());
        for (const auto& model : models) votes.push_back(model->predict(X));
        for (std::size_t i = 0; i < X.rows(); ++i) {
          std::vector<int> tally(data->algorithm_names.size(), 0);
          for (const auto& v : votes) ++tally[data->algorithm_index(v[i])];
          out.push_back(detail::rank_votes(tally, data->algorithm_names, /*omit_zero=*/true));
        }
      }
      return out;
    };
  };
  return detail::build_model("classify", parts, options.jobs, fit);
}

inline selection_model classify(const classifier_trainer& classifier, const partitioning& parts,
                                classify_options options = {}) {
  return classify(std::vector<classifier_trainer>{classifier}, parts, std::move(options));
}

// Appends columns to a matrix of per-algorithm predictions before a stacked
// classifier sees them. Output row count must match; column count must be the
// same for every batch.
using expand_fn = std::function<matrix(const matrix&)>;

// |prediction_a - prediction_b| for every unordered pair of algorithms.
inline expand_fn pairwise_abs_diff_expand() {
  return [](const matrix& scores) {
    const std::size_t m = scores.cols();
    matrix out(scores.rows(), m * (m - 1) / 2);
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      std::size_t c = 0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
          out(i, c++) = std::abs(scores(i, a) - scores(i, b));
    }
    return out;
  };
}

struct regression_options {
  std::optional<classifier_trainer> combine;
  std::optional<expand_fn> expand;
  preprocessor pre;
  int jobs = 1;
};

// One regressor per algorithm predicting its performance; the ranking sorts
// the predicted values (ascending when low means good). With `combine`, a
// classifier picks the algorithm from the predicted values, optionally
// widened by `expand`.
inline selection_model regression(const regressor_trainer& regressor, const partitioning& parts,
                                  regression_options options = {}) {
  if (options.expand && !options.combine)
    throw config_error("regression: expand is only meaningful together with combine");
  dataset_ptr data = parts.data;
  const dataset& d = *data;
  const auto labels = best_labels(d);
  const std::size_t m = d.algorithm_names.size();

  auto score_matrix = [](const std::vector<std::shared_ptr<regressor_model>>& regs,
                         const matrix& X) {
    matrix s(X.rows(), regs.size());
    for (std::size_t j = 0; j < regs.size(); ++j) {
      const auto v = regs[j]->predict(X);
      for (std::size_t i = 0; i < v.size(); ++i) s(i, j) = v[i];
    }
    return s;
  };

  auto fit = [&, data, score_matrix](std::span<const int> train_idx) -> detail::row_predictor {
    matrix train_X = select_rows(d.features, train_idx);
    row_transform tf;
    if (options.pre) {
      tf = options.pre(train_X);
      train_X = tf(train_X);
    }
    std::vector<std::shared_ptr<regressor_model>> regs;
    regs.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> y;
      y.reserve(train_idx.size());
      for (int i : train_idx) y.push_back(d.performances(i, j));
      regs.push_back(regressor(train_X, y));
    }

    std::shared_ptr<classifier_model> combiner;
    auto expand_cols = std::make_shared<std::size_t>(0);
    auto widen = [expand = options.expand, expand_cols](const matrix& scores) {
      if (!expand) return scores;
      matrix extra = (*expand)(scores);
      if (extra.rows() != scores.rows())
        throw schema_error("expand changed the number of rows");
      if (*expand_cols == 0) *expand_cols = extra.cols();
      if (extra.cols() != *expand_cols)
        throw schema_error("expand must append the same number of columns for every batch");
      return hcat(scores, extra);
    };
    if (options.combine) {
      std::vector<std::string> y;
      for (int i : train_idx) y.push_back(labels[i]);
      combiner = (*options.combine)(widen(score_matrix(regs, train_X)), y);
    }

    const bool ascending = d.minimize;
    return [regs, combiner, widen, tf, data, score_matrix, ascending](const matrix& rows) {
      const matrix X = tf ? tf(rows) : rows;
      const matrix scores = score_matrix(regs, X);
      std::vector<prediction> out;
      out.reserve(X.rows());
      if (combiner) {
        for (const auto& label : combiner->predict(widen(scores)))
          out.push_back(detail::single_choice(*data, label));
      } else {
        for (std::size_t i = 0; i < scores.rows(); ++i) {
          std::vector<double> row(scores.row(i).begin(), scores.row(i).end());
          out.push_back(detail::rank_scores(row, data->algorithm_names, ascending));
        }
      }
      return out;
    };
  };
  return detail::build_model("regression", parts, options.jobs, fit);
}

struct classify_pairs_options {
  std::optional<classifier_trainer> combinator;
  preprocessor pre;
  int jobs = 1;
};

// One binary classifier per unordered algorithm pair predicting the better of
// the two; predictions are tallied as votes and every algorithm is ranked by
// its vote count. With `combinator`, a classifier picks the final algorithm
// from the vote vector.
inline selection_model classify_pairs(const classifier_trainer& classifier,
                                      const partitioning& parts,
                                      classify_pairs_options options = {}) {
  dataset_ptr data = parts.data;
  const dataset& d = *data;
  const std::size_t m = d.algorithm_names.size();
  if (m < 2) throw validation_error("classify_pairs needs at least two algorithms");
  const auto labels = best_labels(d);

  auto fit = [&, data](std::span<const int> train_idx) -> detail::row_predictor {
    matrix train_X = select_rows(d.features, train_idx);
    row_transform tf;
    if (options.pre) {
      tf = options.pre(train_X);
      train_X = tf(train_X);
    }
    std::vector<std::shared_ptr<classifier_model>> pair_models;
    pair_models.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        std::vector<std::string> y;
        y.reserve(train_idx.size());
        for (int i : train_idx) {
          const double pa = d.performances(i, a), pb = d.performances(i, b);
          // equal performances label the earlier algorithm
          const bool a_better = d.minimize ? pa <= pb : pa >= pb;
          y.push_back(d.algorithm_names[a_better ? a : b]);
        }
        pair_models.push_back(classifier(train_X, y));
      }
    }

    auto vote_matrix = [pair_models, data](const matrix& X) {
      matrix votes(X.rows(), data->algorithm_names.size(), 0.0);
      for (const auto& model : pair_models) {
        const auto winners = model->predict(X);
        for (std::size_t i = 0; i < winners.size(); ++i)
          votes(i, data->algorithm_index(winners[i])) += 1.0;
      }
      return votes;
    };

    std::shared_ptr<classifier_model> combiner;
    if (options.combinator) {
      std::vector<std::string> y;
      for (int i : train_idx) y.push_back(labels[i]);
      combiner = (*options.combinator)(vote_matrix(train_X), y);
    }

    return [vote_matrix, combiner, tf, data](const matrix& rows) {
      const matrix X = tf ? tf(rows) : rows;
      const matrix votes = vote_matrix(X);
      std::vector<prediction> out;
      out.reserve(X.rows());
      if (combiner) {
        for (const auto& label : combiner->predict(votes))
          out.push_back(detail::single_choice(*data, label));
      } else {
        for (std::size_t i = 0; i < votes.rows(); ++i) {
          std::vector<int> tally(votes.cols());
          for (std::size_t j = 0; j < votes.cols(); ++j)
            tally[j] = static_cast<int>(votes(i, j));
          out.push_back(detail::rank_votes(tally, data->algorithm_names, /*omit_zero=*/false));
        }
      }
      return out;
    };
  };
  return detail::build_model("classify_pairs", parts, options.jobs, fit);
}

// How the per-cluster algorithm ranking is aggregated over cluster members.
enum class best_by { performance, par, successes, count };

inline best_by parse_best_by(const std::string& s) {
  if (s == "performance") return best_by::performance;
  if (s == "par") return best_by::par;
  if (s == "successes") return best_by::successes;
  if (s == "count") return best_by::count;
  throw config_error("invalid bestBy value '" + s +
                     "' (expected performance, par, successes or count)");
}

struct cluster_options {
  best_by by = best_by::performance;
  std::optional<classifier_trainer> combine;  // used by the ensemble overload
  preprocessor pre;
  std::optional<double> timeout;  // PAR aggregation; defaults to the largest performance
  double par_factor = 10.0;
  int jobs = 1;
};

namespace detail {

// Clusters the training rows and ranks the algorithms per cluster by the
// chosen aggregate. Members of the same cluster share one ranking.
struct cluster_scorer {
  std::shared_ptr<clusterer_model> model;
  std::vector<prediction> rankings;  // per cluster

  static cluster_scorer fit(const clusterer_trainer& trainer, const matrix& train_X,
                            std::span<const int> train_idx, const dataset& d,
                            const cluster_options& opt) {
    cluster_scorer cs;
    cs.model = trainer(train_X);
    const auto assignment = cs.model->assign(train_X);
    const std::size_t m = d.algorithm_names.size();
    const bool needs_runs = opt.by == best_by::par || opt.by == best_by::successes;
    const double timeout = needs_runs ? resolve_timeout(d, opt.timeout) : 0.0;

    for (int c = 0; c < cs.model->n_clusters(); ++c) {
      std::vector<double> agg(m, 0.0);
      for (std::size_t r = 0; r < assignment.size(); ++r) {
        if (assignment[r] != c) continue;
        const int i = train_idx[r];
        for (std::size_t a = 0; a < m; ++a) {
          switch (opt.by) {
            case best_by::performance:
              agg[a] += d.performances(i, a);
              break;
            case best_by::par:
              agg[a] += par_cell(d, i, a, timeout, opt.par_factor);
              break;
            case best_by::successes:
              agg[a] += run_success(d, i, a, timeout) ? 1.0 : 0.0;
              break;
            case best_by::count:
              agg[a] += std::count(d.best_sets[i].begin(), d.best_sets[i].end(),
                                   static_cast<int>(a));
              break;
          }
        }
      }
      const bool ascending =
          (opt.by == best_by::performance || opt.by == best_by::par) && d.minimize;
      cs.rankings.push_back(rank_scores(agg, d.algorithm_names, ascending));
    }
    return cs;
  }

  prediction predict_row(std::span<const double> row) const {
    return rankings[model->assign_one(row)];
  }
};

}  // namespace detail

// Cluster-based selector: training instances are clustered in feature space,
// each cluster ranks the algorithms by the aggregate chosen in `by`, and new
// instances inherit the ranking of their nearest cluster.
inline selection_model cluster(const clusterer_trainer& clusterer, const partitioning& parts,
                               cluster_options options = {}) {
  dataset_ptr data = parts.data;
  const dataset& d = *data;

  auto fit = [&, data](std::span<const int> train_idx) -> detail::row_predictor {
    matrix train_X = select_rows(d.features, train_idx);
    row_transform tf;
    if (options.pre) {
      tf = options.pre(train_X);
      train_X = tf(train_X);
    }
    auto scorer = std::make_shared<detail::cluster_scorer>(
        detail::cluster_scorer::fit(clusterer, train_X, train_idx, d, options));
    return [scorer, tf, data](const matrix& rows) {
      const matrix X = tf ? tf(rows) : rows;
      std::vector<prediction> out;
      out.reserve(X.rows());
      for (std::size_t i = 0; i < X.rows(); ++i) out.push_back(scorer->predict_row(X.row(i)));
      return out;
    };
  };
  return detail::build_model("cluster", parts, options.jobs, fit);
}

// Ensemble form: several clusterers vote with the top algorithm of their own
// cluster ranking; with `combine`, a classifier is stacked on those choices.
inline selection_model cluster(const std::vector<clusterer_trainer>& clusterers,
                               const partitioning& parts, cluster_options options = {}) {
  if (clusterers.empty()) throw config_error("cluster needs at least one clusterer");
  dataset_ptr data = parts.data;
  const dataset& d = *data;
  const auto labels = best_labels(d);

  auto fit = [&, data](std::span<const int> train_idx) -> detail::row_predictor {
    matrix train_X = select_rows(d.features, train_idx);
    row_transform tf;
    if (options.pre) {
      tf = options.pre(train_X);
      train_X = tf(train_X);
    }
    std::vector<std::shared_ptr<detail::cluster_scorer>> scorers;
    scorers.reserve(clusterers.size());
    for (const auto& trainer : clusterers)
      scorers.push_back(std::make_shared<detail::cluster_scorer>(
          detail::cluster_scorer::fit(trainer, train_X, train_idx, d, options)));

    auto top_choices = [scorers, data](const matrix& X) {
      matrix encoded(X.rows(), scorers.size());
      for (std::size_t j = 0; j < scorers.size(); ++j)
        for (std::size_t i = 0; i < X.rows(); ++i)
          encoded(i, j) =
              static_cast<double>(data->algorithm_index(scorers[j]->predict_row(X.row(i)).best()));
      return encoded;
    };

    std::shared_ptr<classifier_model> combiner;
    if (options.combine) {
      std::vector<std::string> y;
      for (int i : train_idx) y.push_back(labels[i]);
      combiner = (*options.combine)(top_choices(train_X), y);
    }

    return [scorers, combiner, top_choices, tf, data](const matrix& rows) {
      const matrix X = tf ? tf(rows) : rows;
      std::vector<prediction> out;
      out.reserve(X.rows());
      if (combiner) {
        for (const auto& label : combiner->predict(top_choices(X)))
          out.push_back(detail::single_choice(*data, label));
      } else {
        for (std::size_t i = 0; i < X.rows(); ++i) {
          std::vector<int> tally(data->algorithm_names.size(), 0);
          for (const auto& s : scorers)
            ++tally[data->algorithm_index(s->predict_row(X.row(i)).best())];
          out.push_back(detail::rank_votes(tally, data->algorithm_names, /*omit_zero=*/true));
        }
      }
      return out;
    };
  };
  return detail::build_model("cluster", parts, options.jobs, fit);
}

}  // namespace portsel
