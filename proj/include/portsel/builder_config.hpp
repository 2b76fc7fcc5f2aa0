#pragma once

#include <optional>
#include <string>
#include <vector>

#include "portsel/errors.hpp"
#include "portsel/learners.hpp"
#include "portsel/preprocess.hpp"
#include "portsel/selectors.hpp"

namespace portsel {

// Declarative description of one selector build, shared by the experiment
// runner and the staged pipeline. build() materialises it on a partitioning.
struct builder_config {
  enum class builder { classify, regression, classify_pairs, cluster };

  builder kind = builder::classify;
  std::vector<classifier_spec> classifiers{classifier_spec{}};  // classify bases / pairs classifier
  std::optional<classifier_spec> combine;  // classify stack, regression combine, pairs combinator
  regressor_spec regressor{};
  bool expand_pairwise_diffs = false;  // regression: widen combine inputs with |a - b| columns
  clusterer_spec clusterer{};
  best_by by = best_by::performance;
  std::optional<double> timeout;  // cluster PAR aggregates
  double par_factor = 10.0;
  bool normalize_features = false;

  std::string name() const {
    auto combined = [&](std::string base) {
      if (combine) base += "+" + combine->name();
      if (normalize_features) base += "+norm";
      return base;
    };
    switch (kind) {
      case builder::classify: {
        std::string parts;
        for (const auto& c : classifiers) parts += (parts.empty() ? "" : "+") + c.name();
        return "classify(" + combined(parts) + ")";
      }
      case builder::regression: {
        std::string base = regressor.name();
        if (expand_pairwise_diffs) base += "+expand";
        return "regression(" + combined(base) + ")";
      }
      case builder::classify_pairs:
        return "classify_pairs(" + combined(classifiers.front().name()) + ")";
      case builder::cluster: {
        std::string base = clusterer.name();
        switch (by) {
          case best_by::performance: break;
          case best_by::par: base += "+par"; break;
          case best_by::successes: base += "+successes"; break;
          case best_by::count: base += "+count"; break;
        }
        return "cluster(" + combined(base) + ")";
      }
    }
    return "?";
  }

  selection_model build(const partitioning& parts, int jobs = 1) const {
    preprocessor pre;
    if (normalize_features) pre = normalize();
    selection_model m;
    switch (kind) {
      case builder::classify: {
        if (classifiers.empty()) throw config_error("classify needs at least one classifier");
        std::vector<classifier_trainer> trainers;
        for (const auto& c : classifiers) trainers.push_back(c.trainer());
        classify_options opt{{}, pre, jobs};
        if (combine) opt.combine = combine->trainer();
        m = classify(trainers, parts, std::move(opt));
        break;
      }
      case builder::regression: {
        regression_options opt{{}, {}, pre, jobs};
        if (combine) opt.combine = combine->trainer();
        if (expand_pairwise_diffs) opt.expand = pairwise_abs_diff_expand();
        m = regression(regressor.trainer(), parts, std::move(opt));
        break;
      }
      case builder::classify_pairs: {
        if (classifiers.empty()) throw config_error("classify_pairs needs a classifier");
        classify_pairs_options opt{{}, pre, jobs};
        if (combine) opt.combinator = combine->trainer();
        m = classify_pairs(classifiers.front().trainer(), parts, std::move(opt));
        break;
      }
      case builder::cluster: {
        cluster_options opt{by, {}, pre, timeout, par_factor, jobs};
        if (combine) opt.combine = combine->trainer();
        m = cluster(clusterer.trainer(), parts, std::move(opt));
        break;
      }
    }
    m.config = name();
    return m;
  }
};

}  // namespace portsel
