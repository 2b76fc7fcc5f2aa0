#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "portsel/errors.hpp"
#include "portsel/matrix.hpp"

namespace portsel {

// Built-in reference learners, one representative per capability the selector
// builders need. All training is deterministic; anything implementing the
// train/predict signatures below can be plugged in instead.

namespace detail {

inline void check_schema(std::size_t got, std::size_t expected) {
  if (got != expected)
    throw schema_error("feature row has " + std::to_string(got) + " columns, model was trained on " +
                       std::to_string(expected));
}

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

class classifier_model {
 public:
  virtual ~classifier_model() = default;

  std::string predict_one(std::span<const double> row) const {
    detail::check_schema(row.size(), n_features_);
    return do_predict(row);
  }

  std::vector<std::string> predict(const matrix& rows) const {
    detail::check_schema(rows.cols(), n_features_);
    std::vector<std::string> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(do_predict(rows.row(i)));
    return out;
  }

  std::size_t n_features() const { return n_features_; }

 protected:
  explicit classifier_model(std::size_t n_features) : n_features_(n_features) {}
  virtual std::string do_predict(std::span<const double> row) const = 0;

 private:
  std::size_t n_features_;
};

class regressor_model {
 public:
  virtual ~regressor_model() = default;

  double predict_one(std::span<const double> row) const {
    detail::check_schema(row.size(), n_features_);
    return do_predict(row);
  }

  std::vector<double> predict(const matrix& rows) const {
    detail::check_schema(rows.cols(), n_features_);
    std::vector<double> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(do_predict(rows.row(i)));
    return out;
  }

  std::size_t n_features() const { return n_features_; }

 protected:
  explicit regressor_model(std::size_t n_features) : n_features_(n_features) {}
  virtual double do_predict(std::span<const double> row) const = 0;

 private:
  std::size_t n_features_;
};

class clusterer_model {
 public:
  virtual ~clusterer_model() = default;

  int assign_one(std::span<const double> row) const {
    detail::check_schema(row.size(), n_features_);
    return do_assign(row);
  }

  std::vector<int> assign(const matrix& rows) const {
    detail::check_schema(rows.cols(), n_features_);
    std::vector<int> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(do_assign(rows.row(i)));
    return out;
  }

  virtual int n_clusters() const = 0;
  std::size_t n_features() const { return n_features_; }

 protected:
  explicit clusterer_model(std::size_t n_features) : n_features_(n_features) {}
  virtual int do_assign(std::span<const double> row) const = 0;

 private:
  std::size_t n_features_;
};

using classifier_trainer =
    std::function<std::shared_ptr<classifier_model>(const matrix&, const std::vector<std::string>&)>;
using regressor_trainer =
    std::function<std::shared_ptr<regressor_model>(const matrix&, const std::vector<double>&)>;
using clusterer_trainer = std::function<std::shared_ptr<clusterer_model>(const matrix&)>;

namespace detail {

// Modal element; ties go to the value seen first.
inline std::string modal_label(const std::vector<std::string>& labels) {
  std::map<std::string, int> counts;
  for (const auto& l : labels) ++counts[l];
  int best = 0;
  std::string winner;
  for (const auto& l : labels) {
    if (counts[l] > best) {
      best = counts[l];
      winner = l;
    }
  }
  return winner;
}

class majority_model final : public classifier_model {
 public:
  majority_model(std::size_t nf, std::string label)
      : classifier_model(nf), label_(std::move(label)) {}

 private:
  std::string do_predict(std::span<const double>) const override { return label_; }
  std::string label_;
};

class knn_model final : public classifier_model {
 public:
  knn_model(int k, matrix X, std::vector<std::string> y)
      : classifier_model(X.cols()), k_(k), X_(std::move(X)), y_(std::move(y)) {}

 private:
  std::string do_predict(std::span<const double> row) const override {
    const std::size_t n = X_.rows();
    const std::size_t k = std::min<std::size_t>(k_, n);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dist.emplace_back(sq_distance(X_.row(i), row), i);
    // distance ties resolve to the lower training-row index
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::map<std::string, int> votes;
    for (std::size_t i = 0; i < k; ++i) ++votes[y_[dist[i].second]];
    int best = 0;
    for (std::size_t i = 0; i < k; ++i) best = std::max(best, votes[y_[dist[i].second]]);
    for (std::size_t i = 0; i < k; ++i)
      if (votes[y_[dist[i].second]] == best) return y_[dist[i].second];
    return y_.front();  // unreachable
  }

  std::size_t k_;
  matrix X_;
  std::vector<std::string> y_;
};

// Single axis-aligned split: rows with x[feature] < threshold go left.
class stump_model final : public classifier_model {
 public:
  stump_model(std::size_t nf, int feature, double threshold, std::string left, std::string right)
      : classifier_model(nf),
        feature_(feature),
        threshold_(threshold),
        left_(std::move(left)),
        right_(std::move(right)) {}

 private:
  std::string do_predict(std::span<const double> row) const override {
    if (feature_ < 0) return right_;
    return row[feature_] < threshold_ ? left_ : right_;
  }

  int feature_;
  double threshold_;
  std::string left_, right_;
};

class ols_model final : public regressor_model {
 public:
  ols_model(std::size_t nf, Eigen::VectorXd coef) : regressor_model(nf), coef_(std::move(coef)) {}

 private:
  double do_predict(std::span<const double> row) const override {
    double v = coef_[0];
    for (std::size_t j = 0; j < row.size(); ++j) v += coef_[j + 1] * row[j];
    return v;
  }

  Eigen::VectorXd coef_;
};

class kmeans_model final : public clusterer_model {
 public:
  kmeans_model(matrix centroids, std::vector<int> assignments, std::vector<double> objective)
      : clusterer_model(centroids.cols()),
        centroids_(std::move(centroids)),
        assignments_(std::move(assignments)),
        objective_(std::move(objective)) {}

  int n_clusters() const override { return static_cast<int>(centroids_.rows()); }
  const matrix& centroids() const { return centroids_; }
  const std::vector<int>& training_assignments() const { return assignments_; }
  // within-cluster sum of squares after each assignment step
  const std::vector<double>& objective_history() const { return objective_; }

 private:
  int do_assign(std::span<const double> row) const override {
    int best = 0;
    double best_d = sq_distance(centroids_.row(0), row);
    for (std::size_t c = 1; c < centroids_.rows(); ++c) {
      const double v = sq_distance(centroids_.row(c), row);
      if (v < best_d) {
        best_d = v;
        best = static_cast<int>(c);
      }
    }
    return best;
  }

  matrix centroids_;
  std::vector<int> assignments_;
  std::vector<double> objective_;
};

inline void check_training_rows(std::size_t rows, std::size_t targets) {
  if (rows == 0) throw validation_error("empty training set");
  if (rows != targets) throw schema_error("training rows and targets differ in length");
}

}  // namespace detail

// Predicts the modal training label for everything.
inline classifier_trainer majority_classifier() {
  return [](const matrix& X, const std::vector<std::string>& y) {
    detail::check_training_rows(X.rows(), y.size());
    return std::make_shared<detail::majority_model>(X.cols(), detail::modal_label(y));
  };
}

// k-nearest-neighbours vote under Euclidean distance.
inline classifier_trainer knn_classifier(int k = 1) {
  if (k < 1) throw config_error("knn needs k >= 1");
  return [k](const matrix& X, const std::vector<std::string>& y) {
    detail::check_training_rows(X.rows(), y.size());
    return std::make_shared<detail::knn_model>(k, X, y);
  };
}

// Best single-feature threshold split by training misclassifications; ties
// prefer the lower feature index, then the lower threshold.
inline classifier_trainer stump_classifier() {
  return [](const matrix& X, const std::vector<std::string>& y) {
    detail::check_training_rows(X.rows(), y.size());
    const std::size_t n = X.rows();
    const std::string overall = detail::modal_label(y);
    int misses = 0;
    for (const auto& l : y) misses += (l != overall);
    int best_err = misses, best_feature = -1;
    double best_thr = 0.0;
    std::string best_left = overall, best_right = overall;

    for (std::size_t f = 0; f < X.cols(); ++f) {
      std::vector<double> values;
      values.reserve(n);
      for (std::size_t i = 0; i < n; ++i) values.push_back(X(i, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t v = 1; v < values.size(); ++v) {
        const double thr = values[v - 1] + (values[v] - values[v - 1]) / 2.0;
        std::vector<std::string> left, right;
        for (std::size_t i = 0; i < n; ++i) (X(i, f) < thr ? left : right).push_back(y[i]);
        const std::string ll = detail::modal_label(left);
        const std::string rl = detail::modal_label(right);
        int err = 0;
        for (const auto& l : left) err += (l != ll);
        for (const auto& l : right) err += (l != rl);
        if (err < best_err) {
          best_err = err;
          best_feature = static_cast<int>(f);
          best_thr = thr;
          best_left = ll;
          best_right = rl;
        }
      }
    }
    return std::make_shared<detail::stump_model>(X.cols(), best_feature, best_thr, best_left,
                                                 best_right);
  };
}

// Ordinary least squares with an intercept. Rank-deficient designs fall back
// to the minimum-norm solution, so collinear or constant features do not fail.
inline regressor_trainer ols_regressor() {
  return [](const matrix& X, const std::vector<double>& y) {
    detail::check_training_rows(X.rows(), y.size());
    const std::size_t n = X.rows(), f = X.cols();
    Eigen::MatrixXd A(n, f + 1);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      A(i, 0) = 1.0;
      for (std::size_t j = 0; j < f; ++j) A(i, j + 1) = X(i, j);
      b(i) = y[i];
    }
    Eigen::VectorXd coef = A.completeOrthogonalDecomposition().solve(b);
    return std::make_shared<detail::ols_model>(f, std::move(coef));
  };
}

// Lloyd's algorithm with farthest-first initialisation anchored at row 0.
// Stops when assignments are stable or after max_iter passes.
inline clusterer_trainer kmeans_clusterer(int k, int max_iter = 100) {
  if (k < 1) throw config_error("k-means needs k >= 1");
  if (max_iter < 1) throw config_error("k-means needs max_iter >= 1");
  return [k, max_iter](const matrix& X) {
    const std::size_t n = X.rows();
    if (n == 0) throw validation_error("empty training set");
    if (static_cast<std::size_t>(k) > n)
      throw validation_error("k-means needs at least k rows, got " + std::to_string(n));

    matrix centroids(0, X.cols());
    centroids.append_row(X.row(0));
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        min_d[i] = std::min(min_d[i], detail::sq_distance(centroids.row(c - 1), X.row(i)));
        if (min_d[i] > far_d) {
          far_d = min_d[i];
          far = i;
        }
      }
      centroids.append_row(X.row(far));
    }

    std::vector<int> assign(n, -1);
    std::vector<double> objective;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      double wcss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = detail::sq_distance(centroids.row(0), X.row(i));
        for (int c = 1; c < k; ++c) {
          const double v = detail::sq_distance(centroids.row(c), X.row(i));
          if (v < best_d) {
            best_d = v;
            best = c;
          }
        }
        wcss += best_d;
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      objective.push_back(wcss);
      if (!changed) break;
      for (int c = 0; c < k; ++c) {
        std::vector<double> mean(X.cols(), 0.0);
        int count = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (assign[i] == c) {
            ++count;
            for (std::size_t j = 0; j < X.cols(); ++j) mean[j] += X(i, j);
          }
        if (count == 0) continue;  // empty cluster keeps its centroid
        for (std::size_t j = 0; j < X.cols(); ++j) centroids(c, j) = mean[j] / count;
      }
    }
    return std::make_shared<detail::kmeans_model>(std::move(centroids), std::move(assign),
                                                  std::move(objective));
  };
}

// Configuration value types, mainly for file-driven experiments. trainer()
// materialises the matching built-in learner.

enum class classifier_kind { majority, knn, stump };
enum class regressor_kind { ols };
enum class clusterer_kind { kmeans };

struct classifier_spec {
  classifier_kind kind = classifier_kind::knn;
  int k = 1;  // knn only
  std::uint64_t seed = 0;

  classifier_trainer trainer() const {
    switch (kind) {
      case classifier_kind::majority:
        return majority_classifier();
      case classifier_kind::knn:
        return knn_classifier(k);
      case classifier_kind::stump:
        return stump_classifier();
    }
    throw config_error("unknown classifier kind");
  }

  std::string name() const {
    switch (kind) {
      case classifier_kind::majority:
        return "majority";
      case classifier_kind::knn:
        return "knn" + std::to_string(k);
      case classifier_kind::stump:
        return "stump";
    }
    return "?";
  }
};

struct regressor_spec {
  regressor_kind kind = regressor_kind::ols;
  std::uint64_t seed = 0;

  regressor_trainer trainer() const { return ols_regressor(); }
  std::string name() const { return "ols"; }
};

struct clusterer_spec {
  clusterer_kind kind = clusterer_kind::kmeans;
  int k = 3;
  int max_iter = 100;
  std::uint64_t seed = 0;

  clusterer_trainer trainer() const { return kmeans_clusterer(k, max_iter); }
  std::string name() const { return "kmeans" + std::to_string(k); }
};

}  // namespace portsel
