#pragma once

#include <optional>

#include "portsel/dataset.hpp"
#include "portsel/errors.hpp"

namespace portsel {

// Per-run scoring primitives shared by the evaluation functions and the
// cluster builder's aggregates.

// When no timeout is given, unsuccessful runs are assumed to be recorded at
// the time-out, so the largest performance value stands in for it.
inline double resolve_timeout(const dataset& d, std::optional<double> timeout) {
  if (timeout) {
    if (!(*timeout > 0.0)) throw config_error("timeout must be positive");
    return *timeout;
  }
  double mx = d.performances(0, 0);
  for (std::size_t i = 0; i < d.performances.rows(); ++i)
    for (std::size_t j = 0; j < d.performances.cols(); ++j)
      mx = std::max(mx, d.performances(i, j));
  if (!(mx > 0.0))
    throw config_error("cannot infer a timeout from non-positive performances; set one explicitly");
  return mx;
}

// Success table if there is one, otherwise inferred: a run that reaches the
// timeout did not finish.
inline bool run_success(const dataset& d, std::size_t i, std::size_t a, double timeout) {
  if (d.successes) return (*d.successes)(i, a);
  return d.performances(i, a) < timeout;
}

// PAR score of a single run, without feature costs.
inline double par_cell(const dataset& d, std::size_t i, std::size_t a, double timeout,
                       double par_factor) {
  if (!run_success(d, i, a, timeout)) return par_factor * timeout;
  return d.performances(i, a);
}

}  // namespace portsel
