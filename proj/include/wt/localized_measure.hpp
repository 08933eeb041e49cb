#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wt/metric_space.hpp"

namespace wt {

/// A probability measure supported on a subset of ambient point indices.
struct LocalizedMeasure {
  std::vector<Index> support;  // sorted, distinct indices into the ambient space
  std::vector<double> mass;    // parallel to support, positive, sums to 1

  std::size_t size() const { return support.size(); }
};

inline void check_localized(const LocalizedMeasure& m, const char* who) {
  if (m.support.size() != m.mass.size())
    throw std::invalid_argument(std::string(who) + ": support/mass length mismatch");
  if (m.support.empty())
    throw std::invalid_argument(std::string(who) + ": empty support");
  double total = 0.0;
  for (std::size_t k = 0; k < m.mass.size(); ++k) {
    if (!(m.mass[k] > 0.0))
      throw std::invalid_argument(std::string(who) + ": nonpositive mass");
    if (k > 0 && m.support[k] <= m.support[k - 1])
      throw std::invalid_argument(std::string(who) + ": support not sorted/distinct");
    total += m.mass[k];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": mass does not sum to 1");
}

/// Dirac measure at an ambient point.
inline LocalizedMeasure dirac(Index at) { return {{at}, {1.0}}; }

/// The slice ground(i, j) = dist(support_mu[i], support_nu[j]) used by the
/// pairwise solves; only this rectangular block of the ambient metric is
/// ever needed.
inline Matrix ground_slice(const Matrix& dist, const LocalizedMeasure& mu,
                           const LocalizedMeasure& nu) {
  Matrix g(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      g(static_cast<Index>(i), static_cast<Index>(j)) =
          dist(mu.support[i], nu.support[j]);
  return g;
}

}  // namespace wt
