#pragma once

#include "wt/wt.hpp"

namespace wtt {

using namespace wt;

inline PointCloud random_cloud(SplitMix64& rng, int n, int dim = 2) {
  PointCloud cloud;
  cloud.coords = Matrix(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < dim; ++j) cloud.coords(i, j) = rng.uniform();
  return cloud;
}

inline Vector random_weights(SplitMix64& rng, int n, double floor = 0.1) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = floor + rng.uniform();
  w /= w.sum();
  return w;
}

inline FiniteMetricMeasureSpace random_space(SplitMix64& rng, int n, int dim = 2) {
  FiniteMetricMeasureSpace space = from_point_cloud(random_cloud(rng, n, dim));
  space.weights = random_weights(rng, n);
  return space;
}

// Random measure over a random subset of ambient indices.
inline LocalizedMeasure random_measure(SplitMix64& rng, int ambient_n, int max_support) {
  LocalizedMeasure m;
  const int target = 1 + static_cast<int>(rng.uniform() * max_support);
  for (Index i = 0; i < ambient_n && static_cast<int>(m.support.size()) < target; ++i) {
    const int remaining = ambient_n - static_cast<int>(i);
    const int needed = target - static_cast<int>(m.support.size());
    if (rng.uniform() * remaining < needed) m.support.push_back(i);
  }
  if (m.support.empty()) m.support.push_back(0);
  double total = 0.0;
  for (std::size_t k = 0; k < m.support.size(); ++k) {
    m.mass.push_back(0.05 + rng.uniform());
    total += m.mass.back();
  }
  for (double& v : m.mass) v /= total;
  return m;
}

inline FiniteMetricMeasureSpace line_space(std::initializer_list<double> coords) {
  PointCloud cloud;
  cloud.coords = Matrix(static_cast<Index>(coords.size()), 1);
  Index i = 0;
  for (double c : coords) cloud.coords(i++, 0) = c;
  return from_point_cloud(cloud);
}

}  // namespace wtt
