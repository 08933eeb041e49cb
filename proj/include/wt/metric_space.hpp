#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kTriangleTol = 1e-9;
inline constexpr double kMassTol = 1e-12;

/// A finite (pseudo)metric space carrying a fully supported probability
/// measure: symmetric distance matrix `dist` and positive weights summing
/// to one. Distinct points at distance zero are allowed.
struct FiniteMetricMeasureSpace {
  Matrix dist;                      // n x n, symmetric, zero diagonal
  Vector weights;                   // n, strictly positive, sums to 1
  std::vector<std::string> labels;  // optional class tags, empty or size n

  Index size() const { return dist.rows(); }
};

/// Points in R^d with optional positive weights (uniform when empty).
struct PointCloud {
  Matrix coords;                    // n x dim
  Vector weights;                   // empty => uniform 1/n
  std::vector<std::string> labels;  // optional, empty or size n

  Index size() const { return coords.rows(); }
  Index dim() const { return coords.cols(); }

  Vector effective_weights() const {
    if (weights.size() == size()) return weights;
    return Vector::Constant(size(), 1.0 / static_cast<double>(size()));
  }
};

struct ValidationIssue {
  std::string what;  // human-readable description with indices
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }

  std::string str() const {
    std::ostringstream os;
    for (const auto& is : issues) os << is.what << "\n";
    return os.str();
  }
};

namespace detail {

inline void add_issue(ValidationReport& rep, std::string msg) {
  rep.issues.push_back({std::move(msg)});
}

}  // namespace detail

/// Checks every space invariant and reports all violations with indices.
inline ValidationReport validate(const FiniteMetricMeasureSpace& space) {
  ValidationReport rep;
  const Index n = space.dist.rows();
  if (n == 0) {
    detail::add_issue(rep, "empty space");
    return rep;
  }
  if (space.dist.cols() != n)
    detail::add_issue(rep, "distance matrix is not square");
  if (space.weights.size() != n)
    detail::add_issue(rep, "weights length does not match point count");
  if (!space.labels.empty() && static_cast<Index>(space.labels.size()) != n)
    detail::add_issue(rep, "labels length does not match point count");
  if (!rep.ok()) return rep;

  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(space.dist(i, i)) || space.dist(i, i) != 0.0)
      detail::add_issue(rep, "nonzero diagonal at (" + std::to_string(i) + "," +
                                 std::to_string(i) + ")");
    for (Index j = i + 1; j < n; ++j) {
      const double dij = space.dist(i, j);
      const double dji = space.dist(j, i);
      if (!std::isfinite(dij) || !std::isfinite(dji)) {
        detail::add_issue(rep, "non-finite distance at (" + std::to_string(i) +
                                   "," + std::to_string(j) + ")");
        continue;
      }
      if (dij != dji)
        detail::add_issue(rep, "symmetry violation at (" + std::to_string(i) +
                                   "," + std::to_string(j) + ")");
      if (dij < 0.0)
        detail::add_issue(rep, "negative distance at (" + std::to_string(i) +
                                   "," + std::to_string(j) + ")");
    }
  }

  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        if (space.dist(i, k) > space.dist(i, j) + space.dist(j, k) + kTriangleTol) {
          detail::add_issue(rep, "triangle violation at (" + std::to_string(i) +
                                     "," + std::to_string(j) + "," +
                                     std::to_string(k) + ")");
        }

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double w = space.weights(i);
    if (!(w > 0.0))
      detail::add_issue(rep, "nonpositive weight at " + std::to_string(i));
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTol)
    detail::add_issue(rep, "weights sum to " + std::to_string(total) +
                               ", expected 1");
  return rep;
}

/// Builds the Euclidean metric-measure space of a point cloud. Weights are
/// copied (uniform when absent), giving the empirical measure by default.
inline FiniteMetricMeasureSpace from_point_cloud(const PointCloud& cloud) {
  const Index n = cloud.size();
  if (n == 0) throw std::invalid_argument("from_point_cloud: empty cloud");
  if (!cloud.coords.allFinite())
    throw std::invalid_argument("from_point_cloud: non-finite coordinate");
  FiniteMetricMeasureSpace out;
  out.dist = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (cloud.coords.row(i) - cloud.coords.row(j)).norm();
      out.dist(i, j) = d;
      out.dist(j, i) = d;
    }
  out.weights = cloud.effective_weights();
  out.labels = cloud.labels;
  return out;
}

/// Indices of the closed ball { j : d(center, j) <= radius }; always
/// contains the center. Returned sorted ascending.
inline std::vector<Index> closed_ball(const FiniteMetricMeasureSpace& space,
                                      Index center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("closed_ball: negative radius");
  std::vector<Index> ball;
  for (Index j = 0; j < space.size(); ++j)
    if (space.dist(center, j) <= radius) ball.push_back(j);
  return ball;
}

inline double diameter(const FiniteMetricMeasureSpace& space) {
  return space.dist.maxCoeff();
}

inline double diameter(const PointCloud& cloud) {
  double d = 0.0;
  for (Index i = 0; i < cloud.size(); ++i)
    for (Index j = i + 1; j < cloud.size(); ++j)
      d = std::max(d, (cloud.coords.row(i) - cloud.coords.row(j)).norm());
  return d;
}

}  // namespace wt
