#pragma once

#include <cmath>
#include <stdexcept>

#include "wt/localized_measure.hpp"
#include "wt/metric_space.hpp"

namespace wt {

/// Radial profiles evaluated on the unsquared ratio t = d / epsilon.
enum class Kernel { truncation, gaussian, epanechnikov };

inline double kernel_eval(Kernel k, double t) {
  if (t < 0.0) throw std::invalid_argument("kernel_eval: negative argument");
  switch (k) {
    case Kernel::truncation:
      return t <= 1.0 ? 1.0 : 0.0;
    case Kernel::gaussian:
      return std::exp(-t / 2.0);
    case Kernel::epanechnikov:
      return std::max(1.0 - t, 0.0);
  }
  throw std::logic_error("kernel_eval: unknown kernel");
}

/// Gaussian weights below this threshold are dropped from supports so the
/// localized measures stay free of denormal-scale atoms.
inline constexpr double kKernelSupportFloor = 1e-15;

struct LocalizationConfig {
  enum class Kind { truncation, kernel, meanshift_wrap };
  Kind kind = Kind::truncation;
  double epsilon = 0.0;  // scale parameter, distance units
  Kernel kernel = Kernel::truncation;
  // For meanshift_wrap: the wrapped localization (truncation or kernel).
  Kind inner = Kind::truncation;
};

/// Restriction of the space's measure to the closed epsilon-ball at x,
/// renormalized. With uniform weights this is the neighbor-counting
/// measure.
inline LocalizedMeasure localize_truncation(const FiniteMetricMeasureSpace& space,
                                            Index x, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("localize_truncation: epsilon must be positive");
  LocalizedMeasure out;
  double total = 0.0;
  for (Index j = 0; j < space.size(); ++j)
    if (space.dist(x, j) <= epsilon) {
      out.support.push_back(j);
      out.mass.push_back(space.weights(j));
      total += space.weights(j);
    }
  for (double& m : out.mass) m /= total;
  return out;
}

/// Kernel-weighted localization: mass[j] proportional to
/// weights[j] * K(d(x, j) / epsilon), restricted to strictly positive
/// kernel weights.
inline LocalizedMeasure localize_kernel(const FiniteMetricMeasureSpace& space,
                                        Index x, Kernel kernel, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("localize_kernel: epsilon must be positive");
  LocalizedMeasure out;
  double total = 0.0;
  for (Index j = 0; j < space.size(); ++j) {
    const double k = kernel_eval(kernel, space.dist(x, j) / epsilon);
    if (k < kKernelSupportFloor) continue;
    const double w = space.weights(j) * k;
    out.support.push_back(j);
    out.mass.push_back(w);
    total += w;
  }
  for (double& m : out.mass) m /= total;
  return out;
}

/// The Dirac-at-mean wrapper: localize with the inner operator, then keep
/// only the Euclidean mean. Returns the mean's coordinates; the measure it
/// denotes is the Dirac there (generally a virtual point, not a data
/// point).
inline Eigen::RowVectorXd localize_meanshift(const PointCloud& cloud, Index x,
                                             const LocalizationConfig& config) {
  if (config.inner == LocalizationConfig::Kind::meanshift_wrap)
    throw std::invalid_argument("localize_meanshift: inner operator cannot be meanshift_wrap");
  const FiniteMetricMeasureSpace space = from_point_cloud(cloud);
  const LocalizedMeasure inner =
      config.inner == LocalizationConfig::Kind::truncation
          ? localize_truncation(space, x, config.epsilon)
          : localize_kernel(space, x, config.kernel, config.epsilon);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cloud.dim());
  for (std::size_t k = 0; k < inner.size(); ++k)
    mean += inner.mass[k] * cloud.coords.row(inner.support[k]);
  return mean;
}

/// Localize every point of the space with the configured operator
/// (truncation or kernel kinds; the meanshift wrapper lives on clouds).
inline std::vector<LocalizedMeasure> localize_all(
    const FiniteMetricMeasureSpace& space, const LocalizationConfig& config) {
  std::vector<LocalizedMeasure> out;
  out.reserve(space.size());
  for (Index x = 0; x < space.size(); ++x)
    out.push_back(config.kind == LocalizationConfig::Kind::truncation
                      ? localize_truncation(space, x, config.epsilon)
                      : localize_kernel(space, x, config.kernel, config.epsilon));
  return out;
}

}  // namespace wt
