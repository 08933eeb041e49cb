#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wt/localization.hpp"
#include "wt/metric_space.hpp"
#include "wt/ot.hpp"
#include "wt/parallel.hpp"

namespace wt {

struct MeanShiftConfig {
  Kernel kernel = Kernel::truncation;
  double epsilon = 0.0;
  enum class EpsilonMode { absolute, relative };
  EpsilonMode epsilon_mode = EpsilonMode::absolute;
  int iterations = 1;
  int threads = 0;
};

/// One simultaneous (Jacobi-style) kernel-mean update: every point moves to
/// the kernel-weighted mean of the snapshot positions. Weighted clouds feed
/// their weights into the kernel sums.
inline PointCloud meanshift_step(const PointCloud& cloud, const MeanShiftConfig& config) {
  const double eps = config.epsilon_mode == MeanShiftConfig::EpsilonMode::absolute
                         ? config.epsilon
                         : config.epsilon * diameter(cloud);
  if (eps == 0.0 && config.epsilon_mode == MeanShiftConfig::EpsilonMode::relative)
    return cloud;  // zero diameter: all points coincide, the step is the identity
  if (!(eps > 0.0))
    throw std::invalid_argument("meanshift_step: epsilon must be positive");
  const Index n = cloud.size();
  const Vector w = cloud.effective_weights();
  PointCloud out = cloud;
  parallel_for(n, resolve_threads(config.threads), [&](long i) {
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(cloud.dim());
    double den = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double d = (cloud.coords.row(j) - cloud.coords.row(i)).norm();
      const double k = w(j) * kernel_eval(config.kernel, d / eps);
      num += k * cloud.coords.row(j);
      den += k;
    }
    out.coords.row(i) = num / den;
  });
  return out;
}

struct MeanShiftIteration {
  int iteration = 0;
  double epsilon_used = 0.0;
  double max_displacement = 0.0;
  double diameter = 0.0;  // of the produced cloud
};

struct MeanShiftTrace {
  std::vector<MeanShiftIteration> iterations;
  std::vector<PointCloud> clouds;  // one snapshot per iteration
};

/// Fixed iteration count; in relative mode epsilon tracks the current
/// point-set diameter. No convergence test: the caller reads the reported
/// per-iteration max displacement instead.
inline std::pair<PointCloud, MeanShiftTrace> meanshift_run(const PointCloud& cloud,
                                                           const MeanShiftConfig& config) {
  if (config.iterations < 0)
    throw std::invalid_argument("meanshift_run: negative iteration count");
  PointCloud current = cloud;
  MeanShiftTrace trace;
  for (int it = 1; it <= config.iterations; ++it) {
    const double eps_used =
        config.epsilon_mode == MeanShiftConfig::EpsilonMode::absolute
            ? config.epsilon
            : config.epsilon * diameter(current);
    PointCloud next = meanshift_step(current, config);
    MeanShiftIteration rec;
    rec.iteration = it;
    rec.epsilon_used = eps_used;
    rec.max_displacement =
        (next.coords - current.coords).rowwise().norm().maxCoeff();
    rec.diameter = diameter(next);
    trace.iterations.push_back(rec);
    trace.clouds.push_back(next);
    current = std::move(next);
  }
  return {std::move(current), std::move(trace)};
}

/// Per-pair comparison of the mean-gap distance against the full transport
/// distance for truncation localizations on a Euclidean cloud. The mean gap
/// can never exceed the transport distance.
struct GapMatrices {
  Matrix ms_dist;  // ||mean(m(x_i)) - mean(m(x_j))||
  Matrix wt_dist;  // transport distance of the localized measures
};

inline GapMatrices meanshift_transform_gap(const PointCloud& cloud, double epsilon,
                                           int threads = 0) {
  const FiniteMetricMeasureSpace space = from_point_cloud(cloud);
  const Index n = space.size();
  std::vector<LocalizedMeasure> local;
  local.reserve(n);
  Matrix means(n, cloud.dim());
  for (Index x = 0; x < n; ++x) {
    local.push_back(localize_truncation(space, x, epsilon));
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cloud.dim());
    for (std::size_t k = 0; k < local.back().size(); ++k)
      mean += local.back().mass[k] * cloud.coords.row(local.back().support[k]);
    means.row(x) = mean;
  }
  GapMatrices out;
  out.ms_dist = Matrix::Zero(n, n);
  out.wt_dist = Matrix::Zero(n, n);
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  std::vector<double> ms(pairs), wt(pairs);
  parallel_for(pairs, resolve_threads(threads), [&](long k) {
    Index i = 0;
    long rem = k, row = n - 1;
    while (rem >= row) {
      rem -= row;
      --row;
      ++i;
    }
    const Index j = i + 1 + static_cast<Index>(rem);
    ms[k] = (means.row(i) - means.row(j)).norm();
    wt[k] = wasserstein_exact(local[i], local[j],
                              ground_slice(space.dist, local[i], local[j]))
                .cost;
  });
  long k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j, ++k) {
      out.ms_dist(i, j) = out.ms_dist(j, i) = ms[k];
      out.wt_dist(i, j) = out.wt_dist(j, i) = wt[k];
    }
  return out;
}

}  // namespace wt
