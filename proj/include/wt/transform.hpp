#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "wt/localization.hpp"
#include "wt/localized_measure.hpp"
#include "wt/metric_space.hpp"
#include "wt/ot.hpp"
#include "wt/parallel.hpp"

namespace wt {

struct TransformConfig {
  LocalizationConfig localization;
  SolverConfig solver;
  int iterations = 1;
  enum class EpsilonMode { absolute, relative };
  EpsilonMode epsilon_mode = EpsilonMode::absolute;  // relative: eps x current diameter
  int threads = 0;  // <= 0: WTX_THREADS or hardware
  // Optional 1d embedding enabling the one_dim solver.
  const Vector* coords_1d = nullptr;
  // Euclidean coordinates, required by meanshift_wrap localization.
  const Matrix* coords = nullptr;
};

struct IterationStats {
  int iteration = 0;       // 1-based
  double diameter = 0.0;   // of the produced metric
  double epsilon_used = 0.0;
  long solve_count = 0;
  double wall_ms = 0.0;
};

struct TransformTrace {
  std::vector<IterationStats> iterations;
};

namespace detail {

inline double effective_epsilon(const FiniteMetricMeasureSpace& space,
                                const TransformConfig& config) {
  if (config.epsilon_mode == TransformConfig::EpsilonMode::absolute)
    return config.localization.epsilon;
  return config.localization.epsilon * diameter(space);
}

inline FiniteMetricMeasureSpace transform_meanshift_wrap(
    const FiniteMetricMeasureSpace& space, const TransformConfig& config,
    double epsilon, long& solve_count) {
  if (config.coords == nullptr)
    throw std::invalid_argument("transform_once: meanshift localization requires coordinates");
  const Matrix& coords = *config.coords;
  const Index n = space.size();
  LocalizationConfig inner = config.localization;
  inner.epsilon = epsilon;
  // Means of the inner localizations on the current ambient metric.
  Matrix means(n, coords.cols());
  for (Index x = 0; x < n; ++x) {
    const LocalizedMeasure m =
        inner.inner == LocalizationConfig::Kind::truncation
            ? localize_truncation(space, x, epsilon)
            : localize_kernel(space, x, inner.kernel, epsilon);
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(coords.cols());
    for (std::size_t k = 0; k < m.size(); ++k)
      mean += m.mass[k] * coords.row(m.support[k]);
    means.row(x) = mean;
  }
  FiniteMetricMeasureSpace out;
  out.dist = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (means.row(i) - means.row(j)).norm();
      out.dist(i, j) = d;
      out.dist(j, i) = d;
      ++solve_count;
    }
  out.weights = space.weights;
  out.labels = space.labels;
  return out;
}

}  // namespace detail

/// One application of the transform: the output distance between two points
/// is the transport distance between their localized measures over the
/// current ambient metric. Each unordered pair is solved once, so symmetry
/// is exact by construction; pairs run concurrently into disjoint slots and
/// the result is identical for any thread count.
inline FiniteMetricMeasureSpace transform_once(const FiniteMetricMeasureSpace& space,
                                               const TransformConfig& config,
                                               IterationStats* stats = nullptr) {
  const auto started = std::chrono::steady_clock::now();
  const double epsilon = detail::effective_epsilon(space, config);
  if (epsilon == 0.0 &&
      config.epsilon_mode == TransformConfig::EpsilonMode::relative) {
    // Zero diameter: every localization is the full measure, the output is
    // the (all-zero) input.
    if (stats != nullptr) {
      stats->diameter = 0.0;
      stats->epsilon_used = 0.0;
      stats->solve_count = 0;
      stats->wall_ms = 0.0;
    }
    return space;
  }
  if (!(epsilon > 0.0))
    throw std::invalid_argument("transform_once: epsilon must be positive");
  long solve_count = 0;

  FiniteMetricMeasureSpace out;
  if (config.localization.kind == LocalizationConfig::Kind::meanshift_wrap) {
    out = detail::transform_meanshift_wrap(space, config, epsilon, solve_count);
  } else {
    LocalizationConfig loc = config.localization;
    loc.epsilon = epsilon;
    const std::vector<LocalizedMeasure> local = localize_all(space, loc);
    const Index n = space.size();
    out.dist = Matrix::Zero(n, n);
    const long pairs = static_cast<long>(n) * (n - 1) / 2;
    std::vector<double> values(pairs, 0.0);
    std::string failure;
    std::mutex failure_mutex;
    parallel_for(pairs, resolve_threads(config.threads), [&](long k) {
      // Decode unordered pair index k -> (i, j), i < j.
      Index i = 0;
      long rem = k;
      long row = n - 1;
      while (rem >= row) {
        rem -= row;
        --row;
        ++i;
      }
      const Index j = i + 1 + static_cast<Index>(rem);
      try {
        const Matrix g = ground_slice(space.dist, local[i], local[j]);
        values[k] = wasserstein_distance(local[i], local[j], g, config.solver,
                                         config.coords_1d);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure.empty())
          failure = "transform_once: solver failed on pair (" +
                    std::to_string(i) + "," + std::to_string(j) + "): " + e.what();
      }
    });
    if (!failure.empty()) throw std::runtime_error(failure);
    long k = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j, ++k) {
        out.dist(i, j) = values[k];
        out.dist(j, i) = values[k];
      }
    solve_count = pairs;
    out.weights = space.weights;
    out.labels = space.labels;
  }

  if (stats != nullptr) {
    stats->diameter = diameter(out);
    stats->epsilon_used = epsilon;
    stats->solve_count = solve_count;
    stats->wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  }
  return out;
}

/// Iterates the transform, each round feeding the produced metric back in
/// as the ambient metric; the weights stay fixed throughout. In relative
/// mode epsilon is recomputed from the current diameter before each round.
inline std::pair<FiniteMetricMeasureSpace, TransformTrace> transform_iterate(
    const FiniteMetricMeasureSpace& space, const TransformConfig& config) {
  if (config.iterations < 0)
    throw std::invalid_argument("transform_iterate: negative iteration count");
  FiniteMetricMeasureSpace current = space;
  TransformTrace trace;
  for (int it = 1; it <= config.iterations; ++it) {
    IterationStats stats;
    stats.iteration = it;
    try {
      current = transform_once(current, config, &stats);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(it) + ": " + e.what());
    }
    trace.iterations.push_back(stats);
  }
  return {std::move(current), std::move(trace)};
}

/// Scale-asymptotics probe on the real line: the transform distance of a
/// density truncated at scale epsilon versus its second-order expansion
/// (x' - x) + (1/3)[f'(x')/f(x') - f'(x)/f(x)] eps^2, with derivatives by
/// central differences at the grid spacing.
struct TaylorResidual {
  double d_eps = 0.0;
  double first_order = 0.0;
  double residual = 0.0;
};

inline TaylorResidual taylor_residual_1d(const std::function<double(double)>& density,
                                         double a, double b, double x, double xp,
                                         double epsilon, long grid_n) {
  if (!(xp > x)) throw std::invalid_argument("taylor_residual_1d: requires x' > x");
  if (grid_n < 2) throw std::invalid_argument("taylor_residual_1d: grid too small");
  if (!(epsilon > 0.0)) throw std::invalid_argument("taylor_residual_1d: epsilon must be positive");
  const double fx = density(x), fxp = density(xp);
  if (fx < 1e-12 || fxp < 1e-12)
    throw std::invalid_argument("taylor_residual_1d: density vanishes at a probe point");

  const double h = (b - a) / static_cast<double>(grid_n);
  Vector coords(grid_n);
  std::vector<double> mass(grid_n);
  double total = 0.0;
  for (long i = 0; i < grid_n; ++i) {
    coords(i) = a + (static_cast<double>(i) + 0.5) * h;  // midpoint grid
    mass[i] = density(coords(i));
    total += mass[i];
  }

  auto truncated = [&](double center) {
    LocalizedMeasure m;
    double t = 0.0;
    for (long i = 0; i < grid_n; ++i)
      if (std::abs(coords(i) - center) <= epsilon) {
        m.support.push_back(i);
        m.mass.push_back(mass[i]);
        t += mass[i];
      }
    for (double& v : m.mass) v /= t;
    return m;
  };

  TaylorResidual out;
  out.d_eps = wasserstein_1d(truncated(x), truncated(xp), coords);
  const double fpx = (density(x + h) - density(x - h)) / (2.0 * h);
  const double fpxp = (density(xp + h) - density(xp - h)) / (2.0 * h);
  out.first_order = (xp - x) + (fpxp / fxp - fpx / fx) * epsilon * epsilon / 3.0;
  out.residual = std::abs(out.d_eps - out.first_order);
  return out;
}

}  // namespace wt
