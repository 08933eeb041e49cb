#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wt/localization.hpp"
#include "wt/localized_measure.hpp"
#include "wt/metric_space.hpp"
#include "wt/ot.hpp"
#include "wt/transform.hpp"

namespace wt {

/// Ball-mass lower bound min(1, (r/D)^lambda) valid for any measure whose
/// ball masses grow no faster than the lambda power law below diameter
/// bound D.
inline double psi(double lambda, double D, double r) {
  if (!(lambda > 0.0) || !(D > 0.0) || !(r > 0.0))
    throw std::invalid_argument("psi: arguments must be positive");
  if (r >= D) return 1.0;
  return std::exp(lambda * std::log(r / D));
}

/// Perturbation-growth bound eta/psi(eps) + [(1 + eta/eps)^lambda - 1];
/// increasing in eta with phi(0) = 0. May overflow to +inf for large
/// exponents, which callers treat as a trivially satisfied bound.
inline double phi(double lambda, double D, double epsilon, double eta) {
  if (eta < 0.0) throw std::invalid_argument("phi: eta must be nonnegative");
  if (!(lambda > 0.0) || !(D > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("phi: parameters must be positive");
  if (eta == 0.0) return 0.0;
  const double growth = std::expm1(lambda * std::log1p(eta / epsilon));
  return eta / psi(lambda, D, epsilon) + growth;
}

struct DoublingWitness {
  Index x = 0;
  double r1 = 0.0;
  double r2 = 0.0;
};

struct DoublingCertificate {
  double lambda = 1.0;
  DoublingWitness witness;  // triple attaining the maximum ratio exponent
};

/// Radii whose ratio sits below this floor count as the same breakpoint.
/// Finite spaces cannot satisfy the growth condition for radii pairs
/// straddling one atom boundary (the exponent diverges as the ratio tends
/// to 1), so such pairs are excluded as degenerate rather than certified;
/// the floor also keeps ulp-level distance ties from forcing astronomical
/// exponents.
inline constexpr double kRadiusDistinctness = 1e-9;

/// Least exponent lambda with alpha(B_r1(x)) / alpha(B_r2(x)) <= (r1/r2)^lambda
/// over every point and every pair of breakpoint radii (the distinct positive
/// distances from x, plus the diameter bound D) with r1/r2 above the
/// distinctness floor, using attained closed-ball masses. Floor of 1 by
/// convention (degenerate spaces certify lambda = 1).
inline DoublingCertificate certify_doubling(const FiniteMetricMeasureSpace& space,
                                            double D = 0.0) {
  const Index n = space.size();
  if (D <= 0.0) D = std::max(diameter(space), 1e-300) * (1.0 + 1e-6);
  DoublingCertificate cert;
  cert.lambda = 1.0;
  for (Index x = 0; x < n; ++x) {
    std::vector<double> radii;
    radii.reserve(n);
    for (Index j = 0; j < n; ++j)
      if (space.dist(x, j) > 0.0) radii.push_back(space.dist(x, j));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    radii.push_back(D);
    std::vector<double> mass(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
      double m = 0.0;
      for (Index j = 0; j < n; ++j)
        if (space.dist(x, j) <= radii[k]) m += space.weights(j);
      mass[k] = m;
    }
    for (std::size_t j = 0; j < radii.size(); ++j)
      for (std::size_t k = j + 1; k < radii.size(); ++k) {
        if (mass[k] <= mass[j]) continue;
        if (radii[k] <= radii[j] * (1.0 + kRadiusDistinctness)) continue;
        const double lam = std::log(mass[k] / mass[j]) / std::log(radii[k] / radii[j]);
        if (lam > cert.lambda) {
          cert.lambda = lam;
          cert.witness = {x, radii[k], radii[j]};
        }
      }
  }
  return cert;
}

/// Prokhorov distance by subset enumeration: the least delta such that
/// mu(A) <= nu(A^delta) + delta for every A in the support of mu, with the
/// strict fattening A^delta = { y : d(y, A) < delta }. Monotone feasibility
/// bisected to well below 1e-9. `ground` is the square ambient metric both
/// measures index into.
inline double prokhorov_bruteforce(const LocalizedMeasure& mu,
                                   const LocalizedMeasure& nu,
                                   const Matrix& ground) {
  check_localized(mu, "prokhorov_bruteforce");
  check_localized(nu, "prokhorov_bruteforce");
  const std::size_t p = mu.size(), q = nu.size();
  if (p + q > 30 || p > 20)
    throw std::invalid_argument(
        "prokhorov_bruteforce: support too large for subset enumeration; "
        "use the transport-based bound checks instead");

  // min-distance from each nu point to each subset of supp(mu), built
  // incrementally over the subset lattice.
  const std::size_t masks = std::size_t(1) << p;
  std::vector<double> mind(masks * q, std::numeric_limits<double>::infinity());
  std::vector<double> mass_mu(masks, 0.0);
  for (std::size_t mask = 1; mask < masks; ++mask) {
    const unsigned low = static_cast<unsigned>(std::countr_zero(mask));
    const std::size_t rest = mask & (mask - 1);
    mass_mu[mask] = mass_mu[rest] + mu.mass[low];
    const double* prev = &mind[rest * q];
    double* cur = &mind[mask * q];
    for (std::size_t t = 0; t < q; ++t)
      cur[t] = std::min(prev[t], ground(mu.support[low], nu.support[t]));
  }

  auto feasible = [&](double delta) {
    for (std::size_t mask = 1; mask < masks; ++mask) {
      double covered = 0.0;
      const double* cur = &mind[mask * q];
      for (std::size_t t = 0; t < q; ++t)
        if (cur[t] < delta) covered += nu.mass[t];
      if (mass_mu[mask] > covered + delta) return false;
    }
    return true;
  };

  double lo = 0.0, hi = std::max(ground.maxCoeff(), 1.0) + 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// One verified inequality: lhs <= rhs with the achieved slack and the
/// parameters that produced the bound.
struct StabilityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double epsilon = 0.0;
  double lambda = 0.0;
  double diameter_bound = 0.0;  // D
  double perturbation = 0.0;    // the eta fed to phi (or d_P for sandwich checks)
};

/// Transport/Prokhorov sandwich d_P^2 <= W1 <= (1 + diam(supp)) d_P, with
/// the diameter restricted to the union of the two supports.
struct SandwichReport {
  StabilityReport lower;  // d_P^2 <= W1
  StabilityReport upper;  // W1 <= (1 + diam) d_P
};

inline SandwichReport check_gibbs_su(const LocalizedMeasure& mu,
                                     const LocalizedMeasure& nu,
                                     const Matrix& ground, double diam) {
  const double dp = prokhorov_bruteforce(mu, nu, ground);
  const double w1 = wasserstein_exact(mu, nu, ground_slice(ground, mu, nu)).cost;
  std::vector<Index> support_union;
  support_union.insert(support_union.end(), mu.support.begin(), mu.support.end());
  support_union.insert(support_union.end(), nu.support.begin(), nu.support.end());
  double diam_s = 0.0;
  for (Index i : support_union)
    for (Index j : support_union) diam_s = std::max(diam_s, ground(i, j));
  diam_s = std::min(diam_s, diam);

  SandwichReport rep;
  rep.lower = {dp * dp, w1, w1 - dp * dp, 0.0, 0.0, diam_s, dp};
  rep.upper = {w1, (1.0 + diam_s) * dp, (1.0 + diam_s) * dp - w1,
               0.0, 0.0, diam_s, dp};
  return rep;
}

namespace detail {

struct StabilityInputs {
  double lambda = 0.0;
  double D = 0.0;
  double eta = 0.0;  // sqrt of the full-space transport distance
  double rhs_base = 0.0;  // (1 + 2 eps) phi(eta)
};

inline LocalizedMeasure full_measure(const Vector& weights) {
  LocalizedMeasure m;
  m.support.resize(weights.size());
  m.mass.resize(weights.size());
  for (Index i = 0; i < weights.size(); ++i) {
    m.support[i] = i;
    m.mass[i] = weights(i);
  }
  return m;
}

inline StabilityInputs stability_inputs(const FiniteMetricMeasureSpace& alpha_space,
                                        const Vector& beta_weights,
                                        double epsilon) {
  FiniteMetricMeasureSpace beta_space = alpha_space;
  beta_space.weights = beta_weights;
  StabilityInputs in;
  in.D = diameter(alpha_space) * (1.0 + 1e-6);
  in.lambda = std::max(certify_doubling(alpha_space, in.D).lambda,
                       certify_doubling(beta_space, in.D).lambda);
  const double w1 = wasserstein_exact(full_measure(alpha_space.weights),
                                      full_measure(beta_weights),
                                      alpha_space.dist)
                        .cost;
  in.eta = std::sqrt(std::max(w1, 0.0));
  in.rhs_base = (1.0 + 2.0 * epsilon) * phi(in.lambda, in.D, epsilon, in.eta);
  return in;
}

}  // namespace detail

/// Worst-point localization gap between two measures on the same ground
/// metric, against the (1 + 2 eps) phi(sqrt(W1)) bound.
inline StabilityReport truncation_stability(const FiniteMetricMeasureSpace& alpha_space,
                                            const Vector& beta_weights,
                                            double epsilon) {
  if (beta_weights.size() != alpha_space.size())
    throw std::invalid_argument("truncation_stability: weight length mismatch");
  const auto in = detail::stability_inputs(alpha_space, beta_weights, epsilon);
  FiniteMetricMeasureSpace beta_space = alpha_space;
  beta_space.weights = beta_weights;
  double lhs = 0.0;
  for (Index x = 0; x < alpha_space.size(); ++x) {
    const LocalizedMeasure ma = localize_truncation(alpha_space, x, epsilon);
    const LocalizedMeasure mb = localize_truncation(beta_space, x, epsilon);
    lhs = std::max(lhs, wasserstein_exact(
                            ma, mb, ground_slice(alpha_space.dist, ma, mb))
                            .cost);
  }
  return {lhs, in.rhs_base, in.rhs_base - lhs, epsilon, in.lambda, in.D, in.eta};
}

/// Worst-pair deviation of the transformed metrics of two measures, against
/// twice the localization bound.
inline StabilityReport metric_stability(const FiniteMetricMeasureSpace& alpha_space,
                                        const Vector& beta_weights,
                                        double epsilon) {
  if (beta_weights.size() != alpha_space.size())
    throw std::invalid_argument("metric_stability: weight length mismatch");
  const auto in = detail::stability_inputs(alpha_space, beta_weights, epsilon);
  FiniteMetricMeasureSpace beta_space = alpha_space;
  beta_space.weights = beta_weights;
  TransformConfig cfg;
  cfg.localization.kind = LocalizationConfig::Kind::truncation;
  cfg.localization.epsilon = epsilon;
  cfg.solver.method = SolverConfig::Method::exact;
  const Matrix da = transform_once(alpha_space, cfg).dist;
  const Matrix db = transform_once(beta_space, cfg).dist;
  const double lhs = (da - db).cwiseAbs().maxCoeff();
  const double rhs = 2.0 * in.rhs_base;
  return {lhs, rhs, rhs - lhs, epsilon, in.lambda, in.D, in.eta};
}

/// Worst-point gap between the truncation means of two measures on a
/// Euclidean cloud; bounded by the localization bound, and also by the
/// localization gap itself (reported for the chain check).
struct MeanShiftStabilityReport : StabilityReport {
  double localization_lhs = 0.0;  // the truncation_stability lhs
};

inline MeanShiftStabilityReport meanshift_stability(const PointCloud& cloud,
                                                    const Vector& beta_weights,
                                                    double epsilon) {
  if (beta_weights.size() != cloud.size())
    throw std::invalid_argument("meanshift_stability: weight length mismatch");
  FiniteMetricMeasureSpace alpha_space = from_point_cloud(cloud);
  const auto in = detail::stability_inputs(alpha_space, beta_weights, epsilon);
  FiniteMetricMeasureSpace beta_space = alpha_space;
  beta_space.weights = beta_weights;
  double lhs = 0.0, loc_lhs = 0.0;
  for (Index x = 0; x < cloud.size(); ++x) {
    const LocalizedMeasure ma = localize_truncation(alpha_space, x, epsilon);
    const LocalizedMeasure mb = localize_truncation(beta_space, x, epsilon);
    Eigen::RowVectorXd mean_a = Eigen::RowVectorXd::Zero(cloud.dim());
    Eigen::RowVectorXd mean_b = Eigen::RowVectorXd::Zero(cloud.dim());
    for (std::size_t k = 0; k < ma.size(); ++k)
      mean_a += ma.mass[k] * cloud.coords.row(ma.support[k]);
    for (std::size_t k = 0; k < mb.size(); ++k)
      mean_b += mb.mass[k] * cloud.coords.row(mb.support[k]);
    lhs = std::max(lhs, (mean_a - mean_b).norm());
    loc_lhs = std::max(loc_lhs, wasserstein_exact(
                                    ma, mb, ground_slice(alpha_space.dist, ma, mb))
                                    .cost);
  }
  MeanShiftStabilityReport rep;
  rep.lhs = lhs;
  rep.rhs = in.rhs_base;
  rep.slack = in.rhs_base - lhs;
  rep.epsilon = epsilon;
  rep.lambda = in.lambda;
  rep.diameter_bound = in.D;
  rep.perturbation = in.eta;
  rep.localization_lhs = loc_lhs;
  return rep;
}

}  // namespace wt
