#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "test_util.hpp"
#include "wt/wt.hpp"

using namespace wt;

namespace {

// A random feasible coupling: northwest-corner fill under random row and
// column orders. Used as the Monte-Carlo optimality yardstick.
Matrix random_coupling(SplitMix64& rng, const std::vector<double>& a,
                       const std::vector<double>& b) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  std::vector<int> rows(m), cols(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  for (int i = m - 1; i > 0; --i)
    std::swap(rows[i], rows[static_cast<int>(rng.uniform() * (i + 1))]);
  for (int j = n - 1; j > 0; --j)
    std::swap(cols[j], cols[static_cast<int>(rng.uniform() * (j + 1))]);
  Matrix plan = Matrix::Zero(m, n);
  int i = 0, j = 0;
  double ra = a[rows[0]], rb = b[cols[0]];
  while (true) {
    const double f = std::min(ra, rb);
    plan(rows[i], cols[j]) += f;
    ra -= f;
    rb -= f;
    if (i == m - 1 && j == n - 1) break;
    if ((ra <= rb && i < m - 1) || j == n - 1)
      ra = a[rows[++i]];
    else
      rb = b[cols[++j]];
  }
  return plan;
}

LocalizedMeasure measure(std::vector<Index> support, std::vector<double> mass) {
  return {std::move(support), std::move(mass)};
}

}  // namespace

TEST_CASE("dirac pair costs the ground distance") {
  Matrix ground(1, 1);
  ground << 2.75;
  const auto plan = wasserstein_exact(dirac(3), dirac(9), ground);
  CHECK(plan.cost == doctest::Approx(2.75).epsilon(1e-14));
  CHECK(plan.plan(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two-point mass imbalance forces 0.5 across distance 1") {
  Matrix ground(2, 2);
  ground << 0.0, 1.0, 1.0, 0.0;
  const auto mu = measure({0, 1}, {0.7, 0.3});
  const auto nu = measure({0, 1}, {0.2, 0.8});
  CHECK(wasserstein_exact(mu, nu, ground).cost == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("line example: shifted halves cost 1") {
  const auto space = wtt::line_space({0.0, 1.0, 2.0});
  const auto mu = measure({0, 1}, {0.5, 0.5});
  const auto nu = measure({1, 2}, {0.5, 0.5});
  const Matrix g = ground_slice(space.dist, mu, nu);
  const double cost = wasserstein_exact(mu, nu, g).cost;
  CHECK(cost == doctest::Approx(1.0).epsilon(1e-12));
  Vector coords(3);
  coords << 0.0, 1.0, 2.0;
  CHECK(wasserstein_1d(mu, nu, coords) == doctest::Approx(cost).epsilon(1e-12));
}

TEST_CASE("mass imbalance beyond 1e-9 is rejected") {
  Matrix ground(1, 2);
  ground << 1.0, 2.0;
  auto nu = measure({0, 1}, {0.5, 0.5});
  nu.mass[0] = 0.50000001;  // sums to 1.00000001
  CHECK_THROWS_AS(wasserstein_exact(dirac(0), nu, ground), std::invalid_argument);
}

TEST_CASE("exact plan satisfies marginals and beats random couplings") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform() * 9);
    const int n = 2 + static_cast<int>(rng.uniform() * 9);
    Matrix ground(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ground(i, j) = rng.uniform();
    LocalizedMeasure mu, nu;
    for (int i = 0; i < m; ++i) mu.support.push_back(i);
    for (int j = 0; j < n; ++j) nu.support.push_back(j);
    mu.mass.resize(m);
    nu.mass.resize(n);
    double sa = 0, sb = 0;
    for (auto& v : mu.mass) sa += (v = 0.05 + rng.uniform());
    for (auto& v : nu.mass) sb += (v = 0.05 + rng.uniform());
    for (auto& v : mu.mass) v /= sa;
    for (auto& v : nu.mass) v /= sb;

    const auto plan = wasserstein_exact(mu, nu, ground);
    CAPTURE(trial);
    CHECK(plan.marginal_residual < 1e-9);
    CHECK((plan.plan.array() >= 0.0).all());
    const double recomputed = (plan.plan.array() * ground.array()).sum();
    CHECK(plan.cost == doctest::Approx(recomputed).epsilon(1e-12));
    const int couplings = trial == 0 ? 1000 : 100;
    for (int c = 0; c < couplings; ++c) {
      const Matrix q = random_coupling(rng, mu.mass, nu.mass);
      CHECK(plan.cost <= (q.array() * ground.array()).sum() + 1e-9);
    }
  }
}

TEST_CASE("transport distance is a metric on random instances") {
  SplitMix64 rng(2023);
  for (int trial = 0; trial < 20; ++trial) {
    const auto space = wtt::random_space(rng, 9);
    const auto mu = wtt::random_measure(rng, 9, 6);
    const auto nu = wtt::random_measure(rng, 9, 6);
    const auto rho = wtt::random_measure(rng, 9, 6);
    auto d = [&](const LocalizedMeasure& p, const LocalizedMeasure& q) {
      return wasserstein_exact(p, q, ground_slice(space.dist, p, q)).cost;
    };
    CAPTURE(trial);
    CHECK(d(mu, mu) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d(mu, nu) == doctest::Approx(d(nu, mu)).epsilon(1e-9));
    CHECK(d(mu, rho) <= d(mu, nu) + d(nu, rho) + 1e-9);
  }
}

TEST_CASE("repeated exact solves agree bitwise") {
  SplitMix64 rng(5);
  const auto space = wtt::random_space(rng, 10);
  const auto mu = wtt::random_measure(rng, 10, 8);
  const auto nu = wtt::random_measure(rng, 10, 8);
  const Matrix g = ground_slice(space.dist, mu, nu);
  const auto first = wasserstein_exact(mu, nu, g);
  const auto second = wasserstein_exact(mu, nu, g);
  CHECK(first.cost == second.cost);
  CHECK((first.plan.array() == second.plan.array()).all());
}

TEST_CASE("one-dimensional closed form") {
  SUBCASE("uniform on {0,1} versus dirac at 0.5") {
    Vector coords(3);
    coords << 0.0, 1.0, 0.5;
    const auto mu = measure({0, 1}, {0.5, 0.5});
    const auto nu = measure({2}, {1.0});
    CHECK(wasserstein_1d(mu, nu, coords) == doctest::Approx(0.5).epsilon(1e-12));
    Matrix g(2, 1);
    g << 0.5, 0.5;
    CHECK(wasserstein_exact(mu, nu, g).cost == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("identical measures have distance zero") {
    Vector coords(2);
    coords << 0.3, 0.9;
    const auto mu = measure({0, 1}, {0.4, 0.6});
    CHECK(wasserstein_1d(mu, mu, coords) == 0.0);
  }
  SUBCASE("diracs at 0 and 2") {
    Vector coords(2);
    coords << 0.0, 2.0;
    CHECK(wasserstein_1d(dirac(0), dirac(1), coords) == doctest::Approx(2.0));
  }
  SUBCASE("matches the exact solver on random instances") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 12;
      Vector coords(n);
      for (Index i = 0; i < n; ++i) coords(i) = rng.uniform() * 3.0;
      const auto mu = wtt::random_measure(rng, n, 12);
      const auto nu = wtt::random_measure(rng, n, 12);
      Matrix g(mu.size(), nu.size());
      for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
          g(static_cast<Index>(i), static_cast<Index>(j)) =
              std::abs(coords(mu.support[i]) - coords(nu.support[j]));
      CAPTURE(trial);
      CHECK(wasserstein_1d(mu, nu, coords) ==
            doctest::Approx(wasserstein_exact(mu, nu, g).cost).epsilon(1e-9));
    }
  }
}

TEST_CASE("sinkhorn") {
  SUBCASE("identical measures cost stays near zero") {
    const auto space = wtt::line_space({0.0, 1.0, 2.0, 3.0});
    const auto mu = measure({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
    SolverConfig cfg;
    cfg.sinkhorn_scheduled = false;
    cfg.sinkhorn_reg = 0.05;
    const auto plan =
        wasserstein_sinkhorn(mu, mu, ground_slice(space.dist, mu, mu), cfg);
    CHECK(plan.cost <= cfg.sinkhorn_reg * std::log(4.0) + 1e-6);
  }

  SUBCASE("dirac pair is forced to the ground distance") {
    Matrix ground(1, 1);
    ground << 3.0;
    const auto plan = wasserstein_sinkhorn(dirac(0), dirac(1), ground);
    CHECK(plan.cost == doctest::Approx(3.0).epsilon(1e-9));
  }

  SUBCASE("scheduled solve tracks the exact cost within 1e-3") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 15; ++trial) {
      const auto space = wtt::random_space(rng, 10);
      const auto mu = wtt::random_measure(rng, 10, 10);
      const auto nu = wtt::random_measure(rng, 10, 10);
      const Matrix g = ground_slice(space.dist, mu, nu);
      const double exact = wasserstein_exact(mu, nu, g).cost;
      const double sk = wasserstein_sinkhorn(mu, nu, g).cost;
      CAPTURE(trial);
      CHECK(std::abs(sk - exact) / std::max(exact, 1e-9) <= 1e-3);
    }
  }

  SUBCASE("error shrinks monotonically along the regularization ladder") {
    SplitMix64 rng(99);
    const auto space = wtt::random_space(rng, 8);
    const auto mu = wtt::random_measure(rng, 8, 8);
    const auto nu = wtt::random_measure(rng, 8, 8);
    const Matrix g = ground_slice(space.dist, mu, nu);
    const double exact = wasserstein_exact(mu, nu, g).cost;
    const double max_c = g.maxCoeff();
    double prev_err = std::numeric_limits<double>::infinity();
    for (double reg = 0.1 * max_c; reg >= 0.0009 * max_c; reg *= 0.5) {
      SolverConfig cfg;
      cfg.sinkhorn_reg = reg;
      cfg.sinkhorn_scheduled = true;
      const double err = std::abs(wasserstein_sinkhorn(mu, nu, g, cfg).cost - exact);
      CHECK(err <= prev_err + 1e-9);
      prev_err = err;
    }
  }

  SUBCASE("tiny regularization falls back to the log domain") {
    const auto space = wtt::line_space({0.0, 5.0, 10.0});
    const auto mu = measure({0, 1}, {0.5, 0.5});
    const auto nu = measure({1, 2}, {0.5, 0.5});
    const Matrix g = ground_slice(space.dist, mu, nu);
    SolverConfig cfg;
    cfg.sinkhorn_scheduled = false;
    cfg.sinkhorn_reg = 1e-3;  // exp(-10/1e-3) underflows the kernel matrix
    const auto plan = wasserstein_sinkhorn(mu, nu, g, cfg);
    const double exact = wasserstein_exact(mu, nu, g).cost;
    CHECK(plan.cost == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("mean gap never exceeds the transport distance") {
  SUBCASE("identical measures give (0, 0)") {
    Matrix coords(2, 2);
    coords << 0.0, 0.0, 1.0, 0.0;
    const auto mu = measure({0, 1}, {0.5, 0.5});
    const auto chk = mean_lower_bound_check(mu, mu, coords);
    CHECK(chk.mean_gap == doctest::Approx(0.0));
    CHECK(chk.w1 == doctest::Approx(0.0));
  }
  SUBCASE("diracs achieve equality") {
    Matrix coords(2, 2);
    coords << 0.0, 0.0, 3.0, 4.0;
    const auto chk = mean_lower_bound_check(dirac(0), dirac(1), coords);
    CHECK(chk.mean_gap == doctest::Approx(5.0));
    CHECK(chk.w1 == doctest::Approx(5.0));
  }
  SUBCASE("line example achieves equality at 1") {
    Matrix coords(3, 1);
    coords << 0.0, 1.0, 2.0;
    const auto mu = measure({0, 1}, {0.5, 0.5});
    const auto nu = measure({1, 2}, {0.5, 0.5});
    const auto chk = mean_lower_bound_check(mu, nu, coords);
    CHECK(chk.mean_gap == doctest::Approx(1.0));
    CHECK(chk.w1 == doctest::Approx(1.0));
  }
  SUBCASE("random instances satisfy the bound") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
      const auto cloud = wtt::random_cloud(rng, 10, 3);
      const auto mu = wtt::random_measure(rng, 10, 7);
      const auto nu = wtt::random_measure(rng, 10, 7);
      const auto chk = mean_lower_bound_check(mu, nu, cloud.coords);
      CAPTURE(trial);
      CHECK(chk.mean_gap <= chk.w1 + 1e-9);
    }
  }
}
