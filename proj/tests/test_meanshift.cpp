#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "wt/wt.hpp"

using namespace wt;

namespace {

MeanShiftConfig trunc_cfg(double epsilon, int iterations = 1) {
  MeanShiftConfig cfg;
  cfg.kernel = Kernel::truncation;
  cfg.epsilon = epsilon;
  cfg.iterations = iterations;
  return cfg;
}

}  // namespace

TEST_CASE("single point is a fixed point") {
  PointCloud one;
  one.coords = Matrix(1, 2);
  one.coords << 0.3, -0.7;
  const auto out = meanshift_step(one, trunc_cfg(1.0));
  CHECK((out.coords.array() == one.coords.array()).all());
}

TEST_CASE("line with unit epsilon contracts to {0.5, 1, 1.5}") {
  PointCloud line;
  line.coords = Matrix(3, 1);
  line.coords << 0.0, 1.0, 2.0;
  const auto out = meanshift_step(line, trunc_cfg(1.0));
  CHECK(out.coords(0, 0) == doctest::Approx(0.5));
  CHECK(out.coords(1, 0) == doctest::Approx(1.0));
  CHECK(out.coords(2, 0) == doctest::Approx(1.5));
}

TEST_CASE("centroid of a symmetric cluster is fixed") {
  PointCloud cloud;
  cloud.coords = Matrix(5, 2);
  cloud.coords << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0;
  for (Kernel k : {Kernel::truncation, Kernel::gaussian, Kernel::epanechnikov}) {
    auto cfg = trunc_cfg(3.0);
    cfg.kernel = k;
    const auto out = meanshift_step(cloud, cfg);
    CHECK(out.coords.row(4).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("epsilon beyond the diameter sends everything to the centroid") {
  SplitMix64 rng(21);
  const auto cloud = wtt::random_cloud(rng, 12, 2);
  const auto out = meanshift_step(cloud, trunc_cfg(diameter(cloud) + 1.0));
  const Eigen::RowVectorXd centroid = cloud.coords.colwise().mean();
  for (Index i = 0; i < out.size(); ++i)
    CHECK((out.coords.row(i) - centroid).norm() <= 1e-12);
}

TEST_CASE("weighted clouds use weighted means") {
  PointCloud pair;
  pair.coords = Matrix(2, 1);
  pair.coords << 0.0, 1.0;
  pair.weights = Vector(2);
  pair.weights << 0.75, 0.25;
  const auto out = meanshift_step(pair, trunc_cfg(2.0));
  CHECK(out.coords(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("hull never grows") {
  SplitMix64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cloud = wtt::random_cloud(rng, 15, 2);
    auto cfg = trunc_cfg(0.2 + rng.uniform());
    cfg.kernel = trial % 2 ? Kernel::gaussian : Kernel::epanechnikov;
    const auto out = meanshift_step(cloud, cfg);
    // Means of subsets stay inside the bounding box of the inputs.
    for (Index j = 0; j < cloud.dim(); ++j) {
      CHECK(out.coords.col(j).minCoeff() >= cloud.coords.col(j).minCoeff() - 1e-12);
      CHECK(out.coords.col(j).maxCoeff() <= cloud.coords.col(j).maxCoeff() + 1e-12);
    }
  }
}

TEST_CASE("commutes with rigid motions") {
  SplitMix64 rng(23);
  const auto cloud = wtt::random_cloud(rng, 10, 2);
  const double theta = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  Eigen::RowVector2d shift(0.3, -1.1);

  PointCloud moved = cloud;
  moved.coords = (cloud.coords * rot.transpose()).rowwise() + shift;
  const auto cfg = trunc_cfg(0.4);
  const Matrix stepped_then_moved =
      (meanshift_step(cloud, cfg).coords * rot.transpose()).rowwise() + shift;
  const Matrix moved_then_stepped = meanshift_step(moved, cfg).coords;
  CHECK((stepped_then_moved - moved_then_stepped).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("run") {
  SUBCASE("zero iterations returns the input") {
    SplitMix64 rng(24);
    const auto cloud = wtt::random_cloud(rng, 6, 2);
    const auto [out, trace] = meanshift_run(cloud, trunc_cfg(0.5, 0));
    CHECK((out.coords.array() == cloud.coords.array()).all());
    CHECK(trace.iterations.empty());
  }
  SUBCASE("two tight blobs contract to their centroids and stay fixed") {
    PointCloud cloud;
    cloud.coords = Matrix(6, 1);
    cloud.coords << 0.0, 0.1, 0.2, 10.0, 10.1, 10.2;
    const auto [out, trace] = meanshift_run(cloud, trunc_cfg(0.5, 3));
    for (Index i = 0; i < 3; ++i) CHECK(out.coords(i, 0) == doctest::Approx(0.1));
    for (Index i = 3; i < 6; ++i) CHECK(out.coords(i, 0) == doctest::Approx(10.1));
    CHECK(trace.iterations.back().max_displacement <= 1e-12);
  }
  SUBCASE("relative epsilon recomputes from the current diameter") {
    SplitMix64 rng(25);
    const auto cloud = wtt::random_cloud(rng, 8, 2);
    auto cfg = trunc_cfg(0.3, 2);
    cfg.epsilon_mode = MeanShiftConfig::EpsilonMode::relative;
    const auto [out, trace] = meanshift_run(cloud, cfg);
    REQUIRE(trace.iterations.size() == 2);
    CHECK(trace.iterations[0].epsilon_used == doctest::Approx(0.3 * diameter(cloud)));
    CHECK(trace.iterations[1].epsilon_used ==
          doctest::Approx(0.3 * trace.iterations[0].diameter));
  }
}

TEST_CASE("mean gap lower-bounds the transform distance") {
  SUBCASE("diracs: both matrices equal the input metric") {
    PointCloud cloud;
    cloud.coords = Matrix(3, 2);
    cloud.coords << 0.0, 0.0, 1.0, 0.0, 0.0, 2.0;
    const auto space = from_point_cloud(cloud);
    const auto gap = meanshift_transform_gap(cloud, 1e-6);
    CHECK((gap.ms_dist - space.dist).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((gap.wt_dist - space.dist).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("1d clouds satisfy the bound with frequent equality") {
    SplitMix64 rng(26);
    const auto cloud = wtt::random_cloud(rng, 12, 1);
    const auto gap = meanshift_transform_gap(cloud, 0.3);
    int equal = 0;
    for (Index i = 0; i < 12; ++i)
      for (Index j = i + 1; j < 12; ++j) {
        CHECK(gap.ms_dist(i, j) <= gap.wt_dist(i, j) + 1e-9);
        if (std::abs(gap.ms_dist(i, j) - gap.wt_dist(i, j)) <= 1e-9) ++equal;
      }
    CHECK(equal > 0);
  }
  SUBCASE("random 2d clouds satisfy the bound on every pair") {
    SplitMix64 rng(27);
    for (int trial = 0; trial < 6; ++trial) {
      const auto cloud = wtt::random_cloud(rng, 14, 2);
      const double eps = (0.2 + rng.uniform()) * diameter(cloud);
      const auto gap = meanshift_transform_gap(cloud, eps);
      CAPTURE(trial);
      CHECK((gap.ms_dist.array() <= gap.wt_dist.array() + 1e-9).all());
    }
  }
}
