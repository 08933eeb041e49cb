#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wt/metric_space.hpp"

namespace wt {

/// splitmix64: the fixed generator behind every dataset, so the same spec
/// reproduces the same cloud anywhere. One 64-bit state, one step per draw.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct DatasetSpec {
  enum class Kind { dumbbell, noisy_circle };
  Kind kind = Kind::dumbbell;
  std::uint64_t seed = 0;

  // dumbbell geometry: blobs of blob_n points on disks of blob_radius
  // centered at (-separation, 0) and (+separation, 0), joined by chain_n
  // collinear points between the inner edges. Defaults give diameter ~ 4.
  int blob_n = 100;
  int chain_n = 30;
  double blob_radius = 0.6;
  double separation = 1.4;
  double chain_jitter = 0.0;

  // noisy circle: circle_n points equally spaced on the radius-r circle
  // plus outlier_n points uniform in [-box, box]^2.
  int circle_n = 800;
  int outlier_n = 1200;
  double circle_radius = 1.0;
  double outlier_box = 1.0;
};

/// Two uniform disk blobs joined by an evenly spaced chain; labels
/// blob1 / chain / blob2. Fully determined by the seed.
inline PointCloud gen_dumbbell(const DatasetSpec& spec) {
  if (spec.blob_n <= 0 || spec.chain_n < 0)
    throw std::invalid_argument("gen_dumbbell: nonpositive counts");
  SplitMix64 rng(spec.seed);
  const int n = 2 * spec.blob_n + spec.chain_n;
  PointCloud cloud;
  cloud.coords = Matrix::Zero(n, 2);
  cloud.labels.reserve(n);
  Index row = 0;
  auto disk = [&](double cx) {
    const double r = spec.blob_radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    cloud.coords(row, 0) = cx + r * std::cos(theta);
    cloud.coords(row, 1) = r * std::sin(theta);
  };
  for (int i = 0; i < spec.blob_n; ++i, ++row) {
    disk(-spec.separation);
    cloud.labels.push_back("blob1");
  }
  const double inner = spec.separation - spec.blob_radius;
  for (int i = 0; i < spec.chain_n; ++i, ++row) {
    const double t = spec.chain_n == 1
                         ? 0.5
                         : static_cast<double>(i) / (spec.chain_n - 1);
    cloud.coords(row, 0) = -inner + 2.0 * inner * t;
    cloud.coords(row, 1) = spec.chain_jitter == 0.0
                               ? 0.0
                               : spec.chain_jitter * (2.0 * rng.uniform() - 1.0);
    cloud.labels.push_back("chain");
  }
  for (int i = 0; i < spec.blob_n; ++i, ++row) {
    disk(spec.separation);
    cloud.labels.push_back("blob2");
  }
  return cloud;
}

/// Equally spaced circle corrupted by box-uniform outliers; labels
/// circle / outlier. Fully determined by the seed.
inline PointCloud gen_noisy_circle(const DatasetSpec& spec) {
  if (spec.circle_n <= 0 || spec.outlier_n < 0)
    throw std::invalid_argument("gen_noisy_circle: nonpositive counts");
  SplitMix64 rng(spec.seed);
  const int n = spec.circle_n + spec.outlier_n;
  PointCloud cloud;
  cloud.coords = Matrix::Zero(n, 2);
  cloud.labels.reserve(n);
  Index row = 0;
  for (int i = 0; i < spec.circle_n; ++i, ++row) {
    const double theta = 2.0 * std::numbers::pi * i / spec.circle_n;
    cloud.coords(row, 0) = spec.circle_radius * std::cos(theta);
    cloud.coords(row, 1) = spec.circle_radius * std::sin(theta);
    cloud.labels.push_back("circle");
  }
  for (int i = 0; i < spec.outlier_n; ++i, ++row) {
    cloud.coords(row, 0) = spec.outlier_box * (2.0 * rng.uniform() - 1.0);
    cloud.coords(row, 1) = spec.outlier_box * (2.0 * rng.uniform() - 1.0);
    cloud.labels.push_back("outlier");
  }
  return cloud;
}

inline PointCloud gen_dataset(const DatasetSpec& spec) {
  return spec.kind == DatasetSpec::Kind::dumbbell ? gen_dumbbell(spec)
                                                  : gen_noisy_circle(spec);
}

}  // namespace wt
