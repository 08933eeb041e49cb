#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wt/metric_space.hpp"

namespace wt {

struct Merge {
  Index left = 0;   // cluster id (< n: leaf, >= n: earlier merge)
  Index right = 0;
  double height = 0.0;
  Index size = 0;   // leaves under the new cluster
};

struct Dendrogram {
  Index n_leaves = 0;
  std::vector<Merge> merges;  // n_leaves - 1 entries, heights nondecreasing
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(Index a, Index b) { parent_[find(a)] = find(b); }

 private:
  std::vector<Index> parent_;
};

}  // namespace detail

/// Single linkage on the distance matrix: Kruskal over edges sorted by
/// (weight, i, j), so merge heights are the minimum-spanning-tree edge
/// weights in ascending order and ties resolve to the smallest index pair.
inline Dendrogram single_linkage(const FiniteMetricMeasureSpace& space) {
  const Index n = space.size();
  if (n < 2) throw std::invalid_argument("single_linkage: need at least 2 points");
  struct Edge {
    double w;
    Index i, j;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({space.dist(i, j), i, j});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  Dendrogram out;
  out.n_leaves = n;
  detail::UnionFind uf(n);
  std::vector<Index> cluster_id(n);   // root -> current cluster id
  std::vector<Index> cluster_size(n, 1);
  std::iota(cluster_id.begin(), cluster_id.end(), Index{0});
  Index next_id = n;
  for (const Edge& e : edges) {
    const Index ra = uf.find(e.i), rb = uf.find(e.j);
    if (ra == rb) continue;
    Merge m;
    m.left = std::min(cluster_id[ra], cluster_id[rb]);
    m.right = std::max(cluster_id[ra], cluster_id[rb]);
    m.height = e.w;
    m.size = cluster_size[ra] + cluster_size[rb];
    out.merges.push_back(m);
    uf.unite(ra, rb);
    const Index root = uf.find(ra);
    cluster_id[root] = next_id++;
    cluster_size[root] = m.size;
    if (out.merges.size() + 1 == static_cast<std::size_t>(n)) break;
  }
  return out;
}

/// Labels from removing the k-1 highest merges; clusters are numbered
/// 0..k-1 in order of their smallest member index.
inline std::vector<Index> cut_dendrogram(const Dendrogram& d, Index k) {
  const Index n = d.n_leaves;
  if (k < 1 || k > n) throw std::invalid_argument("cut_dendrogram: k out of range");
  detail::UnionFind uf(n);
  // Leaf sets merge in dendrogram order; replay the first n - k merges.
  std::vector<std::pair<Index, Index>> members(n);  // cluster id -> any leaf
  std::vector<Index> rep(2 * n - 1);
  std::iota(rep.begin(), rep.begin() + n, Index{0});
  for (Index m = 0; m + k < n; ++m) {
    const Index a = rep[d.merges[m].left];
    const Index b = rep[d.merges[m].right];
    uf.unite(a, b);
    rep[n + m] = uf.find(a);
  }
  std::vector<Index> labels(n, -1);
  Index next = 0;
  std::vector<Index> root_label(n, -1);
  for (Index v = 0; v < n; ++v) {
    const Index r = uf.find(v);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[v] = root_label[r];
  }
  return labels;
}

struct Embedding {
  Matrix coords;       // n x k, columns ordered by descending eigenvalue
  Vector eigenvalues;  // full spectrum of the centered Gram matrix, descending
  Index positive_used = 0;  // columns backed by positive eigenvalues
};

/// Classical scaling: eigendecompose -1/2 J D^2 J and scale the leading
/// nonnegative eigenvectors. Negative directions are reported through the
/// spectrum and padded with zero columns rather than used.
inline Embedding classical_mds(const FiniteMetricMeasureSpace& space, Index k) {
  if (k < 1) throw std::invalid_argument("classical_mds: k must be >= 1");
  const Index n = space.size();
  const Matrix d2 = space.dist.array().square();
  const Matrix centering = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  const Matrix gram = -0.5 * centering * d2 * centering;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (gram + gram.transpose()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("classical_mds: eigendecomposition failed");

  Embedding out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.coords = Matrix::Zero(n, k);
  const Index avail = std::min(k, n);
  Index used = 0;
  for (Index c = 0; c < avail; ++c) {
    const double lambda = out.eigenvalues(c);
    if (lambda <= 1e-10 * std::abs(out.eigenvalues(0))) break;
    Vector v = solver.eigenvectors().col(n - 1 - c);
    for (Index i = 0; i < n; ++i)
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0.0) v = -v;
        break;
      }
    out.coords.col(c) = v * std::sqrt(lambda);
    ++used;
  }
  out.positive_used = used;
  return out;
}

}  // namespace wt
