#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wt/localized_measure.hpp"
#include "wt/metric_space.hpp"

namespace wt {

/// A coupling between two localized measures together with its transport
/// cost under the ground metric it was solved against.
struct TransportPlan {
  Matrix plan;              // rows x cols, nonnegative, marginals = masses
  double cost = 0.0;        // <plan, ground>, no entropy term
  int iterations = 0;       // simplex pivots / sinkhorn sweeps
  double marginal_residual = 0.0;
};

struct SolverConfig {
  enum class Method { exact, sinkhorn, one_dim };
  Method method = Method::exact;
  double sinkhorn_reg = 0.0;  // absolute regularization; <= 0 picks the default
  int sinkhorn_max_iter = 10000;
  double sinkhorn_tol = 1e-9;
  bool sinkhorn_scheduled = true;  // warm-started geometric regularization ladder
};

namespace detail {

inline void check_pair(const LocalizedMeasure& mu, const LocalizedMeasure& nu,
                       const Matrix& ground, const char* who) {
  check_localized(mu, who);
  check_localized(nu, who);
  if (ground.rows() != static_cast<Index>(mu.size()) ||
      ground.cols() != static_cast<Index>(nu.size()))
    throw std::invalid_argument(std::string(who) + ": ground slice shape mismatch");
  const double sa = std::accumulate(mu.mass.begin(), mu.mass.end(), 0.0);
  const double sb = std::accumulate(nu.mass.begin(), nu.mass.end(), 0.0);
  if (std::abs(sa - sb) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": mass imbalance beyond 1e-9");
}

// Transportation simplex over the dense bipartite graph. The basis is a
// spanning tree on sources 0..m-1 and sinks m..m+n-1, maintained with the
// standard incremental machinery: parent/depth/potential arrays, cycle-local
// flow updates, and an orphan-subtree patch of the potentials after each
// pivot. Entering arcs come from a candidate list refilled by deterministic
// block scans; after a generous pivot budget the rule degrades to Bland's
// (first negative in fixed order), which cannot cycle. Everything is
// deterministic, so repeated solves agree bitwise.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<double>& a, const std::vector<double>& b,
                   const Matrix& c)
      : a_(a), b_(b), m_(static_cast<int>(a.size())),
        n_(static_cast<int>(b.size())), cost_(std::size_t(m_) * n_) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) cost_[std::size_t(i) * n_ + j] = c(i, j);
  }

  TransportPlan solve() {
    init_basis();
    build_adjacency();
    init_tree();
    init_flows();

    double max_abs = 0.0;
    for (double v : cost_) max_abs = std::max(max_abs, std::abs(v));
    const double opt_tol = 1e-11 * std::max(1.0, max_abs);
    const long bland_after = 1000 + 50L * (m_ + n_);
    const long hard_cap = 4000000L + 400L * m_ * n_;
    long pivots = 0;
    int ei, ej;
    while (find_entering(opt_tol, pivots >= bland_after, ei, ej)) {
      pivot(ei, ej);
      if (++pivots > hard_cap)
        throw std::runtime_error("wasserstein_exact: pivot limit exceeded");
    }
    // The final flows are recomputed from the marginals on the final tree,
    // so incremental drift never reaches the returned plan.
    init_flows();

    TransportPlan out;
    out.plan = Matrix::Zero(m_, n_);
    for (int e = 0; e < m_ + n_ - 1; ++e)
      out.plan(arc_i_[e], arc_j_[e]) = std::max(flow_[e], 0.0);
    double residual = 0.0;
    for (int i = 0; i < m_; ++i)
      residual = std::max(residual, std::abs(out.plan.row(i).sum() - a_[i]));
    for (int j = 0; j < n_; ++j)
      residual = std::max(residual, std::abs(out.plan.col(j).sum() - b_[j]));
    out.marginal_residual = residual;
    double total = 0.0;
    for (int e = 0; e < m_ + n_ - 1; ++e)
      total += std::max(flow_[e], 0.0) * cost_[std::size_t(arc_i_[e]) * n_ + arc_j_[e]];
    out.cost = total;
    out.iterations = static_cast<int>(pivots);
    return out;
  }

 private:
  // Least-cost greedy start: allocate along cells sorted by (cost, i, j).
  // Every allocation exhausts a row or a column, so the touched cells form
  // a forest; the basis is completed to a spanning tree with zero-flow arcs
  // in the same deterministic order. Far fewer pivots than a cost-blind
  // start on geometric instances. Only the tree structure matters here:
  // flows are rebuilt from the marginals by leaf elimination afterwards.
  void init_basis() {
    const long arcs = static_cast<long>(m_) * n_;
    const auto by_cost = [&](long x, long y) {
      if (cost_[x] != cost_[y]) return cost_[x] < cost_[y];
      return x < y;
    };
    // Pool the few cheapest cells of every row and of every column: that
    // is enough for the greedy almost always, and a fraction of the cost
    // of sorting the whole matrix. Fall back to the full ordering in the
    // rare case the pool cannot finish a spanning tree.
    constexpr int kPerLine = 4;
    if (arcs > 2L * kPerLine * (m_ + n_)) {
      order_.clear();
      long keep[kPerLine];
      for (int i = 0; i < m_; ++i) {
        const double* row = cost_.data() + std::size_t(i) * n_;
        int have = 0;
        for (int j = 0; j < n_; ++j) {
          const long a = static_cast<long>(i) * n_ + j;
          int pos = have;
          while (pos > 0 && by_cost(a, keep[pos - 1])) --pos;
          if (pos < kPerLine) {
            for (int t = std::min(have, kPerLine - 1); t > pos; --t)
              keep[t] = keep[t - 1];
            keep[pos] = a;
            if (have < kPerLine) ++have;
          }
        }
        order_.insert(order_.end(), keep, keep + have);
      }
      for (int j = 0; j < n_; ++j) {
        int have = 0;
        for (int i = 0; i < m_; ++i) {
          const long a = static_cast<long>(i) * n_ + j;
          int pos = have;
          while (pos > 0 && by_cost(a, keep[pos - 1])) --pos;
          if (pos < kPerLine) {
            for (int t = std::min(have, kPerLine - 1); t > pos; --t)
              keep[t] = keep[t - 1];
            keep[pos] = a;
            if (have < kPerLine) ++have;
          }
        }
        order_.insert(order_.end(), keep, keep + have);
      }
      std::sort(order_.begin(), order_.end(), by_cost);
      order_.erase(std::unique(order_.begin(), order_.end()), order_.end());
      if (build_from_prefix(static_cast<long>(order_.size()))) return;
    }
    order_.resize(arcs);
    for (long a = 0; a < arcs; ++a) order_[a] = a;
    std::sort(order_.begin(), order_.end(), by_cost);
    build_from_prefix(arcs);
  }

  // Greedy allocation + zero-arc completion over order_[0..limit); returns
  // whether a full spanning tree came out.
  bool build_from_prefix(long limit) {
    arc_i_.clear();
    arc_j_.clear();
    std::vector<double> ra = a_, rb = b_;
    int rows_left = m_, cols_left = n_;
    uf_.resize(m_ + n_);
    for (int v = 0; v < m_ + n_; ++v) uf_[v] = v;
    auto find = [&](int v) {
      while (uf_[v] != v) {
        uf_[v] = uf_[uf_[v]];
        v = uf_[v];
      }
      return v;
    };

    for (long k = 0; k < limit && rows_left > 0 && cols_left > 0; ++k) {
      const long a = order_[k];
      const int i = static_cast<int>(a / n_);
      const int j = static_cast<int>(a % n_);
      if (ra[i] <= 0.0 || rb[j] <= 0.0) continue;
      const double f = std::min(ra[i], rb[j]);
      ra[i] -= f;
      rb[j] -= f;
      arc_i_.push_back(i);
      arc_j_.push_back(j);
      uf_[find(i)] = find(m_ + j);
      if (ra[i] <= 0.0) --rows_left;
      if (rb[j] <= 0.0) --cols_left;
    }
    if (rows_left > 0 && cols_left > 0) return false;
    for (long k = 0; k < limit && arc_i_.size() + 1 < std::size_t(m_ + n_); ++k) {
      const long a = order_[k];
      const int i = static_cast<int>(a / n_);
      const int j = static_cast<int>(a % n_);
      const int ri = find(i), rj = find(m_ + j);
      if (ri == rj) continue;
      arc_i_.push_back(i);
      arc_j_.push_back(j);
      uf_[ri] = rj;
    }
    return arc_i_.size() + 1 == std::size_t(m_ + n_);
  }

  // Doubly-linked half-edge adjacency; arc slot e owns half-edges 2e
  // (stored at the source) and 2e+1 (stored at the sink).
  int he_node(int he) const {
    return (he & 1) ? m_ + arc_j_[he >> 1] : arc_i_[he >> 1];
  }
  int he_target(int he) const {
    return (he & 1) ? arc_i_[he >> 1] : m_ + arc_j_[he >> 1];
  }

  void link(int he) {
    const int v = he_node(he);
    next_[he] = head_[v];
    prev_[he] = -1;
    if (head_[v] >= 0) prev_[head_[v]] = he;
    head_[v] = he;
  }

  void unlink(int he) {
    const int v = he_node(he);
    if (prev_[he] >= 0)
      next_[prev_[he]] = next_[he];
    else
      head_[v] = next_[he];
    if (next_[he] >= 0) prev_[next_[he]] = prev_[he];
  }

  void build_adjacency() {
    const int n_arcs = m_ + n_ - 1;
    head_.assign(m_ + n_, -1);
    next_.assign(2 * n_arcs, -1);
    prev_.assign(2 * n_arcs, -1);
    for (int e = 0; e < n_arcs; ++e) {
      link(2 * e);
      link(2 * e + 1);
    }
  }

  // Parents, depths and potentials from one traversal rooted at node 0.
  void init_tree() {
    const int nodes = m_ + n_;
    parent_node_.assign(nodes, -1);
    parent_arc_.assign(nodes, -1);
    depth_.assign(nodes, 0);
    pot_.assign(nodes, 0.0);
    stack_.clear();
    stack_.push_back(0);
    seen_.assign(nodes, 0);
    seen_[0] = 1;
    while (!stack_.empty()) {
      const int x = stack_.back();
      stack_.pop_back();
      for (int he = head_[x]; he >= 0; he = next_[he]) {
        const int w = he_target(he);
        if (seen_[w]) continue;
        seen_[w] = 1;
        parent_node_[w] = x;
        parent_arc_[w] = he >> 1;
        depth_[w] = depth_[x] + 1;
        pot_[w] = cost_[std::size_t(arc_i_[he >> 1]) * n_ + arc_j_[he >> 1]] - pot_[x];
        stack_.push_back(w);
      }
    }
  }

  // Leaf elimination: arc flows are uniquely determined by the marginals.
  void init_flows() {
    const int nodes = m_ + n_;
    flow_.assign(m_ + n_ - 1, 0.0);
    done_arc_.assign(m_ + n_ - 1, 0);
    res_.resize(nodes);
    deg_.assign(nodes, 0);
    for (int e = 0; e < m_ + n_ - 1; ++e) {
      ++deg_[arc_i_[e]];
      ++deg_[m_ + arc_j_[e]];
    }
    for (int i = 0; i < m_; ++i) res_[i] = a_[i];
    for (int j = 0; j < n_; ++j) res_[m_ + j] = b_[j];
    stack_.clear();
    for (int v = 0; v < nodes; ++v)
      if (deg_[v] == 1) stack_.push_back(v);
    while (!stack_.empty()) {
      const int v = stack_.back();
      stack_.pop_back();
      if (deg_[v] != 1) continue;
      int arc = -1, other = -1;
      for (int he = head_[v]; he >= 0; he = next_[he])
        if (!done_arc_[he >> 1]) {
          arc = he >> 1;
          other = he_target(he);
          break;
        }
      if (arc < 0) break;  // last node standing
      flow_[arc] = res_[v];
      res_[other] -= res_[v];
      done_arc_[arc] = 1;
      deg_[v] = 0;
      if (--deg_[other] == 1) stack_.push_back(other);
    }
  }

  double reduced_cost(long a) const {
    return cost_[a] - pot_[a / n_] - pot_[m_ + a % n_];
  }

  // Entering arc search with candidate-list pricing: surviving candidates
  // are re-priced each pivot and the list is refilled by scanning
  // fixed-size blocks of the row-major arc order from a cursor that
  // advances deterministically.
  bool find_entering(double opt_tol, bool bland, int& ei, int& ej) {
    const long arcs = static_cast<long>(m_) * n_;
    if (bland) {
      for (long a = 0; a < arcs; ++a)
        if (reduced_cost(a) < -opt_tol) {
          ei = static_cast<int>(a / n_);
          ej = static_cast<int>(a % n_);
          return true;
        }
      return false;
    }

    long best_arc = -1;
    double best = -opt_tol;
    std::size_t keep = 0;
    for (std::size_t k = 0; k < cand_.size() && keep < 64; ++k) {
      const long a = cand_[k];
      const double rc = reduced_cost(a);
      if (rc < -opt_tol) {
        cand_[keep++] = a;
        if (rc < best) {
          best = rc;
          best_arc = a;
        }
      }
    }
    cand_.resize(keep);

    if (best_arc < 0) {
      cand_.clear();
      const long block = std::max(256L, 4 * static_cast<long>(std::sqrt(double(arcs))));
      long cursor = scan_start_ % arcs;
      for (long scanned = 0; scanned < arcs && best_arc < 0;) {
        const long stop = std::min({arcs - cursor, block, arcs - scanned});
        for (long k = 0; k < stop; ++k) {
          const long a = cursor + k;
          const double rc = reduced_cost(a);
          if (rc < -opt_tol) {
            cand_.push_back(a);
            if (rc < best) {
              best = rc;
              best_arc = a;
            }
          }
        }
        scanned += stop;
        cursor += stop;
        if (cursor == arcs) cursor = 0;
      }
      scan_start_ = cursor;
      if (best_arc < 0) return false;
    }

    ei = static_cast<int>(best_arc / n_);
    ej = static_cast<int>(best_arc % n_);
    return true;
  }

  // One pivot: locate the unique tree cycle closed by the entering arc,
  // shift theta of flow around it, swap the vanishing arc out of the basis
  // slot, and repatch parents/depths/potentials on the orphaned side.
  void pivot(int ei, int ej) {
    path_b_.clear();  // climb from the entering sink
    path_a_.clear();  // climb from the entering source
    int na = ei, nb = m_ + ej;
    while (depth_[na] > depth_[nb]) {
      path_a_.push_back(parent_arc_[na]);
      na = parent_node_[na];
    }
    while (depth_[nb] > depth_[na]) {
      path_b_.push_back(parent_arc_[nb]);
      nb = parent_node_[nb];
    }
    while (na != nb) {
      path_a_.push_back(parent_arc_[na]);
      na = parent_node_[na];
      path_b_.push_back(parent_arc_[nb]);
      nb = parent_node_[nb];
    }

    // Path arcs from the sink end to the source end alternate -, +, -, ...
    // starting with - (the arc feeding the entering sink must give up
    // theta). Find theta and the leaving arc among the minus positions.
    const long b_len = static_cast<long>(path_b_.size());
    const long total = b_len + static_cast<long>(path_a_.size());
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    bool leave_on_b = true;
    for (long k = 0; k < total; k += 2) {
      const int e = k < b_len ? path_b_[k]
                              : path_a_[static_cast<long>(path_a_.size()) - 1 -
                                        (k - b_len)];
      const double f = std::max(flow_[e], 0.0);
      if (leave < 0 || f < theta ||
          (f == theta && std::pair(arc_i_[e], arc_j_[e]) <
                             std::pair(arc_i_[leave], arc_j_[leave]))) {
        theta = f;
        leave = e;
        leave_on_b = k < b_len;
      }
    }

    if (theta != 0.0) {
      for (long k = 0; k < total; ++k) {
        const int e = k < b_len ? path_b_[k]
                                : path_a_[static_cast<long>(path_a_.size()) - 1 -
                                          (k - b_len)];
        flow_[e] += (k % 2 == 0) ? -theta : theta;
      }
    }

    // Reuse the leaving arc's slot for the entering arc.
    unlink(2 * leave);
    unlink(2 * leave + 1);
    arc_i_[leave] = ei;
    arc_j_[leave] = ej;
    flow_[leave] = theta;
    link(2 * leave);
    link(2 * leave + 1);

    // The side of the removed arc holding the entering endpoint becomes an
    // orphan; reattach it through the entering arc and repatch it.
    const int q = leave_on_b ? m_ + ej : ei;
    const int p = leave_on_b ? ei : m_ + ej;
    parent_node_[q] = p;
    parent_arc_[q] = leave;
    depth_[q] = depth_[p] + 1;
    pot_[q] = cost_[std::size_t(ei) * n_ + ej] - pot_[p];
    stack_.clear();
    stack_.push_back(q);
    while (!stack_.empty()) {
      const int x = stack_.back();
      stack_.pop_back();
      for (int he = head_[x]; he >= 0; he = next_[he]) {
        const int e = he >> 1;
        if (e == parent_arc_[x]) continue;
        const int w = he_target(he);
        parent_node_[w] = x;
        parent_arc_[w] = e;
        depth_[w] = depth_[x] + 1;
        pot_[w] = cost_[std::size_t(arc_i_[e]) * n_ + arc_j_[e]] - pot_[x];
        stack_.push_back(w);
      }
    }
  }

  std::vector<double> a_, b_;
  int m_, n_;
  std::vector<double> cost_;  // row-major copy for the scan-heavy paths
  std::vector<int> arc_i_, arc_j_;  // basis arcs by slot
  std::vector<double> flow_;
  std::vector<long> order_, cand_;
  long scan_start_ = 0;
  std::vector<int> uf_, head_, next_, prev_, deg_, stack_;
  std::vector<int> parent_node_, parent_arc_, depth_;
  std::vector<double> pot_, res_;
  std::vector<int> path_a_, path_b_;
  std::vector<char> done_arc_, seen_;
};

}  // namespace detail

/// Exact l1 transport between two localized measures over the given ground
/// slice, solved by the transportation simplex. Deterministic: repeated
/// calls on the same input produce bitwise identical plans.
inline TransportPlan wasserstein_exact(const LocalizedMeasure& mu,
                                       const LocalizedMeasure& nu,
                                       const Matrix& ground) {
  detail::check_pair(mu, nu, ground, "wasserstein_exact");
  detail::TransportSimplex simplex(mu.mass, nu.mass, ground);
  return simplex.solve();
}

namespace detail {

struct LogDomainState {
  std::vector<double> f, g;  // potentials
};

// One Sinkhorn solve at fixed regularization in the log domain, warm
// started from the given potentials.
inline TransportPlan sinkhorn_log(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  const Matrix& c, double reg, int max_iter,
                                  double tol, LogDomainState& state) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  auto& f = state.f;
  auto& g = state.g;
  if (static_cast<int>(f.size()) != m) f.assign(m, 0.0);
  if (static_cast<int>(g.size()) != n) g.assign(n, 0.0);
  std::vector<double> la(m), lb(n);
  for (int i = 0; i < m; ++i) la[i] = std::log(a[i]);
  for (int j = 0; j < n; ++j) lb[j] = std::log(b[j]);

  Matrix P(m, n);
  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> row(n), col(m);
  for (it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < m; ++i) {
      double hi = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        row[j] = (g[j] - c(i, j)) / reg;
        hi = std::max(hi, row[j]);
      }
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp(row[j] - hi);
      f[i] = reg * (la[i] - (std::log(s) + hi));
    }
    for (int j = 0; j < n; ++j) {
      double hj = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        col[i] = (f[i] - c(i, j)) / reg;
        hj = std::max(hj, col[i]);
      }
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += std::exp(col[i] - hj);
      g[j] = reg * (lb[j] - (std::log(s) + hj));
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        P(i, j) = std::exp((f[i] + g[j] - c(i, j)) / reg);
    residual = 0.0;
    for (int i = 0; i < m; ++i)
      residual = std::max(residual, std::abs(P.row(i).sum() - a[i]));
    for (int j = 0; j < n; ++j)
      residual = std::max(residual, std::abs(P.col(j).sum() - b[j]));
    if (residual < tol) break;
  }
  TransportPlan out;
  out.plan = std::move(P);
  out.cost = (out.plan.array() * c.array()).sum();
  out.iterations = std::min(it, max_iter);
  out.marginal_residual = residual;
  return out;
}

// Classic diagonal-scaling Sinkhorn. Returns false when a scaling vector
// leaves [1e-300, 1e300]; callers then rerun in the log domain.
inline bool sinkhorn_scaling(const std::vector<double>& a,
                             const std::vector<double>& b, const Matrix& c,
                             double reg, int max_iter, double tol,
                             TransportPlan& out) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  Matrix K(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = std::exp(-c(i, j) / reg);
  Vector u = Vector::Ones(m), v = Vector::Ones(n);
  Vector av = Eigen::Map<const Vector>(a.data(), m);
  Vector bv = Eigen::Map<const Vector>(b.data(), n);
  auto in_range = [](const Vector& x) {
    return (x.array().abs() >= 1e-300).all() && (x.array().abs() <= 1e300).all();
  };
  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  Matrix P;
  for (it = 1; it <= max_iter; ++it) {
    Vector Kv = K * v;
    if ((Kv.array() <= 0.0).any()) return false;
    u = av.array() / Kv.array();
    Vector Ktu = K.transpose() * u;
    if ((Ktu.array() <= 0.0).any()) return false;
    v = bv.array() / Ktu.array();
    if (!in_range(u) || !in_range(v)) return false;
    P = u.asDiagonal() * K * v.asDiagonal();
    residual = std::max((P.rowwise().sum() - av).cwiseAbs().maxCoeff(),
                        (P.colwise().sum().transpose() - bv).cwiseAbs().maxCoeff());
    if (residual < tol) break;
  }
  out.plan = std::move(P);
  out.cost = (out.plan.array() * c.array()).sum();
  out.iterations = std::min(it, max_iter);
  out.marginal_residual = residual;
  return true;
}

inline std::vector<double> regularization_ladder(double start, double target) {
  std::vector<double> regs;
  double r = start;
  while (r > target * 1.000001) {
    regs.push_back(r);
    r *= 0.5;
  }
  regs.push_back(target);
  return regs;
}

}  // namespace detail

/// Default final regularization: 2.5e-4 x max ground entry along the
/// schedule, 0.01 x max ground entry for a single fixed-regularization
/// solve.
inline double default_sinkhorn_reg(const Matrix& ground, bool scheduled) {
  const double scale = std::max(ground.maxCoeff(), 1e-12);
  return (scheduled ? 2.5e-4 : 1e-2) * scale;
}

/// Entropically regularized transport. The scheduled variant sweeps a
/// geometric regularization ladder from 0.1 x max ground entry down to the
/// target, warm starting the potentials, and reports the sharp cost
/// <plan, ground> without the entropy term.
inline TransportPlan wasserstein_sinkhorn(const LocalizedMeasure& mu,
                                          const LocalizedMeasure& nu,
                                          const Matrix& ground,
                                          const SolverConfig& config = {}) {
  detail::check_pair(mu, nu, ground, "wasserstein_sinkhorn");
  if (config.sinkhorn_max_iter <= 0 || config.sinkhorn_tol <= 0.0)
    throw std::invalid_argument("wasserstein_sinkhorn: nonpositive iteration budget or tolerance");
  double reg = config.sinkhorn_reg > 0.0
                   ? config.sinkhorn_reg
                   : default_sinkhorn_reg(ground, config.sinkhorn_scheduled);
  if (!(reg > 0.0))
    throw std::invalid_argument("wasserstein_sinkhorn: regularization must be positive");

  if (!config.sinkhorn_scheduled) {
    TransportPlan out;
    if (detail::sinkhorn_scaling(mu.mass, nu.mass, ground, reg,
                                 config.sinkhorn_max_iter, config.sinkhorn_tol,
                                 out))
      return out;
    // Scaling vector left [1e-300, 1e300]: rerun in the log domain.
    detail::LogDomainState state;
    return detail::sinkhorn_log(mu.mass, nu.mass, ground, reg,
                                config.sinkhorn_max_iter, config.sinkhorn_tol,
                                state);
  }

  const double start = 0.1 * std::max(ground.maxCoeff(), 1e-12);
  detail::LogDomainState state;
  TransportPlan out;
  int total_iters = 0;
  for (double r : detail::regularization_ladder(std::max(start, reg), reg)) {
    out = detail::sinkhorn_log(mu.mass, nu.mass, ground, r,
                               config.sinkhorn_max_iter, config.sinkhorn_tol,
                               state);
    total_iters += out.iterations;
  }
  out.iterations = total_iters;
  return out;
}

/// Exact 1d transport cost: the area between the two cumulative
/// distribution functions, summed over sorted breakpoints. `coords` maps
/// ambient point index -> real line coordinate.
inline double wasserstein_1d(const LocalizedMeasure& mu,
                             const LocalizedMeasure& nu, const Vector& coords) {
  check_localized(mu, "wasserstein_1d");
  check_localized(nu, "wasserstein_1d");
  std::vector<std::pair<double, double>> events;  // (coordinate, F-G mass delta)
  events.reserve(mu.size() + nu.size());
  for (std::size_t k = 0; k < mu.size(); ++k)
    events.emplace_back(coords(mu.support[k]), mu.mass[k]);
  for (std::size_t k = 0; k < nu.size(); ++k)
    events.emplace_back(coords(nu.support[k]), -nu.mass[k]);
  std::sort(events.begin(), events.end());
  double total = 0.0, gap = 0.0;
  for (std::size_t k = 0; k + 1 < events.size(); ++k) {
    gap += events[k].second;
    total += std::abs(gap) * (events[k + 1].first - events[k].first);
  }
  return total;
}

/// Euclidean mean gap versus transport distance; the gap can never exceed
/// the transport cost. `coords` holds ambient coordinates row per point.
struct MeanBoundCheck {
  double mean_gap = 0.0;
  double w1 = 0.0;
};

inline MeanBoundCheck mean_lower_bound_check(const LocalizedMeasure& mu,
                                             const LocalizedMeasure& nu,
                                             const Matrix& coords) {
  check_localized(mu, "mean_lower_bound_check");
  check_localized(nu, "mean_lower_bound_check");
  Eigen::RowVectorXd mean_mu = Eigen::RowVectorXd::Zero(coords.cols());
  Eigen::RowVectorXd mean_nu = Eigen::RowVectorXd::Zero(coords.cols());
  for (std::size_t k = 0; k < mu.size(); ++k)
    mean_mu += mu.mass[k] * coords.row(mu.support[k]);
  for (std::size_t k = 0; k < nu.size(); ++k)
    mean_nu += nu.mass[k] * coords.row(nu.support[k]);
  Matrix ground(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      ground(static_cast<Index>(i), static_cast<Index>(j)) =
          (coords.row(mu.support[i]) - coords.row(nu.support[j])).norm();
  MeanBoundCheck out;
  out.mean_gap = (mean_mu - mean_nu).norm();
  out.w1 = wasserstein_exact(mu, nu, ground).cost;
  return out;
}

/// Dispatch by configured method; one_dim requires `coords` (a 1d embedding
/// of the ambient points) and is rejected otherwise.
inline double wasserstein_distance(const LocalizedMeasure& mu,
                                   const LocalizedMeasure& nu,
                                   const Matrix& ground,
                                   const SolverConfig& config,
                                   const Vector* coords = nullptr) {
  switch (config.method) {
    case SolverConfig::Method::exact:
      return wasserstein_exact(mu, nu, ground).cost;
    case SolverConfig::Method::sinkhorn:
      return wasserstein_sinkhorn(mu, nu, ground, config).cost;
    case SolverConfig::Method::one_dim:
      if (coords == nullptr)
        throw std::invalid_argument(
            "wasserstein_distance: one_dim requires a 1d coordinate embedding");
      return wasserstein_1d(mu, nu, *coords);
  }
  throw std::logic_error("wasserstein_distance: unknown method");
}

}  // namespace wt
