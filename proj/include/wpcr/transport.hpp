// Copyright 2026 The wpcr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact optimal transport between finitely supported measures: a primal
// network simplex for the transportation problem, an assignment solver for
// equal-size empirical measures, and 1-D quantile formulas.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wpcr/error.hpp"
#include "wpcr/measures.hpp"
#include "wpcr/metric.hpp"
#include "wpcr/quadrature.hpp"

namespace wpcr {

struct PlanEntry {
  std::size_t row;
  std::size_t col;
  double mass;
};

/// Optimal coupling in sparse form. `cost` is W_p, `cost_p` is W_p^p.
struct TransportPlan {
  DiscreteMeasure rows;
  DiscreteMeasure cols;
  std::vector<PlanEntry> entries;
  double cost = 0.0;
  double cost_p = 0.0;
  double order = 1.0;

  /// "row,col,mass" triplets with a header line.
  std::string to_csv() const {
    std::string out = "row,col,mass\n";
    char buf[96];
    for (const PlanEntry& e : entries) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", e.row, e.col, e.mass);
      out += buf;
    }
    return out;
  }
};

struct FlowSolution {
  std::vector<PlanEntry> entries;
  long double objective = 0.0L;
};

namespace detail {

/// Primal network simplex on the complete bipartite graph supply -> demand
/// plus one artificial root (big-M start). Strongly feasible spanning trees
/// and the leaving-arc tie rule guarantee termination on degenerate
/// instances. After each pivot the detached subtree is re-hung and its
/// depths and potentials are refreshed by a walk over child lists.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply,
                   std::span<const double> demand,
                   std::span<const double> cost)
      : m_(supply.size()), n_(demand.size()), mn_(m_ * n_),
        nodes_(m_ + n_ + 1), root_(m_ + n_), cost_(cost) {
    double top = 0.0;
    for (double c : cost) top = std::max(top, c);
    scale_ = top > 0.0 ? top : 1.0;
    art_ = 2.0 * static_cast<double>(nodes_);
    eps_ = 16.0 * art_ * std::numeric_limits<double>::epsilon();
    const std::size_t arcs = mn_ + m_ + n_;
    flow_.assign(arcs, 0.0);
    in_tree_.assign(arcs, 0);
    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    up_.assign(nodes_, 0);
    depth_.assign(nodes_, 0);
    first_child_.assign(nodes_, kNone);
    next_sib_.assign(nodes_, kNone);
    prev_sib_.assign(nodes_, kNone);
    pi_.assign(nodes_, 0.0);
    for (std::size_t v = 0; v < root_; ++v) {
      const std::size_t a = mn_ + v;
      in_tree_[a] = 1;
      flow_[a] = v < m_ ? supply[v] : demand[v - m_];
      parent_[v] = root_;
      pred_[v] = a;
      up_[v] = v < m_ ? 1 : 0;
      depth_[v] = 1;
      pi_[v] = v < m_ ? -art_ : art_;
      attach(v, root_);
    }
    block_ = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::ceil(std::sqrt(double(arcs)))));
  }

  void run() {
    const std::size_t limit = 200 * (mn_ + nodes_) + 100000;
    std::size_t pivots = 0;
    for (int round = 0; round < 4; ++round) {
      std::size_t in_arc = 0;
      while (find_entering(in_arc)) {
        pivot(in_arc);
        if (++pivots > limit) {
          throw NumericFailure("network simplex exceeded its pivot budget");
        }
      }
      // Refresh potentials from the tree and confirm optimality; drift from
      // the incremental updates can hide a last improving arc.
      recompute_potentials();
      if (!find_entering(in_arc)) break;
    }
    for (std::size_t v = 0; v < root_; ++v) {
      if (flow_[mn_ + v] > 1e-9) {
        throw NumericFailure("transportation problem is infeasible");
      }
    }
  }

  FlowSolution solution() const {
    FlowSolution s;
    for (std::size_t a = 0; a < mn_; ++a) {
      if (flow_[a] > 0.0) {
        s.entries.push_back({a / n_, a % n_, flow_[a]});
        s.objective += static_cast<long double>(flow_[a]) * cost_[a];
      }
    }
    return s;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t source(std::size_t a) const {
    if (a < mn_) return a / n_;
    const std::size_t v = a - mn_;
    return v < m_ ? v : root_;
  }
  std::size_t target(std::size_t a) const {
    if (a < mn_) return m_ + a % n_;
    const std::size_t v = a - mn_;
    return v < m_ ? root_ : v;
  }
  double arc_cost(std::size_t a) const {
    return a < mn_ ? cost_[a] / scale_ : art_;
  }

  void attach(std::size_t v, std::size_t p) {
    prev_sib_[v] = kNone;
    next_sib_[v] = first_child_[p];
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = v;
    first_child_[p] = v;
  }
  void detach(std::size_t v) {
    const std::size_t p = parent_[v];
    if (prev_sib_[v] != kNone) {
      next_sib_[prev_sib_[v]] = next_sib_[v];
    } else {
      first_child_[p] = next_sib_[v];
    }
    if (next_sib_[v] != kNone) prev_sib_[next_sib_[v]] = prev_sib_[v];
    prev_sib_[v] = next_sib_[v] = kNone;
  }

  // Block search: scan arcs cyclically, take the most negative reduced cost
  // found within the first block that contains a candidate.
  bool find_entering(std::size_t& in_arc) {
    const std::size_t arcs = flow_.size();
    double best = -eps_;
    bool found = false;
    std::size_t cnt = block_;
    for (std::size_t k = 0; k < arcs; ++k) {
      std::size_t a = next_arc_ + k;
      if (a >= arcs) a -= arcs;
      if (!in_tree_[a]) {
        const double rc = arc_cost(a) + pi_[source(a)] - pi_[target(a)];
        if (rc < best) {
          best = rc;
          in_arc = a;
          found = true;
        }
      }
      if (--cnt == 0) {
        if (found) {
          next_arc_ = a + 1 >= arcs ? 0 : a + 1;
          return true;
        }
        cnt = block_;
      }
    }
    if (found) next_arc_ = in_arc;
    return found;
  }

  void pivot(std::size_t in_arc) {
    const std::size_t first = source(in_arc);
    const std::size_t second = target(in_arc);
    std::size_t a = first;
    std::size_t b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) a = parent_[a]; else b = parent_[b];
    }
    const std::size_t join = a;

    double delta = std::numeric_limits<double>::infinity();
    std::size_t u_out = kNone;
    int side = 0;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      if (up_[u] && flow_[pred_[u]] < delta) {
        delta = flow_[pred_[u]];
        u_out = u;
        side = 1;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      if (!up_[u] && flow_[pred_[u]] <= delta) {
        delta = flow_[pred_[u]];
        u_out = u;
        side = 2;
      }
    }
    if (u_out == kNone) throw NumericFailure("unbounded transport problem");

    if (delta > 0.0) {
      flow_[in_arc] += delta;
      for (std::size_t u = first; u != join; u = parent_[u]) {
        flow_[pred_[u]] += up_[u] ? -delta : delta;
      }
      for (std::size_t u = second; u != join; u = parent_[u]) {
        flow_[pred_[u]] += up_[u] ? delta : -delta;
      }
    }
    const std::size_t out_arc = pred_[u_out];
    flow_[out_arc] = 0.0;
    in_tree_[out_arc] = 0;
    in_tree_[in_arc] = 1;

    const std::size_t u_in = side == 1 ? first : second;
    const std::size_t v_in = side == 1 ? second : first;

    // Path u_in -> ... -> u_out gets its parent pointers reversed.
    path_.clear();
    for (std::size_t u = u_in;; u = parent_[u]) {
      path_.push_back(u);
      if (u == u_out) break;
    }
    arcs_.clear();
    dirs_.clear();
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
      arcs_.push_back(pred_[path_[i]]);
      dirs_.push_back(up_[path_[i]]);
    }
    detach(u_out);
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) detach(path_[i]);
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
      const std::size_t child = path_[i + 1];
      parent_[child] = path_[i];
      pred_[child] = arcs_[i];
      up_[child] = dirs_[i] ? 0 : 1;
      attach(child, path_[i]);
    }
    parent_[u_in] = v_in;
    pred_[u_in] = in_arc;
    up_[u_in] = source(in_arc) == u_in ? 1 : 0;
    attach(u_in, v_in);

    const double new_pi = u_in == first ? pi_[second] - arc_cost(in_arc)
                                        : pi_[first] + arc_cost(in_arc);
    const double sigma = new_pi - pi_[u_in];
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      depth_[v] = depth_[parent_[v]] + 1;
      pi_[v] += sigma;
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c]) {
        stack_.push_back(c);
      }
    }
    pi_[u_in] = new_pi;
  }

  void recompute_potentials() {
    std::vector<long double> pl(nodes_, 0.0L);
    stack_.clear();
    for (std::size_t c = first_child_[root_]; c != kNone; c = next_sib_[c]) {
      stack_.push_back(c);
    }
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      const std::size_t a = pred_[v];
      // Tree arcs have zero reduced cost: c + pi[s] - pi[t] = 0.
      pl[v] = up_[v] ? pl[parent_[v]] - arc_cost(a)
                     : pl[parent_[v]] + arc_cost(a);
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c]) {
        stack_.push_back(c);
      }
    }
    for (std::size_t v = 0; v < nodes_; ++v) pi_[v] = static_cast<double>(pl[v]);
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t mn_;
  std::size_t nodes_;
  std::size_t root_;
  std::span<const double> cost_;
  double scale_ = 1.0;
  double art_ = 0.0;
  double eps_ = 0.0;
  std::size_t block_ = 10;
  std::size_t next_arc_ = 0;
  std::vector<double> flow_;
  std::vector<std::uint8_t> in_tree_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<std::uint8_t> up_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> first_child_;
  std::vector<std::size_t> next_sib_;
  std::vector<std::size_t> prev_sib_;
  std::vector<double> pi_;
  std::vector<std::size_t> path_;
  std::vector<std::size_t> arcs_;
  std::vector<std::uint8_t> dirs_;
  std::vector<std::size_t> stack_;
};

inline void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InvalidParameter("Wasserstein order p must be finite and >= 1");
  }
}

inline double pow_p(double d, double p) {
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

inline double root_p(long double c, double p) {
  const double v = std::max(0.0, static_cast<double>(c));
  if (p == 1.0) return v;
  if (p == 2.0) return std::sqrt(v);
  return std::pow(v, 1.0 / p);
}

}  // namespace detail

/// Min-cost transportation between nonnegative supply and demand vectors
/// (equal totals) with a row-major m x n cost matrix. Zero-mass rows and
/// columns are removed before solving.
inline FlowSolution solve_transportation(std::span<const double> supply,
                                         std::span<const double> demand,
                                         std::span<const double> cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw InvalidInput("transportation needs both sides");
  if (cost.size() != m * n) throw InvalidInput("cost matrix has wrong size");
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (supply[i] > 0.0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (demand[j] > 0.0) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) throw InvalidInput("no positive mass");

  FlowSolution out;
  if (rows.size() == 1 || cols.size() == 1) {
    // Single row or column: the coupling is forced.
    for (std::size_t i : rows) {
      for (std::size_t j : cols) {
        const double mass = rows.size() == 1 ? demand[j] : supply[i];
        out.entries.push_back({i, j, mass});
        out.objective += static_cast<long double>(mass) * cost[i * n + j];
      }
    }
    return out;
  }
  std::vector<double> s(rows.size());
  std::vector<double> d(cols.size());
  std::vector<double> c(rows.size() * cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) s[a] = supply[rows[a]];
  for (std::size_t b = 0; b < cols.size(); ++b) d[b] = demand[cols[b]];
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      c[a * cols.size() + b] = cost[rows[a] * n + cols[b]];
    }
  }
  detail::TransportSimplex simplex(s, d, c);
  simplex.run();
  FlowSolution inner = simplex.solution();
  for (PlanEntry& e : inner.entries) {
    e.row = rows[e.row];
    e.col = cols[e.col];
  }
  return inner;
}

inline void require_supported(const DiscreteMeasure& m,
                              const MetricSpace& space) {
  if (m.empty()) throw InvalidInput("measure has empty support");
  for (const Point& x : m.support()) space.require(x);
}

/// Exact W_p between two discrete measures via the transportation LP.
inline TransportPlan wasserstein(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu, double p,
                                 const MetricSpace& space) {
  detail::check_order(p);
  require_supported(mu, space);
  require_supported(nu, space);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] =
          detail::pow_p(space.metric(mu.support()[i], nu.support()[j]), p);
    }
  }
  FlowSolution sol = solve_transportation(mu.weights(), nu.weights(), cost);
  TransportPlan plan;
  plan.rows = mu;
  plan.cols = nu;
  plan.entries = std::move(sol.entries);
  plan.cost_p = std::max(0.0, static_cast<double>(sol.objective));
  plan.cost = detail::root_p(sol.objective, p);
  plan.order = p;
  return plan;
}

/// Optimal assignment for a square cost matrix (shortest augmenting paths
/// with potentials). Ties go to the lowest column index.
struct Assignment {
  std::vector<std::size_t> column_of_row;
  long double total = 0.0L;
};

inline Assignment solve_assignment(std::span<const double> cost,
                                   std::size_t n) {
  if (cost.size() != n * n) throw InvalidInput("cost matrix must be n x n");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; row 0 / column 0 are sentinels.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.column_of_row[row_of[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) {
    a.total += cost[i * n + a.column_of_row[i]];
  }
  return a;
}

/// Quotient distance min_tau ((1/n) sum d(x_i, y_tau(i))^p)^(1/p).
inline double quotient_distance(std::span<const Point> x,
                                std::span<const Point> y, double p,
                                const MetricSpace& space) {
  detail::check_order(p);
  if (x.size() != y.size()) throw InvalidInput("tuples differ in length");
  if (x.empty()) throw InvalidInput("tuples are empty");
  const std::size_t n = x.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    space.require(x[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == 0) space.require(y[j]);
      cost[i * n + j] = detail::pow_p(space.metric(x[i], y[j]), p);
    }
  }
  const Assignment a = solve_assignment(cost, n);
  return detail::root_p(a.total / static_cast<long double>(n), p);
}

namespace detail {

inline void require_1d(const DiscreteMeasure& m) {
  if (m.empty()) throw InvalidInput("measure has empty support");
  for (const Point& x : m.support()) {
    if (x.is_label() || x.dim() != 1) {
      throw InvalidInput("1-D Wasserstein needs real-valued support");
    }
  }
}

}  // namespace detail

/// W_p between discrete measures on the line via merged quantile functions.
inline double wasserstein_1d(const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu, double p) {
  detail::check_order(p);
  detail::require_1d(mu);
  detail::require_1d(nu);
  // Supports are sorted by construction.
  const auto& xs = mu.support();
  const auto& ys = nu.support();
  const auto& wx = mu.weights();
  const auto& wy = nu.weights();
  long double fx = wx[0];
  long double fy = wy[0];
  long double t = 0.0L;
  long double acc = 0.0L;
  std::size_t i = 0;
  std::size_t j = 0;
  for (;;) {
    const long double next = std::min(fx, fy);
    if (next > t) {
      acc += (next - t) * detail::pow_p(std::abs(xs[i][0] - ys[j][0]), p);
      t = next;
    }
    const bool last_x = i + 1 == xs.size();
    const bool last_y = j + 1 == ys.size();
    if (last_x && last_y) break;
    if (!last_x && (fx <= fy || last_y)) {
      fx += wx[++i];
    } else {
      fy += wy[++j];
    }
  }
  // Cumulative sums may stop short of 1 by rounding; the tail sits on the
  // two largest atoms.
  if (t < 1.0L) {
    acc += (1.0L - t) *
           detail::pow_p(std::abs(xs.back()[0] - ys.back()[0]), p);
  }
  return detail::root_p(acc, p);
}

/// W_p between a discrete measure on [0,1] and a law on [0,1].
inline double wasserstein_1d(const DiscreteMeasure& mu, const Law& law,
                             double p) {
  detail::check_order(p);
  detail::require_1d(mu);
  if (const auto* d = std::get_if<DiscreteMeasure>(&law)) {
    return wasserstein_1d(mu, *d, p);
  }
  const auto& xs = mu.support();
  const auto& w = mu.weights();
  long double acc = 0.0L;
  long double t0 = 0.0L;
  const bool uniform = std::holds_alternative<UniformLaw>(law);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const long double t1 = i + 1 == xs.size() ? 1.0L : t0 + w[i];
    const double x = xs[i][0];
    if (uniform) {
      // int_{t0}^{t1} |x - t|^p dt in closed form.
      auto prim = [&](long double t) {
        const long double s = t - x;
        const long double mag =
            std::pow(std::abs(s), static_cast<long double>(p) + 1.0L) /
            (static_cast<long double>(p) + 1.0L);
        return s < 0 ? -mag : mag;
      };
      acc += prim(t1) - prim(t0);
    } else {
      QuadratureOptions opt;
      opt.rel_tol = 1e-12;
      opt.abs_tol = 1e-15;
      acc += integrate(
                 [&](double t) {
                   return detail::pow_p(std::abs(x - quantile_1d(law, t)), p);
                 },
                 static_cast<double>(t0), static_cast<double>(t1), opt)
                 .value;
    }
    t0 = t1;
  }
  return detail::root_p(acc, p);
}

/// W_1 on [0,1] between mixtures, as the integral of |F - G|.
inline double wasserstein1_1d(const Mixture& a, const Mixture& b) {
  if (a.all_discrete() && b.all_discrete()) {
    return wasserstein_1d(a.as_discrete(), b.as_discrete(), 1.0);
  }
  std::vector<double> breaks = {0.0, 1.0};
  auto add_atoms = [&](const Mixture& m) {
    for (const Law& l : m.parts) {
      const DiscreteMeasure* d = std::get_if<DiscreteMeasure>(&l);
      if (const auto* au = std::get_if<AtomsUniformLaw>(&l)) d = &au->atoms;
      if (!d) continue;
      detail::require_1d(*d);
      for (const Point& x : d->support()) breaks.push_back(x[0]);
    }
  };
  add_atoms(a);
  add_atoms(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  // Evaluate the CDFs strictly inside each piece so atoms at the ends do
  // not matter; GK nodes never touch the endpoints.
  return integrate_pieces(
             [&](double x) { return std::abs(cdf_1d(a, x) - cdf_1d(b, x)); },
             breaks, opt)
      .value;
}

/// W_p with the 1-D closed form used on the unit interval and the LP
/// elsewhere.
inline double wasserstein_value(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double p,
                                const MetricSpace& space) {
  if (space.is_hypercube() && space.dim() == 1) {
    require_supported(mu, space);
    require_supported(nu, space);
    return wasserstein_1d(mu, nu, p);
  }
  return wasserstein(mu, nu, p, space).cost;
}

/// (mean over draws of W_p(draw, p0)^p)^(1/p): the outer distance from an
/// empirical law on measures to the Dirac at p0.
inline double wasserstein_to_point_mass(std::span<const DiscreteMeasure> draws,
                                        const DiscreteMeasure& p0, double p,
                                        const MetricSpace& space) {
  detail::check_order(p);
  if (draws.empty()) throw InvalidInput("no posterior draws");
  long double acc = 0.0L;
  for (const DiscreteMeasure& d : draws) {
    acc += detail::pow_p(wasserstein_value(d, p0, p, space), p);
  }
  return detail::root_p(acc / static_cast<long double>(draws.size()), p);
}

}  // namespace wpcr
