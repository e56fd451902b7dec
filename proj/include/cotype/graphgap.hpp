#pragma once

// Nonlinear spectral-gap ratios for point configurations in a metric space.
//
// For a d-regular graph G = (V, E) and points x_u in a space X,
//   lhs = |V|^{-2} sum_{ordered (u,v)} d(x_u, x_v)^2
//   rhs = |E|^{-1} sum_{{u,v} in E} d(x_u, x_v)^2
// and gamma_hat = lhs / rhs is the least gamma for which this configuration
// satisfies the Poincare-type comparison lhs <= gamma * rhs.  The relative
// variant averages only within the blocks of a partition.
//
// A single configuration only ever bounds the true gap from one side; every
// report carries that caveat explicitly.

#include <algorithm>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/measure.hpp"
#include "cotype/numeric.hpp"
#include "cotype/parallel.hpp"
#include "cotype/point.hpp"
#include "cotype/space.hpp"

namespace cotype {

struct RegularGraph {
  std::size_t vertices = 0;
  std::size_t degree = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // undirected, u < v

  RegularGraph(std::size_t n, std::size_t d,
               std::vector<std::pair<std::size_t, std::size_t>> edge_list)
      : vertices(n), degree(d), edges(std::move(edge_list)) {
    if (n < 2) throw UsageError("graph: need at least two vertices");
    if (d == 0) throw UsageError("graph: degree must be positive");
    std::vector<std::size_t> deg(n, 0);
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto& [u, v] : edges) {
      if (u >= n || v >= n) throw UsageError("graph: edge endpoint out of range");
      if (u == v) throw UsageError("graph: self-loops are not allowed");
      if (u > v) std::swap(u, v);
      ++deg[u];
      ++deg[v];
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    for (std::size_t u = 0; u < n; ++u) {
      std::sort(adj[u].begin(), adj[u].end());
      for (std::size_t k = 1; k < adj[u].size(); ++k) {
        if (adj[u][k] == adj[u][k - 1]) throw UsageError("graph: duplicate edge");
      }
      if (deg[u] != d) {
        throw UsageError("graph: vertex " + std::to_string(u) + " has degree " +
                         std::to_string(deg[u]) + ", expected " + std::to_string(d));
      }
    }
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> bfs;
    bfs.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!bfs.empty()) {
      const std::size_t u = bfs.front();
      bfs.pop();
      for (const std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          bfs.push(v);
        }
      }
    }
    if (reached != n) throw UsageError("graph: not connected");
  }
};

inline RegularGraph make_complete_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return RegularGraph(n, n - 1, std::move(e));
}

inline RegularGraph make_cycle_graph(std::size_t n) {
  if (n < 3) throw UsageError("cycle graph: need at least three vertices");
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t u = 0; u < n; ++u) e.emplace_back(u, (u + 1) % n);
  return RegularGraph(n, 2, std::move(e));
}

struct GapReport {
  std::size_t vertices = 0;
  std::size_t edge_count = 0;
  std::size_t degree = 0;
  bool relative = false;
  std::size_t blocks = 0;  // relative variant only
  double lhs = 0.0;
  double rhs = 0.0;
  double gamma_hat = 0.0;  // rho_hat in the relative variant
  bool degenerate = false;  // constant configuration (rhs = 0)
  // One configuration's ratio bounds the true gap from below only; the
  // graph-wide constant is a supremum this tool never certifies.
  bool one_sided = true;
};

namespace detail {

inline double edge_square_sum(const RegularGraph& g, const Space& space,
                              const std::vector<Point>& pts) {
  return deterministic_sum(g.edges.size(), [&](std::size_t k) {
    const auto& [u, v] = g.edges[k];
    return qpow(space.distance(pts[u], pts[v]), 2.0);
  });
}

}  // namespace detail

inline GapReport spectral_gap(const RegularGraph& g, const Space& space,
                              const std::vector<Point>& pts) {
  const std::size_t n = g.vertices;
  if (pts.size() != n) throw UsageError("spectral gap: need one point per vertex");
  GapReport rep;
  rep.vertices = n;
  rep.edge_count = g.edges.size();
  rep.degree = g.degree;

  const double pair_sum = deterministic_sum(n * n, [&](std::size_t t) {
    const std::size_t u = t / n;
    const std::size_t v = t % n;
    return (u == v) ? 0.0 : qpow(space.distance(pts[u], pts[v]), 2.0);
  });
  const double edge_sum = detail::edge_square_sum(g, space, pts);

  const double nn = static_cast<double>(n) * static_cast<double>(n);
  rep.lhs = pair_sum / nn;
  rep.rhs = edge_sum / static_cast<double>(g.edges.size());
  if (edge_sum <= 0.0) {
    rep.degenerate = true;
    rep.gamma_hat = 0.0;
  } else {
    // Single division keeps rational ratios exact (e.g. 12/18 on a 3-cycle).
    rep.gamma_hat = (pair_sum * static_cast<double>(g.edges.size())) / (nn * edge_sum);
  }
  return rep;
}

inline GapReport relative_spectral_gap(const RegularGraph& g, const Partition& partition,
                                       const Space& space, const std::vector<Point>& pts) {
  const std::size_t n = g.vertices;
  if (pts.size() != n) throw UsageError("relative gap: need one point per vertex");
  partition.validate(n);
  GapReport rep;
  rep.vertices = n;
  rep.edge_count = g.edges.size();
  rep.degree = g.degree;
  rep.relative = true;
  rep.blocks = partition.blocks.size();

  KahanSum block_avg;  // sum over blocks of |C|^{-1} sum_{ordered u,v in C} d^2
  for (const auto& block : partition.blocks) {
    KahanSum s;
    for (const std::size_t u : block) {
      for (const std::size_t v : block) {
        if (u != v) s.add(qpow(space.distance(pts[u], pts[v]), 2.0));
      }
    }
    block_avg.add(s.value() / static_cast<double>(block.size()));
  }
  const double edge_sum = detail::edge_square_sum(g, space, pts);
  rep.lhs = block_avg.value() / static_cast<double>(n);
  rep.rhs = edge_sum / static_cast<double>(g.edges.size());
  if (edge_sum <= 0.0) {
    rep.degenerate = true;
    rep.gamma_hat = 0.0;
  } else {
    rep.gamma_hat = (block_avg.value() * static_cast<double>(g.edges.size())) /
                    (static_cast<double>(n) * edge_sum);
  }
  return rep;
}

}  // namespace cotype
