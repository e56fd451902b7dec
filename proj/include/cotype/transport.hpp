#pragma once

// Exact solver for the balanced transportation problem
//   minimize sum_ij x_ij c_ij   s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0
// via the transportation simplex (northwest-corner start, u/v potentials,
// first-negative-reduced-cost entering rule).  The first-cell pivot rule makes
// the run deterministic and, being Bland's rule, cannot cycle on degenerate
// bases.  Problem sizes here are tiny (measure supports), so the dense
// O(rows*cols) per-iteration scan is the simplest correct choice.

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/numeric.hpp"

namespace cotype {

struct TransportPlanEntry {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0.0;
};

struct TransportResult {
  double cost = 0.0;
  std::vector<TransportPlanEntry> plan;  // strictly positive entries only
};

namespace detail {

struct TransportTableau {
  std::size_t na, nb;
  std::vector<double> flow;   // na*nb, row-major
  std::vector<char> basic;    // na*nb
  std::size_t at(std::size_t i, std::size_t j) const { return i * nb + j; }
};

inline void northwest_start(const std::vector<double>& a, const std::vector<double>& b,
                            TransportTableau& t) {
  std::vector<double> ra = a, cb = b;
  std::size_t i = 0, j = 0;
  while (i < t.na && j < t.nb) {
    const double x = std::min(ra[i], cb[j]);
    t.flow[t.at(i, j)] = x;
    t.basic[t.at(i, j)] = 1;
    ra[i] -= x;
    cb[j] -= x;
    // Advance exactly one index per step so the basis stays a spanning tree
    // (na + nb - 1 cells) even when a supply and a demand exhaust together.
    if (ra[i] <= cb[j] && i + 1 < t.na) {
      ++i;
    } else {
      ++j;
    }
  }
}

// Solve u_i + v_j = c_ij over the basis tree (u_0 = 0).
inline void potentials(const TransportTableau& t, const std::vector<double>& c,
                       std::vector<double>& u, std::vector<double>& v) {
  const std::size_t n = t.na + t.nb;
  std::vector<char> known(n, 0);
  u.assign(t.na, 0.0);
  v.assign(t.nb, 0.0);
  std::queue<std::size_t> q;
  known[0] = 1;
  q.push(0);
  while (!q.empty()) {
    const std::size_t node = q.front();
    q.pop();
    if (node < t.na) {
      const std::size_t i = node;
      for (std::size_t j = 0; j < t.nb; ++j) {
        if (t.basic[t.at(i, j)] && !known[t.na + j]) {
          v[j] = c[t.at(i, j)] - u[i];
          known[t.na + j] = 1;
          q.push(t.na + j);
        }
      }
    } else {
      const std::size_t j = node - t.na;
      for (std::size_t i = 0; i < t.na; ++i) {
        if (t.basic[t.at(i, j)] && !known[i]) {
          u[i] = c[t.at(i, j)] - v[j];
          known[i] = 1;
          q.push(i);
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!known[k]) throw std::logic_error("transport basis is not connected");
  }
}

// Alternating cycle created by adding (ei, ej) to the basis tree: the tree
// path from row node ei to column node ej, as a list of cells.
inline std::vector<std::pair<std::size_t, std::size_t>> basis_path(
    const TransportTableau& t, std::size_t ei, std::size_t ej) {
  const std::size_t n = t.na + t.nb;
  std::vector<int> parent(n, -1);
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> q;
  seen[ei] = 1;
  q.push(ei);
  const std::size_t target = t.na + ej;
  while (!q.empty() && !seen[target]) {
    const std::size_t node = q.front();
    q.pop();
    if (node < t.na) {
      for (std::size_t j = 0; j < t.nb; ++j) {
        if (t.basic[t.at(node, j)] && !seen[t.na + j]) {
          seen[t.na + j] = 1;
          parent[t.na + j] = static_cast<int>(node);
          q.push(t.na + j);
        }
      }
    } else {
      const std::size_t j = node - t.na;
      for (std::size_t i = 0; i < t.na; ++i) {
        if (t.basic[t.at(i, j)] && !seen[i]) {
          seen[i] = 1;
          parent[i] = static_cast<int>(t.na + j);
          q.push(i);
        }
      }
    }
  }
  if (!seen[target]) throw std::logic_error("transport basis path not found");
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::size_t node = target;
  while (node != ei) {
    const std::size_t par = static_cast<std::size_t>(parent[node]);
    if (node >= t.na) {
      cells.emplace_back(par, node - t.na);  // par is a row
    } else {
      cells.emplace_back(node, par - t.na);  // par is a column
    }
    node = par;
  }
  // cells currently run target -> ei; orient them ei -> target.
  std::vector<std::pair<std::size_t, std::size_t>> path(cells.rbegin(), cells.rend());
  return path;
}

}  // namespace detail

inline TransportResult solve_transport(const std::vector<double>& a,
                                       const std::vector<double>& b,
                                       const std::vector<std::vector<double>>& cost) {
  const std::size_t na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) throw UsageError("transport: empty marginal");
  if (cost.size() != na) throw UsageError("transport: cost rows mismatch supplies");
  double sa = 0.0, sb = 0.0, cmax = 0.0;
  for (double x : a) {
    if (x < 0.0) throw UsageError("transport: negative supply");
    sa += x;
  }
  for (double x : b) {
    if (x < 0.0) throw UsageError("transport: negative demand");
    sb += x;
  }
  for (const auto& row : cost) {
    if (row.size() != nb) throw UsageError("transport: cost cols mismatch demands");
    for (double x : row) cmax = std::max(cmax, std::abs(x));
  }
  if (std::abs(sa - sb) > 1e-9 * std::max(1.0, std::max(sa, sb))) {
    throw UsageError("transport: marginals have different total mass");
  }

  detail::TransportTableau t;
  t.na = na;
  t.nb = nb;
  t.flow.assign(na * nb, 0.0);
  t.basic.assign(na * nb, 0);
  std::vector<double> c(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) c[t.at(i, j)] = cost[i][j];

  detail::northwest_start(a, b, t);

  const double eps = 1e-14 * std::max(1.0, cmax);
  std::vector<double> u, v;
  const std::size_t max_iters = 1000 * (na + nb) * (na + nb) + 1000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iters) throw std::logic_error("transport simplex failed to terminate");
    detail::potentials(t, c, u, v);

    // Entering cell: first (row-major) nonbasic cell with negative reduced cost.
    std::size_t ei = na, ej = nb;
    bool found = false;
    for (std::size_t i = 0; i < na && !found; ++i) {
      for (std::size_t j = 0; j < nb && !found; ++j) {
        if (!t.basic[t.at(i, j)] && c[t.at(i, j)] - u[i] - v[j] < -eps) {
          ei = i;
          ej = j;
          found = true;
        }
      }
    }
    if (!found) break;

    const auto path = detail::basis_path(t, ei, ej);
    // Entering cell takes +theta; path cells alternate -,+,-,... starting at -.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = path.size();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = t.flow[t.at(path[k].first, path[k].second)];
      if (f < theta) {
        theta = f;
        leave = k;
      }
    }
    if (leave == path.size()) throw std::logic_error("transport pivot found no leaving cell");

    t.flow[t.at(ei, ej)] += theta;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double sgn = (k % 2 == 0) ? -1.0 : 1.0;
      t.flow[t.at(path[k].first, path[k].second)] += sgn * theta;
    }
    t.basic[t.at(ei, ej)] = 1;
    t.basic[t.at(path[leave].first, path[leave].second)] = 0;
    t.flow[t.at(path[leave].first, path[leave].second)] = 0.0;
  }

  TransportResult out;
  KahanSum total;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double f = t.flow[t.at(i, j)];
      if (f > 0.0) {
        out.plan.push_back({i, j, f});
        total.add(f * c[t.at(i, j)]);
      }
    }
  }
  out.cost = total.value();
  return out;
}

}  // namespace cotype
