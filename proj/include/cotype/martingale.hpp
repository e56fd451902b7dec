#pragma once

// Barycentric martingales on the sign cube {-1,+1}^n.
//
// Given terminal values h(eps), the level-i array is produced by the
// two-point backward recursion
//   E_n = h,
//   E_i(eps_1..eps_i) = B( (delta_{E_{i+1}(eps,-1)} + delta_{E_{i+1}(eps,+1)}) / 2 ),
// i.e. each entry is the barycenter of its two children, NOT a one-shot
// barycenter of all terminal descendants (the two notions differ once the
// barycenter map is nonlinear).
//
// Level i holds 2^i entries indexed by a prefix mask: bit j-1 of the mask is
// set exactly when eps_j = +1.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/measure.hpp"
#include "cotype/numeric.hpp"
#include "cotype/point.hpp"
#include "cotype/space.hpp"

namespace cotype {

struct CubeMartingale {
  std::size_t n = 0;
  SpacePtr space;
  BarycenterMap map;
  // levels[i] has size 2^i; levels[n] are the terminal values.
  std::vector<std::vector<Point>> levels;

  const Point& at(std::size_t level, std::uint32_t prefix) const {
    return levels[level][prefix];
  }
};

inline CubeMartingale build_cube_martingale(SpacePtr space, const BarycenterMap& map,
                                            const std::vector<Point>& h) {
  if (!space) throw UsageError("cube martingale: null space");
  if (h.empty() || (h.size() & (h.size() - 1)) != 0) {
    throw UsageError("cube martingale: terminal data size must be a power of two");
  }
  CubeMartingale m;
  m.space = std::move(space);
  m.map = map;
  std::size_t n = 0;
  while ((std::size_t{1} << n) < h.size()) ++n;
  m.n = n;
  m.levels.resize(n + 1);
  m.levels[n] = h;
  for (std::size_t i = n; i-- > 0;) {
    m.levels[i].resize(std::size_t{1} << i);
    for (std::uint32_t p = 0; p < (std::uint32_t{1} << i); ++p) {
      const Point& lo = m.levels[i + 1][p];                          // eps_{i+1} = -1
      const Point& hi = m.levels[i + 1][p | (std::uint32_t{1} << i)];  // eps_{i+1} = +1
      m.levels[i][p] = barycenter(*m.space, map, Measure::two_point(lo, hi));
    }
  }
  return m;
}

struct MartingalePropertyReport {
  double max_deviation = 0.0;  // distance between stored and recomputed entry
  std::size_t worst_level = 0;
  std::uint32_t worst_prefix = 0;
  bool pass = false;
};

// Recomputes every interior entry from its two children and reports the
// largest distance to the stored value.  A freshly built martingale deviates
// by exactly zero (the recomputation is deterministic); the check exists to
// catch externally modified or corrupted level data.
inline MartingalePropertyReport verify_martingale_property(const CubeMartingale& m,
                                                           double tol = kAbsFloor) {
  MartingalePropertyReport rep;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::uint32_t p = 0; p < (std::uint32_t{1} << i); ++p) {
      const Point& lo = m.levels[i + 1][p];
      const Point& hi = m.levels[i + 1][p | (std::uint32_t{1} << i)];
      const Point fresh = barycenter(*m.space, m.map, Measure::two_point(lo, hi));
      const double dev = m.space->distance(fresh, m.levels[i][p]);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_level = i;
        rep.worst_prefix = p;
      }
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

struct MonotonicityReport {
  std::vector<double> moments;      // M_i = 2^{-i} sum_prefix d(E_i(prefix), x)^q
  double worst_violation = 0.0;     // max over i of M_i - M_{i+1}; <= 0 is monotone
  std::size_t worst_level = 0;
  bool pass = false;
};

// The q-th distance moments to a fixed reference point are nondecreasing in
// the level index for any barycentric martingale.
inline MonotonicityReport check_monotonicity(const CubeMartingale& m, const Point& x, double q,
                                             double tol = kAbsFloor) {
  MonotonicityReport rep;
  rep.moments.resize(m.n + 1);
  for (std::size_t i = 0; i <= m.n; ++i) {
    KahanSum s;
    for (std::uint32_t p = 0; p < (std::uint32_t{1} << i); ++p) {
      s.add(qpow(m.space->distance(m.levels[i][p], x), q));
    }
    rep.moments[i] = std::ldexp(s.value(), -static_cast<int>(i));
  }
  rep.worst_violation = -infinity();
  for (std::size_t i = 0; i < m.n; ++i) {
    const double v = rep.moments[i] - rep.moments[i + 1];
    if (v > rep.worst_violation) {
      rep.worst_violation = v;
      rep.worst_level = i;
    }
  }
  if (m.n == 0) rep.worst_violation = 0.0;
  double scale = 0.0;
  for (double v : rep.moments) scale = std::max(scale, std::abs(v));
  rep.pass = rep.worst_violation <= std::max(tol, kRelTol * scale);
  return rep;
}

struct DecayReport {
  double lhs = 0.0;    // d(E_0, x)^q + beta^{-q} * sum_i 2^{-i} sum_p d(E_i(p), parent)^q
  double rhs = 0.0;    // 2^{-n} sum_eps d(h(eps), x)^q
  double slack = 0.0;  // rhs - lhs; >= 0 when the martingale-difference bound holds
  double base_term = 0.0;
  double increment_sum = 0.0;  // without the beta^{-q} factor
  bool pass = false;
};

// Martingale-difference decay bound: the q-th moment of the terminal values
// around x dominates the starting moment plus beta^{-q} times the summed
// level-increment moments,
//   d(E_0, x)^q + beta^{-q} sum_{i=1..n} 2^{-i} sum_p d(E_i(p), E_{i-1}(parent(p)))^q
//     <= 2^{-n} sum_eps d(h(eps), x)^q.
// Equality holds in Hilbert targets with the linear mean at q = 2, beta = 1.
inline DecayReport check_pisier(const CubeMartingale& m, const Point& x, double q, double beta,
                                double rel_tol = kRelTol) {
  if (!(beta >= 1.0)) throw UsageError("martingale decay check: beta must be >= 1");
  DecayReport rep;
  rep.base_term = qpow(m.space->distance(m.levels[0][0], x), q);
  KahanSum incr;
  for (std::size_t i = 1; i <= m.n; ++i) {
    KahanSum level;
    const std::uint32_t parent_mask = (std::uint32_t{1} << (i - 1)) - 1;
    for (std::uint32_t p = 0; p < (std::uint32_t{1} << i); ++p) {
      level.add(qpow(m.space->distance(m.levels[i][p], m.levels[i - 1][p & parent_mask]), q));
    }
    incr.add(std::ldexp(level.value(), -static_cast<int>(i)));
  }
  rep.increment_sum = incr.value();
  rep.lhs = rep.base_term + std::pow(beta, -q) * rep.increment_sum;
  KahanSum term;
  for (std::uint32_t e = 0; e < (std::uint32_t{1} << m.n); ++e) {
    term.add(qpow(m.space->distance(m.levels[m.n][e], x), q));
  }
  rep.rhs = std::ldexp(term.value(), -static_cast<int>(m.n));
  rep.slack = rep.rhs - rep.lhs;
  rep.pass = rep.slack >= -std::max(kAbsFloor, rel_tol * std::abs(rep.rhs));
  return rep;
}

}  // namespace cotype
