#pragma once

// Functions on the discrete torus Z_L^n with L = 2m, stored densely in
// little-endian mixed radix: index(x) = sum_i x_i * L^i.  The word metric
// used on the torus takes one step to move any subset of coordinates by +-1,
// so  dist(a, b) = max_i min(|a_i - b_i|, L - |a_i - b_i|).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/martingale.hpp"
#include "cotype/point.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"

namespace cotype {

struct TorusIndexer {
  std::size_t n = 0;
  std::size_t L = 0;  // side length (2m)
  std::vector<std::size_t> pow;

  TorusIndexer() = default;
  TorusIndexer(std::size_t n_, std::size_t L_) : n(n_), L(L_) {
    if (n == 0) throw UsageError("torus: dimension must be positive");
    if (L < 2 || L % 2 != 0) throw UsageError("torus: side length must be even and >= 2");
    pow.resize(n + 1);
    pow[0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (pow[i] > (std::size_t{1} << 40) / L) {
        throw BudgetError("torus: point count overflows the supported range");
      }
      pow[i + 1] = pow[i] * L;
    }
  }

  std::size_t size() const { return pow[n]; }
  std::size_t m() const { return L / 2; }

  std::size_t index(const std::vector<std::size_t>& coords) const {
    if (coords.size() != n) throw UsageError("torus: coordinate arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (coords[i] >= L) throw UsageError("torus: coordinate out of range");
      idx += coords[i] * pow[i];
    }
    return idx;
  }

  std::vector<std::size_t> coords(std::size_t idx) const {
    std::vector<std::size_t> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = (idx / pow[i]) % L;
    }
    return c;
  }

  std::size_t digit(std::size_t idx, std::size_t axis) const {
    return (idx / pow[axis]) % L;
  }

  // Index of x + delta * e_axis, wrapping mod L.
  std::size_t shift(std::size_t idx, std::size_t axis, long long delta) const {
    const std::size_t d = digit(idx, axis);
    long long nd = (static_cast<long long>(d) + delta) % static_cast<long long>(L);
    if (nd < 0) nd += static_cast<long long>(L);
    return idx + (static_cast<std::size_t>(nd) - d) * pow[axis];
  }

  // Index of x + eps where eps in {-1,+1}^n is coded by a bitmask
  // (bit i set <=> eps_{i+1} = +1).
  std::size_t shift_signs(std::size_t idx, std::uint32_t mask) const {
    for (std::size_t i = 0; i < n; ++i) {
      idx = shift(idx, i, (mask >> i) & 1u ? +1 : -1);
    }
    return idx;
  }

  // Index of x + eps, eps in {-1,0,+1}^n coded base 3 (digit 0 -> -1,
  // 1 -> 0, 2 -> +1).
  std::size_t shift_ternary(std::size_t idx, std::size_t code) const {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t t = code % 3;
      code /= 3;
      if (t == 0) {
        idx = shift(idx, i, -1);
      } else if (t == 2) {
        idx = shift(idx, i, +1);
      }
    }
    return idx;
  }
};

inline double torus_metric(std::size_t m, const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw UsageError("torus metric: arity mismatch");
  const std::size_t L = 2 * m;
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= L || b[i] >= L) throw UsageError("torus metric: coordinate out of range");
    const std::size_t diff = a[i] >= b[i] ? a[i] - b[i] : b[i] - a[i];
    best = std::max(best, std::min(diff, L - diff));
  }
  return static_cast<double>(best);
}

class TorusFunction {
 public:
  TorusFunction(TorusIndexer idx, SpacePtr target, std::vector<Point> values)
      : idx_(std::move(idx)), target_(std::move(target)), values_(std::move(values)) {
    if (!target_) throw UsageError("torus function: null target space");
    if (values_.size() != idx_.size()) {
      throw UsageError("torus function: expected " + std::to_string(idx_.size()) +
                       " values, got " + std::to_string(values_.size()));
    }
  }

  const TorusIndexer& indexer() const { return idx_; }
  const SpacePtr& target() const { return target_; }
  std::size_t n() const { return idx_.n; }
  std::size_t m() const { return idx_.m(); }
  std::size_t side() const { return idx_.L; }
  std::size_t size() const { return idx_.size(); }

  const Point& value(std::size_t index) const { return values_[index]; }
  const std::vector<Point>& values() const { return values_; }
  std::vector<Point>& mutable_values() { return values_; }

  // Terminal sign-cube data of the restriction around x:
  // h[mask] = f(x + eps(mask)).
  std::vector<Point> cube_restriction(std::size_t x) const {
    std::vector<Point> h(std::size_t{1} << idx_.n);
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << idx_.n); ++mask) {
      h[mask] = values_[idx_.shift_signs(x, mask)];
    }
    return h;
  }

 private:
  TorusIndexer idx_;
  SpacePtr target_;
  std::vector<Point> values_;
};

inline TorusFunction make_constant_torus_function(std::size_t n, std::size_t m, SpacePtr target,
                                                  const Point& value) {
  TorusIndexer idx(n, 2 * m);
  std::vector<Point> vals(idx.size(), value);
  return TorusFunction(std::move(idx), std::move(target), std::move(vals));
}

// Independent draws per lattice site: coordinates are i.i.d. standard normal
// on l_p targets, positions are length-uniform on trees, and so on per the
// backend's sampler.  Deterministic in (seed, site index).
inline TorusFunction make_random_torus_function(std::size_t n, std::size_t m, SpacePtr target,
                                                std::uint64_t seed) {
  TorusIndexer idx(n, 2 * m);
  SplitRng root(seed);
  std::vector<Point> vals(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    SplitRng child = root.split(i);
    vals[i] = target->sample_point(child);
  }
  return TorusFunction(std::move(idx), std::move(target), std::move(vals));
}

inline CubeMartingale restriction_martingale(const TorusFunction& f, const BarycenterMap& map,
                                             std::size_t x) {
  return build_cube_martingale(f.target(), map, f.cube_restriction(x));
}

// ---------------------------------------------------------------------------
// Translation identity of restriction martingales
// ---------------------------------------------------------------------------
//
// For j <= i, translating the base point against the j-th sign reproduces the
// level-i entry with that sign flipped:
//   (E_i f_{x - 2 eps_j e_j})(eps) = (E_i f_x)(eps with eps_j flipped).
// The identity is exact; deviations measure only barycenter-solver noise.

inline double translation_identity_deviation(const TorusFunction& f, const BarycenterMap& map,
                                             std::size_t level, std::size_t j,
                                             std::uint32_t eps_mask, std::size_t x) {
  if (level == 0 || level > f.n()) throw UsageError("translation identity: level out of range");
  if (j == 0 || j > level) throw UsageError("translation identity: need 1 <= j <= level");
  const long long eps_j = (eps_mask >> (j - 1)) & 1u ? +1 : -1;
  const std::size_t x_shift = f.indexer().shift(x, j - 1, -2 * eps_j);
  const CubeMartingale mart_x = restriction_martingale(f, map, x);
  const CubeMartingale mart_s = restriction_martingale(f, map, x_shift);
  const std::uint32_t prefix = eps_mask & ((std::uint32_t{1} << level) - 1);
  const std::uint32_t flipped = prefix ^ (std::uint32_t{1} << (j - 1));
  return f.target()->distance(mart_s.at(level, prefix), mart_x.at(level, flipped));
}

struct TranslationIdentityReport {
  double max_deviation = 0.0;
  std::size_t worst_level = 0, worst_j = 0, worst_x = 0;
  std::uint32_t worst_eps = 0;
  std::size_t checked = 0;
  bool pass = false;
};

// Exhaustive sweep over all (level i, coordinate j <= i, sign pattern eps,
// base point x).  Martingales are cached per base point, so the sweep costs
// L^n builds rather than L^n * n * 2^n.
inline TranslationIdentityReport check_translation_identity(const TorusFunction& f,
                                                            const BarycenterMap& map,
                                                            double tol) {
  const std::size_t n = f.n();
  const std::size_t size = f.size();
  std::vector<CubeMartingale> cache;
  cache.reserve(size);
  for (std::size_t x = 0; x < size; ++x) cache.push_back(restriction_martingale(f, map, x));

  TranslationIdentityReport rep;
  for (std::size_t x = 0; x < size; ++x) {
    for (std::size_t level = 1; level <= n; ++level) {
      for (std::size_t j = 1; j <= level; ++j) {
        for (std::uint32_t eps = 0; eps < (std::uint32_t{1} << n); ++eps) {
          const long long eps_j = (eps >> (j - 1)) & 1u ? +1 : -1;
          const std::size_t xs = f.indexer().shift(x, j - 1, -2 * eps_j);
          const std::uint32_t prefix = eps & ((std::uint32_t{1} << level) - 1);
          const std::uint32_t flipped = prefix ^ (std::uint32_t{1} << (j - 1));
          const double dev =
              f.target()->distance(cache[xs].at(level, prefix), cache[x].at(level, flipped));
          ++rep.checked;
          if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.worst_level = level;
            rep.worst_j = j;
            rep.worst_eps = eps;
            rep.worst_x = x;
          }
        }
      }
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

}  // namespace cotype
