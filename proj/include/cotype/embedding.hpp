#pragma once

// Bi-Lipschitz embedding machinery: finite grids and discrete tori as metric
// spaces, reference embeddings (identity, simplex "forget", the perimeter
// walk psi), exact distortion by pair enumeration, the cotype-derived lower
// bound on grid distortion, two-sided estimates for the critical exponent
// p_alpha, the curve construction that obstructs coarse embeddings, and
// coarse-moduli envelopes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/numeric.hpp"
#include "cotype/point.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/torus.hpp"

namespace cotype {

// ---------------------------------------------------------------------------
// Grid and torus domains
// ---------------------------------------------------------------------------

// {1,...,m}^n under the max-coordinate metric.  Points are real vectors with
// integer entries; the space is enumerable without materializing a distance
// matrix.
class GridSpace final : public Space {
 public:
  GridSpace(std::size_t m, std::size_t n, double budget = 1e6) : m_(m), n_(n) {
    if (m == 0 || n == 0) throw UsageError("grid space: m and n must be positive");
    double count = 1.0;
    size_ = 1;
    for (std::size_t i = 0; i < n; ++i) {
      count *= static_cast<double>(m);
      if (count > budget) throw BudgetError("grid space: m^n exceeds budget");
      size_ *= m;
    }
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }

  std::string kind() const override { return "grid"; }
  std::string describe() const override {
    return "grid [" + std::to_string(m_) + "]^" + std::to_string(n_) + " with max metric";
  }

  double distance(const Point& a, const Point& b) const override {
    const auto& va = detail::as_vec(a, n_, "grid").x;
    const auto& vb = detail::as_vec(b, n_, "grid").x;
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) best = std::max(best, std::abs(va[i] - vb[i]));
    return best;
  }

  std::optional<double> diameter() const override {
    return m_ == 1 ? 0.0 : static_cast<double>(m_ - 1);
  }

  std::size_t enumerable_size() const override { return size_; }

  Point enumerate_point(std::size_t index) const override {
    if (index >= size_) throw UsageError("grid space: index out of range");
    std::vector<double> v(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      v[i] = static_cast<double>(1 + index % m_);
      index /= m_;
    }
    return vec_point(std::move(v));
  }

  Point sample_point(SplitRng& rng) const override {
    return enumerate_point(rng.next_below(size_));
  }

 private:
  std::size_t m_, n_, size_;
};

// Z_{2m}^n under the torus max metric (= word metric for {-1,0,1}^n steps).
class TorusGridSpace final : public Space {
 public:
  TorusGridSpace(std::size_t m, std::size_t n, double budget = 1e6) : m_(m), idx_(n, 2 * m) {
    if (static_cast<double>(idx_.size()) > budget) {
      throw BudgetError("torus grid: (2m)^n exceeds budget");
    }
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return idx_.n; }
  const TorusIndexer& indexer() const { return idx_; }

  std::string kind() const override { return "torus-grid"; }
  std::string describe() const override {
    return "torus Z_" + std::to_string(2 * m_) + "^" + std::to_string(idx_.n) +
           " with cycle max metric";
  }

  double distance(const Point& a, const Point& b) const override {
    return torus_metric(m_, coords(a), coords(b));
  }

  std::optional<double> diameter() const override { return static_cast<double>(m_); }

  std::size_t enumerable_size() const override { return idx_.size(); }

  Point enumerate_point(std::size_t index) const override {
    if (index >= idx_.size()) throw UsageError("torus grid: index out of range");
    std::vector<double> v(idx_.n);
    for (std::size_t i = 0; i < idx_.n; ++i) v[i] = static_cast<double>(idx_.digit(index, i));
    return vec_point(std::move(v));
  }

  Point sample_point(SplitRng& rng) const override {
    return enumerate_point(rng.next_below(idx_.size()));
  }

 private:
  std::vector<std::size_t> coords(const Point& p) const {
    const auto& v = detail::as_vec(p, idx_.n, "torus grid").x;
    std::vector<std::size_t> c(idx_.n);
    for (std::size_t i = 0; i < idx_.n; ++i) {
      const double r = std::round(v[i]);
      if (std::abs(v[i] - r) > kAbsFloor || r < 0.0 || r >= static_cast<double>(2 * m_)) {
        throw UsageError("torus grid: coordinates must be integers in [0, 2m)");
      }
      c[i] = static_cast<std::size_t>(r);
    }
    return c;
  }

  std::size_t m_;
  TorusIndexer idx_;
};

inline SpacePtr grid_space(std::size_t m, std::size_t n, double budget = 1e6) {
  return std::make_shared<GridSpace>(m, n, budget);
}

// ---------------------------------------------------------------------------
// Finite embeddings and exact distortion
// ---------------------------------------------------------------------------

struct FiniteEmbedding {
  SpacePtr domain;
  SpacePtr codomain;
  std::vector<Point> domain_points;
  std::vector<Point> image_points;

  // Filled by distortion(): largest expansion and contraction ratios over all
  // distinct pairs, and the number of pairs inspected.
  mutable bool cached = false;
  mutable double expansion = 0.0;    // max d_cod / d_dom
  mutable double contraction = 0.0;  // max d_dom / d_cod; +inf if non-injective
  mutable double dist = 1.0;
  mutable std::size_t pairs = 0;
};

inline FiniteEmbedding make_embedding(SpacePtr domain, SpacePtr codomain,
                                      std::vector<Point> domain_points,
                                      std::vector<Point> image_points) {
  if (!domain || !codomain) throw UsageError("embedding: null space");
  if (domain_points.size() != image_points.size()) {
    throw UsageError("embedding: point/image count mismatch");
  }
  if (domain_points.empty()) throw UsageError("embedding: empty mapping table");
  FiniteEmbedding e;
  e.domain = std::move(domain);
  e.codomain = std::move(codomain);
  e.domain_points = std::move(domain_points);
  e.image_points = std::move(image_points);
  return e;
}

// Enumerates every distinct pair once.  An image pair at distance zero under a
// positive domain distance makes the map non-injective: distortion +inf.
inline double distortion(const FiniteEmbedding& e) {
  if (e.cached) return e.dist;
  const std::size_t n = e.domain_points.size();
  double expansion = 0.0, contraction = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dd = e.domain->distance(e.domain_points[i], e.domain_points[j]);
      const double dy = e.codomain->distance(e.image_points[i], e.image_points[j]);
      if (dd <= 0.0) continue;  // duplicate listing of the same domain point
      ++pairs;
      if (dy <= 0.0) {
        contraction = infinity();
        continue;
      }
      expansion = std::max(expansion, dy / dd);
      contraction = std::max(contraction, dd / dy);
    }
  }
  e.expansion = expansion;
  e.contraction = contraction;
  e.pairs = pairs;
  e.dist = (pairs == 0) ? 1.0 : expansion * contraction;
  if (std::isinf(contraction)) e.dist = infinity();
  e.cached = true;
  return e.dist;
}

// ---------------------------------------------------------------------------
// Reference embeddings of the grid
// ---------------------------------------------------------------------------

enum class TrivialKind { Id, Forget };

// Id: grid points kept verbatim as vectors of l_q^n.  Distortion n^{1/q} for
// m >= 2: the expansion is attained on diagonal pairs, the contraction on
// axis pairs.
//
// Forget: grid points sent to the vertices of a scaled regular simplex in
// l_q^{m^n}, all image distances 1 (scale 2^{-1/q} on the standard basis);
// the map is already non-expansive since the grid's least distance is 1.
// Distortion = grid diameter = m - 1.
inline FiniteEmbedding make_trivial_embedding(TrivialKind kind, std::size_t m, std::size_t n,
                                              double q, double budget = 1e6) {
  if (!(q >= 1.0) || std::isinf(q)) throw UsageError("trivial embedding: need finite q >= 1");
  SpacePtr dom = grid_space(m, n, budget);
  const std::size_t size = dom->enumerable_size();
  std::vector<Point> dom_pts(size);
  for (std::size_t i = 0; i < size; ++i) dom_pts[i] = dom->enumerate_point(i);

  std::vector<Point> img(size);
  SpacePtr cod;
  if (kind == TrivialKind::Id) {
    cod = std::make_shared<LpSpace>(n, q);
    for (std::size_t i = 0; i < size; ++i) img[i] = dom_pts[i];
  } else {
    if (static_cast<double>(size) > 4096.0) {
      throw BudgetError("forget embedding: simplex dimension exceeds budget");
    }
    cod = std::make_shared<LpSpace>(size, q);
    const double scale = std::pow(2.0, -1.0 / q);
    for (std::size_t i = 0; i < size; ++i) {
      std::vector<double> v(size, 0.0);
      v[i] = scale;
      img[i] = vec_point(std::move(v));
    }
  }
  return make_embedding(std::move(dom), std::move(cod), std::move(dom_pts), std::move(img));
}

// ---------------------------------------------------------------------------
// The perimeter-walk embedding psi
// ---------------------------------------------------------------------------

// One cycle Z_{2m} embeds into {0,...,m}^2 by walking the boundary of the
// square [0,m]^2 at double speed: position s sits at arc length 2s along the
// path (0,0) -> (m,0) -> (m,m) -> (0,m) -> (0,0).  Under the max metric the
// image distance of two boundary points is between half their arc distance
// and the full arc distance, and the arc distance is exactly twice the cycle
// distance, so every pair satisfies
//     d_cycle(s,t) <= ||psi(s) - psi(t)||_inf <= 2 d_cycle(s,t),
// giving distortion exactly 2 for every m >= 2 (and 1 for m = 1).  The
// product over n cycles inherits the same two-sided bound coordinatewise.
inline std::array<double, 2> psi_cycle_point(std::size_t m, std::size_t s) {
  const double M = static_cast<double>(m);
  const double arc = static_cast<double>(2 * s);  // in [0, 4m)
  if (arc <= M) return {arc, 0.0};
  if (arc <= 2.0 * M) return {M, arc - M};
  if (arc <= 3.0 * M) return {3.0 * M - arc, M};
  return {0.0, 4.0 * M - arc};
}

inline FiniteEmbedding psi_embedding(std::size_t m, std::size_t n, double budget = 2e4) {
  if (m == 0 || n == 0) throw UsageError("psi embedding: m and n must be positive");
  auto dom = std::make_shared<TorusGridSpace>(m, n, budget);
  const std::size_t size = dom->indexer().size();
  std::vector<Point> dom_pts(size), img(size);
  auto cod = std::make_shared<LpSpace>(2 * n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < size; ++i) {
    dom_pts[i] = dom->enumerate_point(i);
    std::vector<double> v(2 * n);
    for (std::size_t ax = 0; ax < n; ++ax) {
      const auto pt = psi_cycle_point(m, dom->indexer().digit(i, ax));
      v[2 * ax] = pt[0];
      v[2 * ax + 1] = pt[1];
    }
    img[i] = vec_point(std::move(v));
  }
  return make_embedding(std::move(dom), std::move(cod), std::move(dom_pts), std::move(img));
}

// Exhaustive single-cycle distortion, usable for every m without budget
// pressure ((2m)^2 pairs).
inline double psi_cycle_distortion(std::size_t m) {
  return distortion(psi_embedding(m, 1));
}

// ---------------------------------------------------------------------------
// Cotype-derived lower bound on grid distortion
// ---------------------------------------------------------------------------

struct GridLowerBound {
  double bound = 0.0;      // n^{1/q} m / (psi_dist (4 n^{1/q} + beta m))
  double asymptote = 0.0;  // min(n^{1/q}, m)
  double limit = 0.0;      // m -> inf limit: n^{1/q} / (psi_dist beta)
};

// Any embedding of [m+1]_inf^n into a q-barycentric target with constant beta
// must have distortion at least `bound`: route the torus through psi into the
// grid and compare the two sides of the cotype inequality.
inline GridLowerBound grid_distortion_lower_bound(std::size_t m, std::size_t n, double q,
                                                  double psi_dist, double beta) {
  if (!(q >= 2.0)) throw UsageError("grid lower bound: q must be >= 2");
  if (!(psi_dist >= 1.0) || !(beta >= 1.0)) {
    throw UsageError("grid lower bound: psi_dist and beta must be >= 1");
  }
  GridLowerBound out;
  const double nq = std::pow(static_cast<double>(n), 1.0 / q);
  const double M = static_cast<double>(m);
  out.bound = nq * M / (psi_dist * (4.0 * nq + beta * M));
  out.asymptote = std::min(nq, M);
  out.limit = nq / (psi_dist * beta);
  return out;
}

// ---------------------------------------------------------------------------
// Critical exponent p_alpha
// ---------------------------------------------------------------------------

struct PAlphaBounds {
  double lower = 2.0;
  double upper = 2.0;
};

// p_alpha of the grid: the infimal p >= 2 such that the grid embeds into l_p
// with distortion < alpha.
//   upper: the identity embedding has distortion n^{1/p}, so any
//          p >= log n / log alpha suffices (clamped to the domain p >= 2);
//   lower: the cotype bound (with beta = 2, psi_dist from the walk) exceeds
//          alpha for small p, and is strictly decreasing in p, so the
//          crossing point bounds p_alpha from below.
inline PAlphaBounds p_alpha_bounds(std::size_t m, std::size_t n, double alpha,
                                   double psi_dist = 2.0, double beta = 2.0) {
  if (!(alpha >= 2.0)) throw UsageError("p_alpha: alpha must be >= 2");
  if (m == 0 || n == 0) throw UsageError("p_alpha: m and n must be positive");
  PAlphaBounds out;
  const double ln_n = std::log(static_cast<double>(n));
  out.upper = std::max(2.0, ln_n / std::log(alpha));

  const auto bound_at = [&](double p) {
    return grid_distortion_lower_bound(m, n, p, psi_dist, beta).bound;
  };
  if (bound_at(2.0) < alpha) {
    out.lower = 2.0;
    return out;
  }
  double lo = 2.0, hi = 4.0;
  while (bound_at(hi) >= alpha) {
    hi *= 2.0;
    if (hi > 1e9) break;  // bound tends below alpha, so this is unreachable
  }
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bound_at(mid) >= alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.lower = 0.5 * (lo + hi);
  return out;
}

// ---------------------------------------------------------------------------
// The obstruction curve
// ---------------------------------------------------------------------------

// f : Z_{2m}^n -> (sum of n Euclidean planes, l_p-combined) with
//   f(x)_j = n^{-1/p} m (cos(pi x_j / m), sin(pi x_j / m)).
// Two exact distance identities drive the coarse-embedding obstruction:
//   d(f(x + m e_j), f(x)) = 2 m n^{-1/p}            (antipodal on the circle)
//   d(f(x + eps), f(x))   = m |e^{i pi/m} - 1| <= pi  for eps in {-1,1}^n.
// The plane-sum target (rather than a flat coordinate space) is what makes
// both identities exact for every p: each coordinate pair moves by the same
// Euclidean chord length.
//
// The curve is kept lazy — values are built per index on demand — so identity
// checks scale to lattices far too large to materialize.
struct ObstructionCurve {
  double p = 3.0;
  TorusIndexer idx;
  SpacePtr target;
  double radius = 0.0;  // n^{-1/p} m

  Point value(std::size_t x) const {
    const double pi = std::acos(-1.0);
    TuplePos tuple;
    tuple.parts.reserve(idx.n);
    for (std::size_t j = 0; j < idx.n; ++j) {
      const double theta =
          pi * static_cast<double>(idx.digit(x, j)) / static_cast<double>(idx.m());
      tuple.parts.push_back(vec_point({radius * std::cos(theta), radius * std::sin(theta)}));
    }
    return Point{std::move(tuple)};
  }
};

inline ObstructionCurve make_obstruction_curve(double p, std::size_t n, std::size_t m) {
  if (!(p >= 1.0) || std::isinf(p)) throw UsageError("obstruction: need finite p >= 1");
  if (n == 0 || m == 0) throw UsageError("obstruction: n and m must be positive");
  ObstructionCurve c;
  c.p = p;
  c.idx = TorusIndexer(n, 2 * m);
  std::vector<SpacePtr> planes;
  planes.reserve(n);
  for (std::size_t j = 0; j < n; ++j) planes.push_back(std::make_shared<LpSpace>(2, 2.0));
  c.target = std::make_shared<LpProductSpace>(std::move(planes), p);
  c.radius = std::pow(static_cast<double>(n), -1.0 / p) * static_cast<double>(m);
  return c;
}

inline TorusFunction build_obstruction_function(double p, std::size_t n, std::size_t m,
                                                double budget = 1e6) {
  ObstructionCurve c = make_obstruction_curve(p, n, m);
  if (static_cast<double>(c.idx.size()) > budget) {
    throw BudgetError("obstruction: (2m)^n exceeds budget");
  }
  std::vector<Point> vals(c.idx.size());
  for (std::size_t x = 0; x < c.idx.size(); ++x) vals[x] = c.value(x);
  TorusIndexer idx = c.idx;
  return TorusFunction(std::move(idx), std::move(c.target), std::move(vals));
}

struct ObstructionReport {
  double p = 3.0;
  std::size_t n = 0, m = 0;
  double shift_identity = 0.0;      // expected d(f(x + m e_j), f(x)) = 2 m n^{-1/p}
  double shift_identity_err = 0.0;  // worst absolute deviation observed
  double step_identity = 0.0;       // expected d(f(x + eps), f(x)) = m |e^{i pi/m} - 1|
  double step_identity_err = 0.0;
  double step_bound = 0.0;          // pi
  bool step_within_pi = false;
  std::size_t checked = 0;          // base points inspected
  bool exhaustive = false;
  bool pass = false;
};

inline ObstructionReport check_obstruction_identities(const ObstructionCurve& curve,
                                                      std::size_t sample_cap = 256,
                                                      std::uint64_t seed = 1) {
  const auto& idx = curve.idx;
  const std::size_t n = idx.n;
  const std::size_t m = idx.m();
  const Space& X = *curve.target;

  ObstructionReport rep;
  rep.p = curve.p;
  rep.n = n;
  rep.m = m;
  const double pi = std::acos(-1.0);
  rep.shift_identity =
      2.0 * static_cast<double>(m) * std::pow(static_cast<double>(n), -1.0 / curve.p);
  rep.step_identity =
      static_cast<double>(m) * std::hypot(std::cos(pi / static_cast<double>(m)) - 1.0,
                                          std::sin(pi / static_cast<double>(m)));
  rep.step_bound = pi;
  rep.step_within_pi = rep.step_identity <= pi + kAbsFloor;

  std::vector<std::size_t> xs;
  if (idx.size() <= sample_cap) {
    rep.exhaustive = true;
    xs.resize(idx.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = i;
  } else {
    SplitRng rng(seed);
    xs.resize(sample_cap);
    for (std::size_t i = 0; i < sample_cap; ++i) xs[i] = rng.split(i).next_below(idx.size());
  }
  const std::size_t eps_cap = (n <= 12) ? (std::size_t{1} << n) : 4096;

  for (const std::size_t x : xs) {
    const Point fx = curve.value(x);
    for (std::size_t j = 0; j < n; ++j) {
      const double d =
          X.distance(curve.value(idx.shift(x, j, static_cast<long long>(m))), fx);
      rep.shift_identity_err = std::max(rep.shift_identity_err, std::abs(d - rep.shift_identity));
    }
    for (std::size_t e = 0; e < eps_cap; ++e) {
      const std::uint32_t mask =
          (n <= 12) ? static_cast<std::uint32_t>(e)
                    : static_cast<std::uint32_t>(SplitRng(seed ^ x).split(e).next_u64());
      const double d = X.distance(curve.value(idx.shift_signs(x, mask)), fx);
      rep.step_identity_err = std::max(rep.step_identity_err, std::abs(d - rep.step_identity));
    }
  }
  rep.checked = xs.size();
  const double tol = std::max(kAbsFloor, kRelTol * std::max(1.0, rep.shift_identity));
  rep.pass = rep.shift_identity_err <= tol && rep.step_identity_err <= tol && rep.step_within_pi;
  return rep;
}

// ---------------------------------------------------------------------------
// Coarse moduli envelopes
// ---------------------------------------------------------------------------

struct ModuliEnvelope {
  // Breakpoints are the sorted distinct realized domain distances.  omega[k]
  // is the least image distance among pairs at domain distance >= t[k];
  // Omega[k] the greatest among pairs at domain distance <= t[k].  Both are
  // nondecreasing in k and omega <= Omega pointwise.
  std::vector<double> t;
  std::vector<double> omega;
  std::vector<double> Omega;

  double omega_at(double s) const {  // min image distance over d_dom >= s
    const auto it = std::lower_bound(t.begin(), t.end(), s);
    if (it == t.end()) return infinity();
    return omega[static_cast<std::size_t>(it - t.begin())];
  }
  double Omega_at(double s) const {  // max image distance over d_dom <= s
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    if (it == t.begin()) return 0.0;
    return Omega[static_cast<std::size_t>(it - t.begin()) - 1];
  }
};

inline ModuliEnvelope moduli_envelope(const FiniteEmbedding& e) {
  const std::size_t n = e.domain_points.size();
  std::vector<std::pair<double, double>> pairs;  // (domain distance, image distance)
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dd = e.domain->distance(e.domain_points[i], e.domain_points[j]);
      if (dd <= 0.0) continue;
      pairs.emplace_back(dd, e.codomain->distance(e.image_points[i], e.image_points[j]));
    }
  }
  std::sort(pairs.begin(), pairs.end());

  ModuliEnvelope env;
  if (pairs.empty()) return env;
  // Collapse equal breakpoints, then prefix-max / suffix-min over the groups.
  std::vector<double> group_min, group_max;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    double mn = infinity(), mx = 0.0;
    while (j < pairs.size() && pairs[j].first == pairs[i].first) {
      mn = std::min(mn, pairs[j].second);
      mx = std::max(mx, pairs[j].second);
      ++j;
    }
    env.t.push_back(pairs[i].first);
    group_min.push_back(mn);
    group_max.push_back(mx);
    i = j;
  }
  const std::size_t k = env.t.size();
  env.omega.assign(k, 0.0);
  env.Omega.assign(k, 0.0);
  double run = infinity();
  for (std::size_t i = k; i-- > 0;) {
    run = std::min(run, group_min[i]);
    env.omega[i] = run;
  }
  run = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    run = std::max(run, group_max[i]);
    env.Omega[i] = run;
  }
  return env;
}

struct ObstructionCertificate {
  double q = 2.0, p = 3.0, gamma = 1.0, c = 1.0;
  std::size_t n = 0, m = 0;
  double t_small = 0.0;    // 2 n^{1/q - 1/p} / gamma
  double omega_val = 0.0;  // hat-omega(t_small)
  double cap = 0.0;        // c * hat-Omega(pi)
  bool holds = false;      // omega_val <= cap: the coarse-embedding constraint
};

// Quantitative form of the coarse obstruction: a coarse embedding with moduli
// (omega, Omega) of the torus carrying the obstruction curve must satisfy
// omega(2 Gamma^{-1} n^{1/q-1/p}) <= C Omega(pi) whenever m <= C n^{1/q}.
// When the left side grows with n (q < p) this eventually fails, so the
// certificate `holds` flag flips to false at large n for genuinely
// obstructed targets.
inline ObstructionCertificate obstruction_certificate(const ModuliEnvelope& env, std::size_t n,
                                                      std::size_t m, double q, double p,
                                                      double gamma, double c = 1.0) {
  if (!(gamma > 0.0) || !(c > 0.0)) throw UsageError("certificate: gamma and c must be positive");
  ObstructionCertificate cert;
  cert.q = q;
  cert.p = p;
  cert.gamma = gamma;
  cert.c = c;
  cert.n = n;
  cert.m = m;
  cert.t_small =
      2.0 / gamma * std::pow(static_cast<double>(n), 1.0 / q - 1.0 / p);
  cert.omega_val = env.omega_at(cert.t_small);
  cert.cap = c * env.Omega_at(std::acos(-1.0));
  cert.holds = cert.omega_val <= cert.cap + kAbsFloor;
  return cert;
}

}  // namespace cotype
