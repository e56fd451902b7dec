#pragma once

// Finitely supported probability measures and barycenter strategies.
//
// A barycenter map B assigns a point to each measure.  The q-barycentric
// contract with constant beta >= 1 is, for every measure mu and point x,
//   d(B(mu), x)^q + beta^{-q} * Int d(B(mu), y)^q dmu(y) <= Int d(x, y)^q dmu(y),
// with B(delta_x) = x exactly.  check_barycentric_inequality evaluates the
// slack of one instance; estimate_beta searches for the smallest beta a
// strategy appears to satisfy.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/numeric.hpp"
#include "cotype/point.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"

namespace cotype {

struct WeightedAtom {
  Point point;
  double weight = 0.0;
};

class Measure {
 public:
  Measure() = default;

  // Normalizes weights to total mass 1 and merges exactly equal atoms.
  static Measure normalized(std::vector<WeightedAtom> atoms) {
    if (atoms.empty()) throw UsageError("measure: empty support");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.weight > 0.0)) throw UsageError("measure: weights must be positive");
      total += a.weight;
    }
    Measure m;
    for (auto& a : atoms) {
      bool merged = false;
      for (auto& existing : m.atoms_) {
        if (existing.point == a.point) {
          existing.weight += a.weight / total;
          merged = true;
          break;
        }
      }
      if (!merged) m.atoms_.push_back({std::move(a.point), a.weight / total});
    }
    return m;
  }

  static Measure dirac(Point x) { return normalized({{std::move(x), 1.0}}); }

  static Measure two_point(Point a, Point b, double wa = 0.5) {
    return normalized({{std::move(a), wa}, {std::move(b), 1.0 - wa}});
  }

  const std::vector<WeightedAtom>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }

  double total_mass() const {
    KahanSum s;
    for (const auto& a : atoms_) s.add(a.weight);
    return s.value();
  }

  // Int d(x, y)^q dmu(y).
  double moment(const Space& space, const Point& x, double q) const {
    KahanSum s;
    for (const auto& a : atoms_) s.add(a.weight * qpow(space.distance(x, a.point), q));
    return s.value();
  }

 private:
  std::vector<WeightedAtom> atoms_;
};

// ---------------------------------------------------------------------------
// Barycenter strategies
// ---------------------------------------------------------------------------

enum class BarycenterStrategy {
  LinearMean,    // weighted coordinate mean; coordinate backends only
  FrechetQMean,  // argmin sum w d(., y)^q per backend structure
  TreeMean2,     // tree descent walk with exponent 2
};

struct BarycenterMap {
  BarycenterStrategy strategy = BarycenterStrategy::LinearMean;
  double q = 2.0;  // exponent used by FrechetQMean / TreeMean2

  static BarycenterMap linear() { return {BarycenterStrategy::LinearMean, 2.0}; }
  static BarycenterMap frechet(double q) { return {BarycenterStrategy::FrechetQMean, q}; }
  static BarycenterMap tree_mean2() { return {BarycenterStrategy::TreeMean2, 2.0}; }

  // Matching strategy for a backend: linear mean where coordinates exist,
  // the exact tree walk on trees (q = 2), Frechet q-mean elsewhere.
  static BarycenterMap canonical(const Space& space, double q) {
    if (space.coordinate()) return linear();
    if (space.kind() == "tree" && q == 2.0) return tree_mean2();
    return frechet(q);
  }

  std::string name() const {
    switch (strategy) {
      case BarycenterStrategy::LinearMean:
        return "LinearMean";
      case BarycenterStrategy::FrechetQMean:
        return "FrechetQMean(q=" + std::to_string(q) + ")";
      case BarycenterStrategy::TreeMean2:
        return "TreeMean2";
    }
    return "?";
  }
};

inline Point barycenter(const Space& space, const BarycenterMap& map, const Measure& mu) {
  const auto& atoms = mu.atoms();
  if (atoms.empty()) throw UsageError("barycenter: empty measure");
  // Point masses map to their atom verbatim, for every strategy.
  if (atoms.size() == 1) return atoms[0].point;

  std::vector<Point> pts;
  std::vector<double> w;
  pts.reserve(atoms.size());
  w.reserve(atoms.size());
  for (const auto& a : atoms) {
    pts.push_back(a.point);
    w.push_back(a.weight);
  }

  switch (map.strategy) {
    case BarycenterStrategy::LinearMean:
      if (!space.coordinate()) {
        throw UnsupportedError("LinearMean requires a coordinate backend, got '" +
                               space.kind() + "'");
      }
      return space.linear_mean(pts, w);
    case BarycenterStrategy::FrechetQMean:
      return space.weighted_qmean(pts, w, map.q);
    case BarycenterStrategy::TreeMean2:
      if (space.kind() != "tree") {
        throw UnsupportedError("TreeMean2 requires a tree backend, got '" + space.kind() + "'");
      }
      return space.weighted_qmean(pts, w, 2.0);
  }
  throw std::logic_error("barycenter: unknown strategy");
}

// ---------------------------------------------------------------------------
// Conditional barycenters over a finite sample space
// ---------------------------------------------------------------------------

struct Partition {
  // blocks[b] lists the indices of the base set belonging to block b.
  std::vector<std::vector<std::size_t>> blocks;

  static Partition trivial(std::size_t n) {
    Partition p;
    p.blocks.emplace_back();
    for (std::size_t i = 0; i < n; ++i) p.blocks[0].push_back(i);
    return p;
  }

  static Partition singletons(std::size_t n) {
    Partition p;
    for (std::size_t i = 0; i < n; ++i) p.blocks.push_back({i});
    return p;
  }

  void validate(std::size_t n) const {
    std::vector<char> seen(n, 0);
    for (const auto& blk : blocks) {
      if (blk.empty()) throw UsageError("partition: empty block");
      for (const std::size_t i : blk) {
        if (i >= n) throw UsageError("partition: index out of range");
        if (seen[i]) throw UsageError("partition: index appears in two blocks");
        seen[i] = 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) throw UsageError("partition: index " + std::to_string(i) + " uncovered");
    }
  }
};

// Blockwise barycenter of Z : Omega -> space under weights mu on Omega.  The
// result assigns to every element of Omega the barycenter of Z restricted to
// its block (so the trivial partition yields the global barycenter at every
// index, and the singleton partition returns Z itself).
inline std::vector<Point> conditional_barycenter(const Space& space, const BarycenterMap& map,
                                                 const std::vector<double>& mu,
                                                 const std::vector<Point>& z,
                                                 const Partition& partition) {
  if (mu.size() != z.size()) throw UsageError("conditional barycenter: size mismatch");
  partition.validate(z.size());
  std::vector<Point> out(z.size());
  for (const auto& blk : partition.blocks) {
    std::vector<WeightedAtom> atoms;
    atoms.reserve(blk.size());
    for (const std::size_t i : blk) {
      if (!(mu[i] > 0.0)) throw UsageError("conditional barycenter: weights must be positive");
      atoms.push_back({z[i], mu[i]});
    }
    const Point b = barycenter(space, map, Measure::normalized(std::move(atoms)));
    for (const std::size_t i : blk) out[i] = b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The q-barycentric inequality
// ---------------------------------------------------------------------------

struct BarycentricSlack {
  Point b;
  double lhs_dist_q = 0.0;   // d(B, x)^q
  double lhs_moment = 0.0;   // beta^{-q} * Int d(B, y)^q dmu
  double rhs_moment = 0.0;   // Int d(x, y)^q dmu
  double slack = 0.0;        // rhs - lhs; >= 0 when the contract holds
};

inline BarycentricSlack check_barycentric_inequality(const Space& space,
                                                     const BarycenterMap& map,
                                                     const Measure& mu, const Point& x,
                                                     double q, double beta) {
  if (!(q >= 1.0)) throw UsageError("barycentric inequality: q must be >= 1");
  if (!(beta >= 1.0)) throw UsageError("barycentric inequality: beta must be >= 1");
  BarycentricSlack out;
  out.b = barycenter(space, map, mu);
  out.lhs_dist_q = qpow(space.distance(out.b, x), q);
  out.lhs_moment = std::pow(beta, -q) * mu.moment(space, out.b, q);
  out.rhs_moment = mu.moment(space, x, q);
  out.slack = out.rhs_moment - out.lhs_dist_q - out.lhs_moment;
  return out;
}

// ---------------------------------------------------------------------------
// Estimating the barycentric constant of a strategy
// ---------------------------------------------------------------------------

struct BetaEstimate {
  double q = 2.0;
  double beta_hat = 0.0;     // sup over samples of (num/den)^{1/q}; may be +inf
  std::size_t samples = 0;
  std::size_t used = 0;      // samples with informative denominator
  std::size_t skipped = 0;   // degenerate 0/0 samples
  bool infinite = false;
  std::uint64_t witness_sample = 0;  // sample index attaining the supremum
  double witness_num = 0.0;
  double witness_den = 0.0;
};

// For random (mu, x) pairs, the inequality pins beta^q >= num/den with
//   num = Int d(B, y)^q dmu   and   den = Int d(x, y)^q dmu - d(B, x)^q.
// Samples whose denominator is too small to divide reliably carry no
// information about beta and are skipped; a strictly negative denominator or
// a vanishing denominator against a positive numerator certifies that no
// finite beta works (reported as +inf, never masked).
inline BetaEstimate estimate_beta(const Space& space, const BarycenterMap& map, double q,
                                  std::size_t samples, std::uint64_t seed,
                                  std::size_t max_support = 4) {
  if (!(q >= 1.0)) throw UsageError("estimate_beta: q must be >= 1");
  if (samples == 0) throw UsageError("estimate_beta: need at least one sample");
  BetaEstimate est;
  est.q = q;
  est.samples = samples;
  double best_ratio_q = 0.0;

  SplitRng root(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    SplitRng rng = root.split(s);
    const std::size_t k = 1 + rng.next_below(max_support);
    std::vector<WeightedAtom> atoms;
    atoms.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      SplitRng prng = rng.split(1000 + i);
      atoms.push_back({space.sample_point(prng), rng.next_unit_pos()});
    }
    const Measure mu = Measure::normalized(std::move(atoms));
    SplitRng xrng = rng.split(999);
    const Point x = space.sample_point(xrng);

    const Point b = barycenter(space, map, mu);
    const double num = mu.moment(space, b, q);
    const double lead = mu.moment(space, x, q);
    const double den = lead - qpow(space.distance(b, x), q);

    // Informative-denominator floor: below it, division noise (barycenters
    // located iteratively to ~1e-12) would dominate the ratio.
    const double den_floor = 1e-6 * std::max(1.0, lead);
    if (den < -mixed_tol(lead, den)) {
      est.infinite = true;
      est.witness_sample = s;
      est.witness_num = num;
      est.witness_den = den;
      break;
    }
    if (den <= den_floor) {
      if (num > std::max(den_floor, mixed_tol(num, lead))) {
        est.infinite = true;
        est.witness_sample = s;
        est.witness_num = num;
        est.witness_den = den;
        break;
      }
      ++est.skipped;
      continue;
    }
    ++est.used;
    const double ratio_q = std::max(0.0, num) / den;
    if (ratio_q > best_ratio_q) {
      best_ratio_q = ratio_q;
      est.witness_sample = s;
      est.witness_num = num;
      est.witness_den = den;
    }
  }
  est.beta_hat = est.infinite ? infinity() : qroot(best_ratio_q, q);
  return est;
}

// ---------------------------------------------------------------------------
// Two-point diagnostics
// ---------------------------------------------------------------------------

// For the uniform two-point measure mu = (delta_a + delta_b)/2 and a strategy
// whose barycenter lands at the metric midpoint (LinearMean, TreeMean2),
// d(B, a)^q <= d(a,b)^q / 2 must hold for q > 1.  Returns the slack
// d(a,b)^q/2 - max(d(B,a)^q, d(B,b)^q); nonnegative means pass.
inline double two_point_bound_slack(const Space& space, const BarycenterMap& map,
                                    const Point& a, const Point& b, double q) {
  const Point bc = barycenter(space, map, Measure::two_point(a, b));
  const double worst =
      std::max(qpow(space.distance(bc, a), q), qpow(space.distance(bc, b), q));
  return 0.5 * qpow(space.distance(a, b), q) - worst;
}

// Scalar profile of the symmetric two-point inequality on the real line with
// atoms at -1 and +1 and reference point 1 + s:
//   gap(s) = (1+s)^q + (1-s)^q - 2 - 2 s^q / beta^q.
// Nonnegative for all s in [0, 1] iff the two-point case of the contract
// holds at this (q, beta); q = 2, beta = 1 gives the identically zero profile.
inline double symmetric_two_point_gap(double s, double q, double beta) {
  return qpow(1.0 + s, q) + qpow(std::abs(1.0 - s), q) - 2.0 -
         2.0 * qpow(s, q) / qpow(beta, q);
}

struct GapScan {
  double min_gap = 0.0;
  double argmin = 0.0;
  double max_abs_gap = 0.0;
  std::size_t steps = 0;
};

inline GapScan scan_symmetric_two_point_gap(double q, double beta, double lo, double hi,
                                            double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("gap scan: bad range");
  GapScan out;
  out.min_gap = infinity();
  for (double s = lo; s <= hi + 0.5 * step; s += step) {
    const double g = symmetric_two_point_gap(s, q, beta);
    ++out.steps;
    if (g < out.min_gap) {
      out.min_gap = g;
      out.argmin = s;
    }
    out.max_abs_gap = std::max(out.max_abs_gap, std::abs(g));
  }
  return out;
}

}  // namespace cotype
