#pragma once

// Structural checks on a metric backend: the metric axioms themselves and the
// quadruple comparison that certifies nonpositive curvature on a sample.

#include <cstddef>
#include <string>
#include <vector>

#include "cotype/numeric.hpp"
#include "cotype/point.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"

namespace cotype {

struct AxiomReport {
  std::size_t points = 0;
  std::size_t triples = 0;
  bool exhaustive = false;
  double max_self_distance = 0.0;        // max d(x, x)
  double max_asymmetry = 0.0;            // max |d(x,y) - d(y,x)|
  double worst_triangle_slack = 0.0;     // max d(x,z) - d(x,y) - d(y,z); <= 0 is good
  double min_offdiag_distance = 0.0;     // smallest distance between distinct samples
  std::size_t triangle_witness[3] = {0, 0, 0};
  bool pass = false;
};

// Checks symmetry, vanishing self-distance, and the triangle inequality over
// either the full point set (enumerable backends up to `exhaustive_cap`) or a
// seeded random sample.
inline AxiomReport verify_metric_axioms(const Space& space, std::size_t samples,
                                        std::uint64_t seed,
                                        std::size_t exhaustive_cap = 64) {
  AxiomReport rep;
  std::vector<Point> pts;
  const std::size_t n = space.enumerable_size();
  if (n > 0 && n <= exhaustive_cap) {
    rep.exhaustive = true;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(space.enumerate_point(i));
  } else {
    SplitRng rng(seed);
    for (std::size_t i = 0; i < samples; ++i) {
      SplitRng child = rng.split(i);
      pts.push_back(space.sample_point(child));
    }
  }
  rep.points = pts.size();

  const std::size_t m = pts.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  double scale = 0.0;
  rep.min_offdiag_distance = infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      d[i][j] = space.distance(pts[i], pts[j]);
      scale = std::max(scale, d[i][j]);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    rep.max_self_distance = std::max(rep.max_self_distance, std::abs(d[i][i]));
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) {
        rep.max_asymmetry = std::max(rep.max_asymmetry, std::abs(d[i][j] - d[j][i]));
        if (!(pts[i] == pts[j])) {
          rep.min_offdiag_distance = std::min(rep.min_offdiag_distance, d[i][j]);
        }
      }
    }
  }
  rep.worst_triangle_slack = -infinity();
  rep.triples = m * m * m;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const double slack = d[i][k] - d[i][j] - d[j][k];
        if (slack > rep.worst_triangle_slack) {
          rep.worst_triangle_slack = slack;
          rep.triangle_witness[0] = i;
          rep.triangle_witness[1] = j;
          rep.triangle_witness[2] = k;
        }
      }
    }
  }
  if (m == 0) rep.worst_triangle_slack = 0.0;
  const double tol = std::max(kAbsFloor, kRelTol * scale);
  rep.pass = rep.max_self_distance <= tol && rep.max_asymmetry <= tol &&
             rep.worst_triangle_slack <= tol;
  return rep;
}

struct QuadrupleReport {
  double slack = 0.0;  // <= 0 certifies the nonpositive-curvature comparison
  Point midpoint;
  double d_xy = 0.0, d_zx = 0.0, d_zy = 0.0, d_zw = 0.0;
};

// Nonpositive-curvature quadruple comparison: with w the metric midpoint of
// x and y,
//   slack = d(z,w)^2 + d(x,y)^2/4 - d(z,x)^2/2 - d(z,y)^2/2.
// Euclidean targets give slack = 0 (parallelogram identity); metric trees
// give slack <= 0.
inline QuadrupleReport cat0_quadruple_check(const Space& space, const Point& x, const Point& y,
                                            const Point& z) {
  QuadrupleReport rep;
  rep.midpoint = space.midpoint(x, y);
  rep.d_xy = space.distance(x, y);
  rep.d_zx = space.distance(z, x);
  rep.d_zy = space.distance(z, y);
  rep.d_zw = space.distance(z, rep.midpoint);
  rep.slack = rep.d_zw * rep.d_zw + 0.25 * rep.d_xy * rep.d_xy -
              0.5 * rep.d_zx * rep.d_zx - 0.5 * rep.d_zy * rep.d_zy;
  return rep;
}

}  // namespace cotype
