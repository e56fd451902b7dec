#pragma once

// Metric space backends.  A Space computes distances between Points and,
// where the geometry supports it, midpoints, linear means, and Frechet
// q-means.  All backends are immutable after construction and safe to share
// across threads.
//
//   LpSpace              R^d with the l_p norm, p in [1, inf]
//   FiniteSpace          explicit N x N distance matrix (validated)
//   TreeSpace            weighted metric tree, points may sit inside edges
//   SnowflakeSpace       d(x,y)^theta of a base space, theta in (0, 1]
//   DisjointUnionSpace   clusters glued at cross-distance max(diam_i, diam_j)
//   LpProductSpace       p-combination of component spaces
//   PythagoreanProductSpace  the p = 2 case, kept as its own named kind
//   WassersteinSpace     probability measures over a finite base space under
//                        optimal-transport cost d^p

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/numeric.hpp"
#include "cotype/point.hpp"
#include "cotype/rng.hpp"
#include "cotype/transport.hpp"

namespace cotype {

class Space;
using SpacePtr = std::shared_ptr<const Space>;

class Space {
 public:
  virtual ~Space() = default;

  virtual std::string kind() const = 0;
  virtual std::string describe() const = 0;
  virtual double distance(const Point& a, const Point& b) const = 0;

  // Geodesic backends provide exact metric midpoints.
  virtual bool geodesic() const { return false; }
  virtual Point midpoint(const Point&, const Point&) const {
    throw UnsupportedError("midpoint: not available on backend '" + kind() + "'");
  }

  // Coordinate backends support the weighted linear mean.
  virtual bool coordinate() const { return false; }
  virtual Point linear_mean(const std::vector<Point>&, const std::vector<double>&) const {
    throw UnsupportedError("linear mean: backend '" + kind() + "' has no linear structure");
  }

  // Weighted Frechet q-mean: argmin_x sum_k w_k d(x, y_k)^q.  The base
  // implementation restricts the search to the support atoms themselves
  // (first minimizer in input order wins), which is the honest fallback on
  // backends with no continuous minimization structure.
  virtual Point weighted_qmean(const std::vector<Point>& pts, const std::vector<double>& w,
                               double q) const {
    if (pts.empty()) throw UsageError("weighted_qmean: empty support");
    std::size_t best = 0;
    double best_val = infinity();
    for (std::size_t c = 0; c < pts.size(); ++c) {
      KahanSum obj;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        obj.add(w[k] * qpow(distance(pts[c], pts[k]), q));
      }
      const double val = obj.value();
      if (val < best_val) {
        best_val = val;
        best = c;
      }
    }
    return pts[best];
  }

  virtual Point sample_point(SplitRng& rng) const = 0;

  // Largest distance between any two points, when finite and computable.
  virtual std::optional<double> diameter() const { return std::nullopt; }

  // Exhaustively enumerable backends report their point count.
  virtual std::size_t enumerable_size() const { return 0; }
  virtual Point enumerate_point(std::size_t) const {
    throw UnsupportedError("enumerate_point: backend '" + kind() + "' is not enumerable");
  }
};

namespace detail {

inline const RealVec& as_vec(const Point& p, std::size_t dim, const char* who) {
  const RealVec* v = p.get_if<RealVec>();
  if (!v) throw UsageError(std::string(who) + ": point is not a coordinate vector");
  if (v->x.size() != dim) {
    throw UsageError(std::string(who) + ": expected dimension " + std::to_string(dim) +
                     ", got " + std::to_string(v->x.size()));
  }
  return *v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// l_p spaces
// ---------------------------------------------------------------------------

class LpSpace final : public Space {
 public:
  LpSpace(std::size_t dim, double p) : dim_(dim), p_(p) {
    if (dim == 0) throw UsageError("l_p space: dimension must be positive");
    if (!(p >= 1.0)) throw UsageError("l_p space: p must lie in [1, inf]");
  }

  std::size_t dim() const { return dim_; }
  double p() const { return p_; }

  std::string kind() const override { return "lp"; }
  std::string describe() const override {
    std::ostringstream os;
    if (std::isinf(p_)) {
      os << "linf:" << dim_;
    } else {
      os << 'l' << p_ << ':' << dim_;
    }
    return os.str();
  }

  double norm(const std::vector<double>& d) const {
    if (std::isinf(p_)) {
      double m = 0.0;
      for (double v : d) m = std::max(m, std::abs(v));
      return m;
    }
    if (p_ == 2.0) {
      double s = 0.0;
      for (double v : d) s += v * v;
      return std::sqrt(s);
    }
    if (p_ == 1.0) {
      double s = 0.0;
      for (double v : d) s += std::abs(v);
      return s;
    }
    double s = 0.0;
    for (double v : d) s += std::pow(std::abs(v), p_);
    return std::pow(s, 1.0 / p_);
  }

  double distance(const Point& a, const Point& b) const override {
    const RealVec& va = detail::as_vec(a, dim_, "lp distance");
    const RealVec& vb = detail::as_vec(b, dim_, "lp distance");
    std::vector<double> d(dim_);
    for (std::size_t c = 0; c < dim_; ++c) d[c] = va.x[c] - vb.x[c];
    return norm(d);
  }

  bool geodesic() const override { return !std::isinf(p_); }

  Point midpoint(const Point& a, const Point& b) const override {
    if (std::isinf(p_)) return Space::midpoint(a, b);
    const RealVec& va = detail::as_vec(a, dim_, "lp midpoint");
    const RealVec& vb = detail::as_vec(b, dim_, "lp midpoint");
    std::vector<double> m(dim_);
    for (std::size_t c = 0; c < dim_; ++c) m[c] = 0.5 * (va.x[c] + vb.x[c]);
    return vec_point(std::move(m));
  }

  bool coordinate() const override { return true; }

  Point linear_mean(const std::vector<Point>& pts, const std::vector<double>& w) const override {
    std::vector<double> m(dim_, 0.0);
    for (std::size_t c = 0; c < dim_; ++c) {
      KahanSum s;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        s.add(w[k] * detail::as_vec(pts[k], dim_, "linear mean").x[c]);
      }
      m[c] = s.value();
    }
    return vec_point(std::move(m));
  }

  // Coordinate-separable q-mean: minimizes sum_k w_k |t - y_k|^q per
  // coordinate.  Exact Frechet mean of the l_p metric only when q == p
  // (q = 2 = p recovers the linear mean); otherwise a documented surrogate.
  Point weighted_qmean(const std::vector<Point>& pts, const std::vector<double>& w,
                       double q) const override {
    if (pts.empty()) throw UsageError("weighted_qmean: empty support");
    std::vector<double> m(dim_);
    std::vector<std::pair<double, double>> col(pts.size());
    for (std::size_t c = 0; c < dim_; ++c) {
      for (std::size_t k = 0; k < pts.size(); ++k) {
        col[k] = {detail::as_vec(pts[k], dim_, "weighted_qmean").x[c], w[k]};
      }
      m[c] = (q == 1.0) ? lower_weighted_median(col) : ternary_min(col, q);
    }
    return vec_point(std::move(m));
  }

  Point sample_point(SplitRng& rng) const override {
    std::vector<double> x(dim_);
    for (double& v : x) v = rng.next_normal();
    return vec_point(std::move(x));
  }

  // Smallest value whose cumulative weight reaches half the total mass.
  static double lower_weighted_median(std::vector<std::pair<double, double>> vals) {
    std::sort(vals.begin(), vals.end());
    double total = 0.0;
    for (const auto& [v, wt] : vals) total += wt;
    double cum = 0.0;
    for (const auto& [v, wt] : vals) {
      cum += wt;
      if (cum >= 0.5 * total) return v;
    }
    return vals.back().first;
  }

  static double ternary_min(const std::vector<std::pair<double, double>>& vals, double q) {
    double lo = vals[0].first, hi = vals[0].first;
    for (const auto& [v, wt] : vals) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    auto obj = [&](double t) {
      KahanSum s;
      for (const auto& [v, wt] : vals) s.add(wt * qpow(std::abs(t - v), q));
      return s.value();
    };
    int guard = 0;
    while (hi - lo > 1e-12 && guard++ < 500) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (obj(m1) <= obj(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    return 0.5 * (lo + hi);
  }

 private:
  std::size_t dim_;
  double p_;
};

// ---------------------------------------------------------------------------
// Finite spaces (explicit distance matrix)
// ---------------------------------------------------------------------------

class FiniteSpace final : public Space {
 public:
  explicit FiniteSpace(std::vector<std::vector<double>> matrix) : d_(std::move(matrix)) {
    const std::size_t n = d_.size();
    if (n == 0) throw UsageError("finite space: empty matrix");
    for (std::size_t i = 0; i < n; ++i) {
      if (d_[i].size() != n) throw UsageError("finite space: matrix is not square");
      if (std::abs(d_[i][i]) > 0.0) {
        throw UsageError("finite space: nonzero diagonal at index " + std::to_string(i));
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!(d_[i][j] >= 0.0)) {
          throw UsageError("finite space: negative or NaN entry at (" + std::to_string(i) +
                           "," + std::to_string(j) + ")");
        }
        if (i != j && d_[i][j] == 0.0) {
          throw UsageError("finite space: distinct points " + std::to_string(i) + "," +
                           std::to_string(j) + " at distance zero");
        }
        if (!approx_eq(d_[i][j], d_[j][i])) {
          throw UsageError("finite space: asymmetric entries at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
        }
        diam_ = std::max(diam_, d_[i][j]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if (d_[i][k] > d_[i][j] + d_[j][k] + mixed_tol(d_[i][k], d_[i][j] + d_[j][k])) {
            throw UsageError("finite space: triangle inequality fails on triple (" +
                             std::to_string(i) + "," + std::to_string(j) + "," +
                             std::to_string(k) + "): " + std::to_string(d_[i][k]) + " > " +
                             std::to_string(d_[i][j]) + " + " + std::to_string(d_[j][k]));
          }
        }
      }
    }
  }

  std::size_t size() const { return d_.size(); }
  const std::vector<std::vector<double>>& matrix() const { return d_; }

  std::string kind() const override { return "finite"; }
  std::string describe() const override { return "finite:" + std::to_string(d_.size()); }

  std::size_t index_of(const Point& p, const char* who) const {
    const FiniteIndex* fi = p.get_if<FiniteIndex>();
    if (!fi) throw UsageError(std::string(who) + ": point is not a finite-space index");
    if (fi->i >= d_.size()) {
      throw UsageError(std::string(who) + ": index " + std::to_string(fi->i) +
                       " out of range (size " + std::to_string(d_.size()) + ")");
    }
    return fi->i;
  }

  double distance(const Point& a, const Point& b) const override {
    return d_[index_of(a, "finite distance")][index_of(b, "finite distance")];
  }

  // Argmin restricted to the support atoms; lowest index wins ties.
  Point weighted_qmean(const std::vector<Point>& pts, const std::vector<double>& w,
                       double q) const override {
    if (pts.empty()) throw UsageError("weighted_qmean: empty support");
    std::vector<std::size_t> cand;
    cand.reserve(pts.size());
    for (const Point& p : pts) cand.push_back(index_of(p, "weighted_qmean"));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t best = cand[0];
    double best_val = infinity();
    for (const std::size_t c : cand) {
      KahanSum obj;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        obj.add(w[k] * qpow(d_[c][index_of(pts[k], "weighted_qmean")], q));
      }
      const double val = obj.value();
      if (val < best_val) {
        best_val = val;
        best = c;
      }
    }
    return index_point(best);
  }

  Point sample_point(SplitRng& rng) const override {
    return index_point(rng.next_below(d_.size()));
  }

  std::optional<double> diameter() const override { return diam_; }
  std::size_t enumerable_size() const override { return d_.size(); }
  Point enumerate_point(std::size_t i) const override {
    if (i >= d_.size()) throw UsageError("enumerate_point: index out of range");
    return index_point(i);
  }

 private:
  std::vector<std::vector<double>> d_;
  double diam_ = 0.0;
};

// ---------------------------------------------------------------------------
// Weighted metric trees
// ---------------------------------------------------------------------------

struct TreeEdge {
  std::size_t u = 0, v = 0;
  double length = 0.0;
};

class TreeSpace final : public Space {
 public:
  TreeSpace(std::size_t vertex_count, std::vector<TreeEdge> edges,
            std::vector<std::string> names = {})
      : edges_(std::move(edges)), names_(std::move(names)) {
    const std::size_t V = vertex_count;
    if (V < 2) throw UsageError("tree space: need at least two vertices");
    if (edges_.size() != V - 1) {
      throw UsageError("tree space: " + std::to_string(V) + " vertices require " +
                       std::to_string(V - 1) + " edges, got " + std::to_string(edges_.size()));
    }
    adj_.assign(V, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const TreeEdge& ed = edges_[e];
      if (ed.u >= V || ed.v >= V || ed.u == ed.v) {
        throw UsageError("tree space: bad edge endpoints at edge " + std::to_string(e));
      }
      if (!(ed.length > 0.0)) {
        throw UsageError("tree space: edge " + std::to_string(e) + " has nonpositive length");
      }
      adj_[ed.u].push_back(e);
      adj_[ed.v].push_back(e);
    }

    // Vertex-to-vertex distances and first hops, via one DFS per root.
    dist_.assign(V, std::vector<double>(V, -1.0));
    hop_.assign(V, std::vector<std::size_t>(V, V));
    std::vector<std::size_t> stack;
    for (std::size_t r = 0; r < V; ++r) {
      dist_[r][r] = 0.0;
      hop_[r][r] = r;
      stack.assign(1, r);
      while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        for (const std::size_t e : adj_[x]) {
          const std::size_t y = other_end(e, x);
          if (dist_[r][y] >= 0.0) continue;
          dist_[r][y] = dist_[r][x] + edges_[e].length;
          hop_[r][y] = (x == r) ? y : hop_[r][x];
          stack.push_back(y);
        }
      }
      for (std::size_t y = 0; y < V; ++y) {
        if (dist_[r][y] < 0.0) throw UsageError("tree space: graph is not connected");
        diam_ = std::max(diam_, dist_[r][y]);
      }
    }

    // Canonical vertex representation: lowest-index incident edge.
    canon_.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
      const std::size_t e = *std::min_element(adj_[v].begin(), adj_[v].end());
      canon_[v] = TreePos{e, edges_[e].u == v ? 0.0 : edges_[e].length};
    }
    total_length_ = 0.0;
    for (const TreeEdge& e : edges_) total_length_ += e.length;
  }

  std::size_t vertex_count() const { return adj_.size(); }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const std::vector<std::string>& names() const { return names_; }

  std::string kind() const override { return "tree"; }
  std::string describe() const override {
    return "tree:" + std::to_string(adj_.size()) + "v";
  }

  Point vertex_point(std::size_t v) const {
    if (v >= adj_.size()) throw UsageError("tree space: vertex index out of range");
    return Point(canon_[v]);
  }

  TreePos checked(const Point& p, const char* who) const {
    const TreePos* tp = p.get_if<TreePos>();
    if (!tp) throw UsageError(std::string(who) + ": point is not a tree position");
    if (tp->edge >= edges_.size()) {
      throw UsageError(std::string(who) + ": edge index out of range");
    }
    const double len = edges_[tp->edge].length;
    if (!(tp->offset >= -kAbsFloor && tp->offset <= len + kAbsFloor)) {
      throw UsageError(std::string(who) + ": offset outside edge");
    }
    TreePos out = *tp;
    out.offset = std::clamp(out.offset, 0.0, len);
    return out;
  }

  double distance(const Point& a, const Point& b) const override {
    const TreePos pa = checked(a, "tree distance");
    const TreePos pb = checked(b, "tree distance");
    if (pa.edge == pb.edge) return std::abs(pa.offset - pb.offset);
    const TreeEdge& ea = edges_[pa.edge];
    const TreeEdge& eb = edges_[pb.edge];
    const double au = pa.offset, av = ea.length - pa.offset;
    const double bu = pb.offset, bv = eb.length - pb.offset;
    return std::min(std::min(au + dist_[ea.u][eb.u] + bu, au + dist_[ea.u][eb.v] + bv),
                    std::min(av + dist_[ea.v][eb.u] + bu, av + dist_[ea.v][eb.v] + bv));
  }

  bool geodesic() const override { return true; }

  Point midpoint(const Point& a, const Point& b) const override {
    return walk_toward(a, b, 0.5 * distance(a, b));
  }

  // Point at distance s from `a` along the unique path to `b`.
  Point walk_toward(const Point& a, const Point& b, double s) const {
    TreePos pa = checked(a, "tree walk");
    const TreePos pb = checked(b, "tree walk");
    const double total = distance(a, b);
    if (s <= 0.0) return Point(canonicalize(pa));
    if (s >= total) return Point(canonicalize(pb));
    if (pa.edge == pb.edge) {
      const double t = pa.offset + (pb.offset > pa.offset ? s : -s);
      return Point(canonicalize(TreePos{pa.edge, t}));
    }
    const TreeEdge& ea = edges_[pa.edge];
    // Distances from each endpoint of a's edge onward to b.
    const double via_u = pa.offset + vertex_to_point(ea.u, pb);
    const double via_v = (ea.length - pa.offset) + vertex_to_point(ea.v, pb);
    std::size_t exit_vertex;
    double to_exit;
    if (via_u <= via_v) {
      exit_vertex = ea.u;
      to_exit = pa.offset;
    } else {
      exit_vertex = ea.v;
      to_exit = ea.length - pa.offset;
    }
    if (s <= to_exit) {
      const double t = (exit_vertex == ea.u) ? pa.offset - s : pa.offset + s;
      return Point(canonicalize(TreePos{pa.edge, t}));
    }
    s -= to_exit;
    // Walk vertex path from exit_vertex toward b's nearer entry endpoint.
    const TreeEdge& eb = edges_[pb.edge];
    const std::size_t entry = (dist_[exit_vertex][eb.u] + pb.offset <=
                               dist_[exit_vertex][eb.v] + (eb.length - pb.offset))
                                  ? eb.u
                                  : eb.v;
    std::size_t cur = exit_vertex;
    while (cur != entry) {
      const std::size_t nxt = hop_[cur][entry];
      const std::size_t e = edge_between(cur, nxt);
      const double len = edges_[e].length;
      if (s <= len) {
        const double t = (edges_[e].u == cur) ? s : len - s;
        return Point(canonicalize(TreePos{e, t}));
      }
      s -= len;
      cur = nxt;
    }
    // Remaining distance lands inside b's edge, entering at `entry`.
    const double t = (eb.u == entry) ? s : eb.length - s;
    return Point(canonicalize(TreePos{pb.edge, t}));
  }

  // Frechet q-mean by convex descent: scan vertices along strictly improving
  // edges; a minimum interior to an edge is pinned by a one-dimensional
  // ternary search.  Geodesic convexity of sum w_k d(., y_k)^q (q >= 1)
  // guarantees the walk never revisits a vertex.
  Point weighted_qmean(const std::vector<Point>& pts, const std::vector<double>& w,
                       double q) const override {
    if (pts.empty()) throw UsageError("weighted_qmean: empty support");
    std::vector<TreePos> atoms(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) atoms[k] = checked(pts[k], "weighted_qmean");

    std::size_t v = edges_[atoms[0].edge].u;  // deterministic start near the data
    const std::size_t V = adj_.size();
    for (std::size_t hops = 0; hops <= V; ++hops) {
      std::size_t improving = edges_.size();
      for (const std::size_t e : sorted_incident(v)) {
        if (direction_derivative(v, e, atoms, w, q) < -derivative_eps(atoms, w, q)) {
          improving = e;
          break;
        }
      }
      if (improving == edges_.size()) return Point(canon_[v]);
      const std::size_t far = other_end(improving, v);
      if (direction_derivative(far, improving, atoms, w, q) < -derivative_eps(atoms, w, q)) {
        // Both endpoints pull inward: the minimum lies inside this edge.
        return Point(canonicalize(edge_ternary(improving, atoms, w, q)));
      }
      v = far;
    }
    throw std::logic_error("tree weighted_qmean walk failed to terminate");
  }

  Point sample_point(SplitRng& rng) const override {
    // Uniform w.r.t. length measure: edge proportional to length, offset uniform.
    double pick = rng.next_unit() * total_length_;
    std::size_t e = 0;
    while (e + 1 < edges_.size() && pick > edges_[e].length) {
      pick -= edges_[e].length;
      ++e;
    }
    return Point(canonicalize(TreePos{e, std::clamp(pick, 0.0, edges_[e].length)}));
  }

  std::optional<double> diameter() const override { return diam_; }

  TreePos canonicalize(TreePos p) const {
    const double len = edges_[p.edge].length;
    const double snap = kAbsFloor * std::max(1.0, len);
    if (p.offset <= snap) return canon_[edges_[p.edge].u];
    if (p.offset >= len - snap) return canon_[edges_[p.edge].v];
    return p;
  }

 private:
  std::size_t other_end(std::size_t e, std::size_t x) const {
    return edges_[e].u == x ? edges_[e].v : edges_[e].u;
  }

  std::size_t edge_between(std::size_t a, std::size_t b) const {
    for (const std::size_t e : adj_[a]) {
      if (other_end(e, a) == b) return e;
    }
    throw std::logic_error("tree space: no edge between adjacent vertices");
  }

  std::vector<std::size_t> sorted_incident(std::size_t v) const {
    std::vector<std::size_t> out(adj_[v].begin(), adj_[v].end());
    std::sort(out.begin(), out.end());
    return out;
  }

  double vertex_to_point(std::size_t v, const TreePos& p) const {
    const TreeEdge& e = edges_[p.edge];
    return std::min(dist_[v][e.u] + p.offset, dist_[v][e.v] + (e.length - p.offset));
  }

  // One-sided derivative of F(x) = sum w_k d(x, y_k)^q at vertex v, moving
  // into edge e.  Atoms on the far side of e pull with negative sign.
  double direction_derivative(std::size_t v, std::size_t e, const std::vector<TreePos>& atoms,
                              const std::vector<double>& w, double q) const {
    const std::size_t far = other_end(e, v);
    KahanSum d;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const TreePos& y = atoms[k];
      const double dv = vertex_to_point(v, y);
      if (dv <= 0.0) {
        // Atom sits at v: distance grows at unit rate in every direction.
        if (q == 1.0) d.add(w[k]);
        continue;
      }
      double sgn = 1.0;
      if (y.edge == e) {
        sgn = -1.0;
      } else {
        const TreeEdge& f = edges_[y.edge];
        const std::size_t entry =
            (dist_[v][f.u] + y.offset <= dist_[v][f.v] + (f.length - y.offset)) ? f.u : f.v;
        if (entry != v && hop_[v][entry] == far) sgn = -1.0;
      }
      const double slope = (q == 1.0) ? 1.0 : q * qpow(dv, q - 1.0);
      d.add(w[k] * slope * sgn);
    }
    return d.value();
  }

  double derivative_eps(const std::vector<TreePos>& atoms, const std::vector<double>& w,
                        double q) const {
    double scale = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      scale += w[k] * ((q == 1.0) ? 1.0 : q * qpow(std::max(diam_, 1e-30), q - 1.0));
    }
    return 1e-12 * std::max(1.0, scale);
  }

  TreePos edge_ternary(std::size_t e, const std::vector<TreePos>& atoms,
                       const std::vector<double>& w, double q) const {
    const double len = edges_[e].length;
    auto obj = [&](double t) {
      const Point x{TreePos{e, t}};
      KahanSum s;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        s.add(w[k] * qpow(distance(x, Point(atoms[k])), q));
      }
      return s.value();
    };
    double lo = 0.0, hi = len;
    int guard = 0;
    while (hi - lo > 1e-12 && guard++ < 500) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (obj(m1) <= obj(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    return TreePos{e, 0.5 * (lo + hi)};
  }

  std::vector<TreeEdge> edges_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::vector<double>> dist_;
  std::vector<std::vector<std::size_t>> hop_;
  std::vector<TreePos> canon_;
  double diam_ = 0.0;
  double total_length_ = 0.0;
};

// ---------------------------------------------------------------------------
// Snowflake transform
// ---------------------------------------------------------------------------

class SnowflakeSpace final : public Space {
 public:
  SnowflakeSpace(SpacePtr base, double theta) : base_(std::move(base)), theta_(theta) {
    if (!base_) throw UsageError("snowflake: null base space");
    if (!(theta > 0.0 && theta <= 1.0)) {
      throw UsageError("snowflake: exponent must lie in (0, 1]");
    }
  }

  const SpacePtr& base() const { return base_; }
  double theta() const { return theta_; }

  std::string kind() const override { return "snowflake"; }
  std::string describe() const override {
    std::ostringstream os;
    os << "snow:" << theta_ << ':' << base_->describe();
    return os.str();
  }

  double distance(const Point& a, const Point& b) const override {
    return std::pow(base_->distance(a, b), theta_);
  }

  Point sample_point(SplitRng& rng) const override { return base_->sample_point(rng); }

  std::optional<double> diameter() const override {
    if (auto d = base_->diameter()) return std::pow(*d, theta_);
    return std::nullopt;
  }

  std::size_t enumerable_size() const override { return base_->enumerable_size(); }
  Point enumerate_point(std::size_t i) const override { return base_->enumerate_point(i); }

 private:
  SpacePtr base_;
  double theta_;
};

// ---------------------------------------------------------------------------
// Disjoint unions of bounded spaces
// ---------------------------------------------------------------------------

class DisjointUnionSpace final : public Space {
 public:
  explicit DisjointUnionSpace(std::vector<SpacePtr> clusters) : clusters_(std::move(clusters)) {
    if (clusters_.size() < 2) throw UsageError("union: need at least two clusters");
    std::size_t zero_diam = 0;
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      const auto d = clusters_[c]->diameter();
      if (!d) {
        throw UsageError("union: cluster " + std::to_string(c) +
                         " has no computable finite diameter");
      }
      diams_.push_back(*d);
      if (*d == 0.0) ++zero_diam;
    }
    if (zero_diam >= 2) {
      throw UsageError(
          "union: two zero-diameter clusters would sit at distance zero; not a metric");
    }
  }

  const std::vector<SpacePtr>& clusters() const { return clusters_; }
  double cluster_diameter(std::size_t c) const { return diams_[c]; }

  std::string kind() const override { return "union"; }
  std::string describe() const override {
    std::string s = "union:";
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      if (c) s += ',';
      s += clusters_[c]->describe();
    }
    return s;
  }

  std::pair<std::size_t, const Point*> split(const Point& p, const char* who) const {
    const ClusterPos* cp = p.get_if<ClusterPos>();
    if (!cp) throw UsageError(std::string(who) + ": point is not a union-cluster position");
    if (cp->cluster >= clusters_.size() || cp->inner.size() != 1) {
      throw UsageError(std::string(who) + ": malformed cluster position");
    }
    return {cp->cluster, &cp->inner[0]};
  }

  double distance(const Point& a, const Point& b) const override {
    const auto [ca, pa] = split(a, "union distance");
    const auto [cb, pb] = split(b, "union distance");
    if (ca == cb) return clusters_[ca]->distance(*pa, *pb);
    return std::max(diams_[ca], diams_[cb]);
  }

  Point sample_point(SplitRng& rng) const override {
    const std::size_t c = rng.next_below(clusters_.size());
    SplitRng inner = rng.split(c + 1);
    return Point(ClusterPos{c, {clusters_[c]->sample_point(inner)}});
  }

  std::optional<double> diameter() const override {
    return *std::max_element(diams_.begin(), diams_.end());
  }

  std::size_t enumerable_size() const override {
    std::size_t total = 0;
    for (const auto& c : clusters_) {
      const std::size_t s = c->enumerable_size();
      if (s == 0) return 0;
      total += s;
    }
    return total;
  }

  Point enumerate_point(std::size_t i) const override {
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      const std::size_t s = clusters_[c]->enumerable_size();
      if (i < s) return Point(ClusterPos{c, {clusters_[c]->enumerate_point(i)}});
      i -= s;
    }
    throw UsageError("enumerate_point: index out of range");
  }

 private:
  std::vector<SpacePtr> clusters_;
  std::vector<double> diams_;
};

// ---------------------------------------------------------------------------
// p-combinations of spaces (Pythagorean product is the p = 2 case)
// ---------------------------------------------------------------------------

class LpProductSpace : public Space {
 public:
  LpProductSpace(std::vector<SpacePtr> parts, double p) : parts_(std::move(parts)), p_(p) {
    if (parts_.size() < 2) throw UsageError("product: need at least two components");
    if (!(p >= 1.0) || std::isinf(p)) {
      throw UsageError("product: combining exponent must lie in [1, inf)");
    }
  }

  const std::vector<SpacePtr>& parts() const { return parts_; }
  double p() const { return p_; }

  std::string kind() const override { return "product"; }
  std::string describe() const override {
    std::string s = (p_ == 2.0) ? "pyth:" : ("prod" + std::to_string(p_) + ":");
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      if (c) s += ',';
      s += parts_[c]->describe();
    }
    return s;
  }

  const std::vector<Point>& split(const Point& p, const char* who) const {
    const TuplePos* tp = p.get_if<TuplePos>();
    if (!tp) throw UsageError(std::string(who) + ": point is not a product tuple");
    if (tp->parts.size() != parts_.size()) {
      throw UsageError(std::string(who) + ": tuple arity mismatch");
    }
    return tp->parts;
  }

  double distance(const Point& a, const Point& b) const override {
    const auto& pa = split(a, "product distance");
    const auto& pb = split(b, "product distance");
    if (p_ == 2.0) {
      double s = 0.0;
      for (std::size_t c = 0; c < parts_.size(); ++c) {
        const double d = parts_[c]->distance(pa[c], pb[c]);
        s += d * d;
      }
      return std::sqrt(s);
    }
    double s = 0.0;
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      s += std::pow(parts_[c]->distance(pa[c], pb[c]), p_);
    }
    return std::pow(s, 1.0 / p_);
  }

  bool geodesic() const override {
    for (const auto& c : parts_) {
      if (!c->geodesic()) return false;
    }
    return true;
  }

  Point midpoint(const Point& a, const Point& b) const override {
    if (!geodesic()) return Space::midpoint(a, b);
    const auto& pa = split(a, "product midpoint");
    const auto& pb = split(b, "product midpoint");
    TuplePos out;
    out.parts.reserve(parts_.size());
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      out.parts.push_back(parts_[c]->midpoint(pa[c], pb[c]));
    }
    return Point(std::move(out));
  }

  bool coordinate() const override {
    for (const auto& c : parts_) {
      if (!c->coordinate()) return false;
    }
    return true;
  }

  Point linear_mean(const std::vector<Point>& pts, const std::vector<double>& w) const override {
    if (!coordinate()) return Space::linear_mean(pts, w);
    TuplePos out;
    out.parts.reserve(parts_.size());
    std::vector<Point> comp(pts.size());
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      for (std::size_t k = 0; k < pts.size(); ++k) {
        comp[k] = split(pts[k], "product linear mean")[c];
      }
      out.parts.push_back(parts_[c]->linear_mean(comp, w));
    }
    return Point(std::move(out));
  }

  // Componentwise q-mean: exact when the product objective separates
  // (matching exponents); otherwise the documented componentwise surrogate.
  Point weighted_qmean(const std::vector<Point>& pts, const std::vector<double>& w,
                       double q) const override {
    if (pts.empty()) throw UsageError("weighted_qmean: empty support");
    TuplePos out;
    out.parts.reserve(parts_.size());
    std::vector<Point> comp(pts.size());
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      for (std::size_t k = 0; k < pts.size(); ++k) {
        comp[k] = split(pts[k], "product weighted_qmean")[c];
      }
      out.parts.push_back(parts_[c]->weighted_qmean(comp, w, q));
    }
    return Point(std::move(out));
  }

  Point sample_point(SplitRng& rng) const override {
    TuplePos out;
    out.parts.reserve(parts_.size());
    for (std::size_t c = 0; c < parts_.size(); ++c) {
      SplitRng child = rng.split(c + 101);
      out.parts.push_back(parts_[c]->sample_point(child));
    }
    return Point(std::move(out));
  }

  std::optional<double> diameter() const override {
    double s = 0.0;
    for (const auto& c : parts_) {
      const auto d = c->diameter();
      if (!d) return std::nullopt;
      s += std::pow(*d, p_);
    }
    return std::pow(s, 1.0 / p_);
  }

 private:
  std::vector<SpacePtr> parts_;
  double p_;
};

class PythagoreanProductSpace final : public LpProductSpace {
 public:
  explicit PythagoreanProductSpace(std::vector<SpacePtr> parts)
      : LpProductSpace(std::move(parts), 2.0) {}
};

// ---------------------------------------------------------------------------
// Wasserstein space over a finite base
// ---------------------------------------------------------------------------

class WassersteinSpace final : public Space {
 public:
  WassersteinSpace(SpacePtr base, double p) : base_(std::move(base)), p_(p) {
    if (!base_) throw UsageError("wasserstein: null base space");
    if (!(p >= 1.0) || std::isinf(p)) {
      throw UsageError("wasserstein: exponent must lie in [1, inf)");
    }
    n_ = base_->enumerable_size();
    if (n_ == 0) throw UsageError("wasserstein: base space must be finite/enumerable");
    cost_.assign(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        cost_[i][j] = qpow(base_->distance(base_->enumerate_point(i), base_->enumerate_point(j)), p_);
      }
    }
  }

  const SpacePtr& base() const { return base_; }
  double p() const { return p_; }
  std::size_t base_size() const { return n_; }

  std::string kind() const override { return "wasserstein"; }
  std::string describe() const override {
    std::ostringstream os;
    os << "wass:" << p_ << ':' << base_->describe();
    return os.str();
  }

  const Histogram& checked(const Point& p, const char* who) const {
    const Histogram* h = p.get_if<Histogram>();
    if (!h) throw UsageError(std::string(who) + ": point is not a histogram");
    if (h->w.size() != n_) throw UsageError(std::string(who) + ": histogram size mismatch");
    double sum = 0.0;
    for (double v : h->w) {
      if (v < -kAbsFloor) throw UsageError(std::string(who) + ": negative histogram weight");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw UsageError(std::string(who) + ": histogram mass is not 1");
    }
    return *h;
  }

  double distance(const Point& a, const Point& b) const override {
    const Histogram& ha = checked(a, "wasserstein distance");
    const Histogram& hb = checked(b, "wasserstein distance");
    // Restrict to supports so the simplex never sees zero rows/columns.
    std::vector<std::size_t> ia, ib;
    std::vector<double> wa, wb;
    for (std::size_t i = 0; i < n_; ++i) {
      if (ha.w[i] > 0.0) {
        ia.push_back(i);
        wa.push_back(ha.w[i]);
      }
      if (hb.w[i] > 0.0) {
        ib.push_back(i);
        wb.push_back(hb.w[i]);
      }
    }
    std::vector<std::vector<double>> c(ia.size(), std::vector<double>(ib.size()));
    for (std::size_t i = 0; i < ia.size(); ++i) {
      for (std::size_t j = 0; j < ib.size(); ++j) c[i][j] = cost_[ia[i]][ib[j]];
    }
    const double val = solve_transport(wa, wb, c).cost;
    return qroot(std::max(0.0, val), p_);
  }

  Point dirac(std::size_t base_index) const {
    if (base_index >= n_) throw UsageError("wasserstein dirac: index out of range");
    Histogram h;
    h.w.assign(n_, 0.0);
    h.w[base_index] = 1.0;
    return Point(std::move(h));
  }

  Point sample_point(SplitRng& rng) const override {
    Histogram h;
    h.w.resize(n_);
    double sum = 0.0;
    for (double& v : h.w) {
      v = -std::log(rng.next_unit_pos());
      sum += v;
    }
    for (double& v : h.w) v /= sum;
    return Point(std::move(h));
  }

  std::optional<double> diameter() const override { return base_->diameter(); }

 private:
  SpacePtr base_;
  double p_;
  std::size_t n_ = 0;
  std::vector<std::vector<double>> cost_;
};

}  // namespace cotype
