#pragma once

// Point: the value type every metric backend operates on.  A point is one of
//   RealVec      coordinates in an l_p space
//   FiniteIndex  row index into a finite distance matrix
//   TreePos      location on a weighted tree edge (offset measured from the
//                edge's first endpoint)
//   ClusterPos   (cluster id, inner point) of a disjoint union
//   TuplePos     componentwise point of a product space
//   Histogram    probability weights over a base space's points (transport
//                distance backends)
// Equality is structural and exact; it certifies "same representation", while
// "same location" is certified by zero distance.

#include <cstddef>
#include <variant>
#include <vector>

namespace cotype {

struct Point;

struct RealVec {
  std::vector<double> x;
  bool operator==(const RealVec&) const = default;
};

struct FiniteIndex {
  std::size_t i = 0;
  bool operator==(const FiniteIndex&) const = default;
};

struct TreePos {
  std::size_t edge = 0;
  double offset = 0.0;  // distance from the edge's first endpoint, in [0, length]
  bool operator==(const TreePos&) const = default;
};

struct ClusterPos {
  std::size_t cluster = 0;
  std::vector<Point> inner;  // exactly one element
  bool operator==(const ClusterPos&) const;
};

struct TuplePos {
  std::vector<Point> parts;
  bool operator==(const TuplePos&) const;
};

struct Histogram {
  std::vector<double> w;
  bool operator==(const Histogram&) const = default;
};

struct Point {
  std::variant<RealVec, FiniteIndex, TreePos, ClusterPos, TuplePos, Histogram> rep;

  Point() : rep(RealVec{}) {}
  Point(RealVec v) : rep(std::move(v)) {}
  Point(FiniteIndex v) : rep(v) {}
  Point(TreePos v) : rep(v) {}
  Point(ClusterPos v) : rep(std::move(v)) {}
  Point(TuplePos v) : rep(std::move(v)) {}
  Point(Histogram v) : rep(std::move(v)) {}

  bool operator==(const Point&) const = default;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&rep);
  }
  template <class T>
  T* get_if() {
    return std::get_if<T>(&rep);
  }
};

inline bool ClusterPos::operator==(const ClusterPos& o) const {
  return cluster == o.cluster && inner == o.inner;
}
inline bool TuplePos::operator==(const TuplePos& o) const { return parts == o.parts; }

inline Point vec_point(std::vector<double> x) { return Point(RealVec{std::move(x)}); }
inline Point index_point(std::size_t i) { return Point(FiniteIndex{i}); }

}  // namespace cotype
