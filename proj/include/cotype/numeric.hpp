#pragma once

// Numeric primitives shared by every module: compensated summation,
// tolerance rules for comparing inexact quantities, and stable powers.

#include <cmath>
#include <cstddef>
#include <limits>

namespace cotype {

inline constexpr double kAbsFloor = 1e-12;  // absolute tolerance floor
inline constexpr double kRelTol = 1e-9;     // relative tolerance on the larger magnitude

// Kahan–Neumaier compensated accumulator.  Summation order is part of the
// determinism contract, so callers must feed terms in a fixed index order.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double mixed_tol(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::max(kAbsFloor, kRelTol * scale);
}

// a == b up to the mixed absolute/relative rule.
inline bool approx_eq(double a, double b) { return std::abs(a - b) <= mixed_tol(a, b); }

// a <= b up to the mixed rule.
inline bool approx_leq(double a, double b) { return a <= b + mixed_tol(a, b); }

// x^q for x >= 0, q >= 1, with fast paths for the common exponents.
inline double qpow(double x, double q) {
  if (q == 2.0) return x * x;
  if (q == 1.0) return x;
  return std::pow(x, q);
}

// x^(1/q) for x >= 0.
inline double qroot(double x, double q) {
  if (x <= 0.0) return 0.0;
  if (q == 2.0) return std::sqrt(x);
  if (q == 1.0) return x;
  return std::pow(x, 1.0 / q);
}

inline double infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace cotype
