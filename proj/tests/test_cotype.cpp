#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "cotype/cotype.hpp"
#include "cotype/measure.hpp"
#include "cotype/numeric.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/torus.hpp"
#include "oracles.hpp"

using namespace cotype;

namespace {

SpacePtr plane() { return std::make_shared<LpSpace>(2, 2.0); }

SpacePtr small_tree() {
  return std::make_shared<TreeSpace>(
      4, std::vector<TreeEdge>{{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 0.5}});
}

// Direct triple-loop evaluation of the three lattice functionals (raw power
// sums, before any averaging), written without the library's summation
// helpers.
struct DirectSums {
  double lhs_pow = 0.0;
  double sign_pow = 0.0;
  double linf_pow = 0.0;
};

DirectSums direct_sums(const TorusFunction& f, double q) {
  const TorusIndexer& idx = f.indexer();
  const Space& sp = *f.target();
  const std::size_t n = idx.n, size = idx.size(), m = f.m();
  DirectSums out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t y = idx.shift(x, i, static_cast<std::ptrdiff_t>(m));
      out.lhs_pow += std::pow(sp.distance(f.value(y), f.value(x)), q);
    }
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    for (std::size_t x = 0; x < size; ++x) {
      std::size_t y = x;
      for (std::size_t i = 0; i < n; ++i) {
        y = idx.shift(y, i, (mask >> i) & 1 ? 1 : -1);
      }
      out.sign_pow += std::pow(sp.distance(f.value(y), f.value(x)), q);
    }
  }
  std::size_t codes = 1;
  for (std::size_t i = 0; i < n; ++i) codes *= 3;
  for (std::size_t code = 0; code < codes; ++code) {
    for (std::size_t x = 0; x < size; ++x) {
      std::size_t y = x, c = code;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t trit = c % 3;
        c /= 3;
        if (trit == 1) y = idx.shift(y, i, 1);
        if (trit == 2) y = idx.shift(y, i, -1);
      }
      out.linf_pow += std::pow(sp.distance(f.value(y), f.value(x)), q);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("lattice functionals match a direct triple loop") {
  SplitRng rng(2);
  for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 2}, {2, 1}, {2, 2}, {3, 1}}) {
    for (double q : {2.0, 3.0}) {
      const TorusFunction f =
          make_random_torus_function(n, m, plane(), rng.split(n * 10 + m).next_u64());
      const DirectSums want = direct_sums(f, q);
      REQUIRE(cotype_lhs_pow(f, q) == Catch::Approx(want.lhs_pow).epsilon(1e-12));
      REQUIRE(cotype_rhs_sign_pow(f, q) == Catch::Approx(want.sign_pow).epsilon(1e-12));
      REQUIRE(cotype_rhs_linf_pow(f, q) == Catch::Approx(want.linf_pow).epsilon(1e-12));
    }
  }
}

TEST_CASE("certified comparison holds for random euclidean inputs") {
  SplitRng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t n = 1 + r.next_below(3);
    const std::size_t m = 2 * (1 + r.next_below(2));  // even scale
    const TorusFunction f = make_random_torus_function(n, m, plane(), r.next_u64());
    const CotypeReport rep2 = verify_main_inequality(f, 2.0, 1.0);
    REQUIRE(rep2.pass);
    REQUIRE_FALSE(rep2.odd_m);
    REQUIRE(rep2.lhs <= rep2.bound * rep2.rhs_sign + 1e-9 * std::max(1.0, rep2.rhs_sign));
  }
}

TEST_CASE("certified comparison holds on trees and in l3") {
  SplitRng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const TorusFunction ft =
        make_random_torus_function(2, 2, small_tree(), rng.split(rep).next_u64());
    REQUIRE(verify_main_inequality(ft, 2.0, 1.0, 1e-6).pass);

    const TorusFunction f3 = make_random_torus_function(
        2, 2, std::make_shared<LpSpace>(2, 3.0), rng.split(100 + rep).next_u64());
    REQUIRE(verify_main_inequality(f3, 3.0, 2.0).pass);
  }
}

TEST_CASE("constant functions are flagged degenerate") {
  const TorusFunction f =
      make_constant_torus_function(2, 2, plane(), vec_point({1.0, 2.0}));
  const CotypeReport rep = verify_main_inequality(f, 2.0, 1.0);
  REQUIRE(rep.degenerate);
  REQUIRE(rep.pass);
  REQUIRE(rep.lhs == 0.0);
}

TEST_CASE("odd shift scales are reported but not certified") {
  const TorusFunction f = make_random_torus_function(2, 1, plane(), 5);
  const CotypeReport rep = verify_main_inequality(f, 2.0, 1.0);
  REQUIRE(rep.odd_m);
}

TEST_CASE("proof decomposition bounds every stage") {
  SplitRng rng(6);
  for (int rep = 0; rep < 15; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t n = 1 + r.next_below(2);
    // Proof scale: total side 4s so the half-shift and quarter-scale both exist.
    const std::size_t s = 1 + r.next_below(2);
    const TorusFunction f = make_random_torus_function(n, 2 * s, plane(), r.next_u64());
    const CotypeReport d = decompose_main_proof(f, 2.0, 1.0, BarycenterMap::linear());
    REQUIRE(d.triangle_pass);
    REQUIRE(d.approx_pass);
    REQUIRE(d.shift_pass);
    REQUIRE(d.pass);
    const double nq = std::sqrt(static_cast<double>(n));
    REQUIRE(d.lhs <= 2.0 * d.t_approx + d.t_shift + 1e-9 * std::max(1.0, d.lhs));
    REQUIRE(d.t_approx <= 2.0 * nq * d.rhs_sign + 1e-9 * std::max(1.0, d.rhs_sign));
    REQUIRE(d.t_shift <=
            1.0 * static_cast<double>(f.m()) * d.rhs_sign + 1e-9 * std::max(1.0, d.rhs_sign));
  }
}

TEST_CASE("proof decomposition works on trees with iterative tolerance") {
  SplitRng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const TorusFunction f =
        make_random_torus_function(2, 2, small_tree(), rng.split(rep).next_u64());
    const CotypeReport d =
        decompose_main_proof(f, 2.0, 1.0, BarycenterMap::tree_mean2(), 1e-6);
    REQUIRE(d.pass);
  }
}

TEST_CASE("proof decomposition requires a side divisible by four") {
  const TorusFunction f = make_random_torus_function(2, 1, plane(), 8);  // side 2
  REQUIRE_THROWS_AS(decompose_main_proof(f, 2.0, 1.0, BarycenterMap::linear()), UsageError);
}

TEST_CASE("constant search stays below the certified ceiling") {
  const ConstantSearchReport sr =
      estimate_cotype_constant(plane(), 2.0, 2, 2, EdgeKind::Signs, 60, 4, 99);
  REQUIRE_FALSE(sr.infinite);
  REQUIRE_FALSE(sr.degenerate);
  REQUIRE(sr.evaluations > 0);
  const double ceiling = theorem_bound(2, 2, 2.0, 1.0) / 2.0;
  REQUIRE(sr.c_hat <= ceiling + 1e-9);
  REQUIRE(sr.c_hat > 0.0);
}

TEST_CASE("constant search with zero budget reports a degenerate scan") {
  const ConstantSearchReport sr =
      estimate_cotype_constant(plane(), 2.0, 2, 2, EdgeKind::Signs, 0, 2, 1);
  REQUIRE(sr.degenerate);
}

TEST_CASE("subset coefficient: brute force, closed form, and binomial oracle agree") {
  for (std::size_t n = 1; n <= 10; ++n) {
    const std::uint64_t brute = subset_shift_coefficient(n, 0);
    const std::uint64_t closed = 2 * pow3(n - 1);
    const std::uint64_t oracle = oracles::subset_coefficient_binomial(n);
    REQUIRE(brute == closed);
    REQUIRE(brute == oracle);
    // Independence from which element is pinned.
    REQUIRE(subset_shift_coefficient(n, n - 1) == brute);
  }
}

TEST_CASE("scale equivalence chain on random euclidean families") {
  SplitRng rng(12);
  std::vector<TorusFunction> half, full;
  for (int s = 0; s < 3; ++s) {
    half.push_back(make_random_torus_function(2, 1, plane(), rng.split(2 * s).next_u64()));
    full.push_back(
        make_random_torus_function(2, 2, plane(), rng.split(2 * s + 1).next_u64()));
  }
  const EquivalenceReport er = check_equivalence_chain(2.0, 2, 1, half, full);
  REQUIRE(er.pass);
  REQUIRE(er.coefficient_matches);
  REQUIRE(er.coefficient == 6);        // 2 * 3^(n-1) at n = 2
  REQUIRE(er.alternate_half != er.coefficient);
  REQUIRE(er.restriction_identity_err <= 1e-9);
  REQUIRE(er.support_split_identity_err <= 1e-9);
  REQUIRE(er.sign_bound_min_slack >= -1e-9);
  REQUIRE(er.parity_bound_min_slack >= -1e-9);
  REQUIRE(er.double_step_min_slack >= -1e-9);
  REQUIRE(er.chain_a_pass);
  REQUIRE(er.chain_b_pass);
}

TEST_CASE("equivalence chain also passes at q = 3 and n = 3") {
  SplitRng rng(13);
  std::vector<TorusFunction> half, full;
  half.push_back(make_random_torus_function(3, 1, plane(), rng.split(0).next_u64()));
  full.push_back(make_random_torus_function(3, 2, plane(), rng.split(1).next_u64()));
  const EquivalenceReport er = check_equivalence_chain(3.0, 3, 1, half, full);
  REQUIRE(er.pass);
  REQUIRE(er.coefficient == 18);       // 2 * 3^2
}

TEST_CASE("quadratic inequality check evaluates both forms") {
  LpSpace line(1, 2.0);
  const std::vector<std::vector<double>> a{{0.0, 1.0}, {1.0, 0.0}};
  const std::vector<std::vector<double>> b{{0.0, 2.0}, {2.0, 0.0}};
  const std::vector<Point> pts{vec_point({0.0}), vec_point({3.0})};
  const QuadraticCheck qc = quadratic_inequality_check(line, a, b, pts);
  // Each ordered pair contributes coefficient * 9.
  REQUIRE(qc.lhs == Catch::Approx(18.0));
  REQUIRE(qc.rhs == Catch::Approx(36.0));
  REQUIRE(qc.slack == Catch::Approx(18.0));
  REQUIRE_THROWS_AS(
      quadratic_inequality_check(line, {{0.0}}, b, pts), UsageError);
}

TEST_CASE("uniform convexity functional vanishes in the parallelogram case") {
  LpSpace sp(2, 2.0);
  SplitRng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    SplitRng rx = rng.split(2 * rep), ry = rng.split(2 * rep + 1);
    std::vector<double> x(2), y(2);
    for (auto& v : x) v = rx.next_normal();
    for (auto& v : y) v = ry.next_normal();
    REQUIRE(std::abs(uniform_convexity_check(sp, x, y, 2.0, 1.0)) <= 1e-9);
  }
}

TEST_CASE("theorem bound formula") {
  REQUIRE(theorem_bound(4, 2, 2.0, 2.0) == Catch::Approx(4.0 * 2.0 + 2.0 * 2.0));
  REQUIRE(theorem_bound(8, 6, 3.0, 1.0) == Catch::Approx(4.0 * 2.0 + 6.0));
}

TEST_CASE("budget guard rejects oversized lattices") {
  REQUIRE_THROWS_AS(ensure_budget(1e12, 1e9), BudgetError);
  REQUIRE_NOTHROW(ensure_budget(100.0, 1e9));
}
