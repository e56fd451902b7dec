#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/rng.hpp"
#include "cotype/transport.hpp"
#include "oracles.hpp"

using namespace cotype;

namespace {

// Row and column sums of a plan must reproduce the marginals.
void require_feasible(const TransportResult& r, const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::vector<double> row(a.size(), 0.0), col(b.size(), 0.0);
  for (const auto& e : r.plan) {
    REQUIRE(e.mass > 0.0);
    row[e.from] += e.mass;
    col[e.to] += e.mass;
  }
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(row[i] == Catch::Approx(a[i]).margin(1e-9));
  for (std::size_t j = 0; j < b.size(); ++j) REQUIRE(col[j] == Catch::Approx(b[j]).margin(1e-9));
}

}  // namespace

TEST_CASE("transport between point masses pays the single cost entry") {
  const TransportResult r = solve_transport({1.0}, {1.0}, {{3.25}});
  REQUIRE(r.cost == Catch::Approx(3.25));
  REQUIRE(r.plan.size() == 1);
  REQUIRE(r.plan[0].mass == Catch::Approx(1.0));
}

TEST_CASE("uniform marginals: solver matches permutation enumeration") {
  SplitRng rng(2024);
  for (std::size_t k : {2, 3, 4, 5}) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<std::vector<double>> cost(k, std::vector<double>(k));
      SplitRng r = rng.split(static_cast<std::uint64_t>(k) * 100 + rep);
      for (auto& row : cost)
        for (auto& v : row) v = r.next_unit() * 10.0;
      const std::vector<double> u(k, 1.0 / static_cast<double>(k));
      const TransportResult got = solve_transport(u, u, cost);
      const double want = oracles::min_permutation_transport(cost);
      REQUIRE(got.cost == Catch::Approx(want).margin(1e-10));
      require_feasible(got, u, u);
    }
  }
}

TEST_CASE("line supports: solver matches the monotone coupling") {
  SplitRng rng(77);
  for (double p : {1.0, 2.0, 3.0}) {
    for (int rep = 0; rep < 20; ++rep) {
      SplitRng r = rng.split(static_cast<std::uint64_t>(p * 10) * 100 + rep);
      const std::size_t na = 2 + r.next_below(3), nb = 2 + r.next_below(3);
      std::vector<double> xs(na), ys(nb), wa(na), wb(nb);
      for (auto& x : xs) x = r.next_unit() * 4.0 - 2.0;
      for (auto& y : ys) y = r.next_unit() * 4.0 - 2.0;
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
      double sa = 0.0, sb = 0.0;
      for (auto& w : wa) sa += (w = 0.1 + r.next_unit());
      for (auto& w : wb) sb += (w = 0.1 + r.next_unit());
      for (auto& w : wa) w /= sa;
      for (auto& w : wb) w /= sb;

      std::vector<std::vector<double>> cost(na, std::vector<double>(nb));
      for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) cost[i][j] = std::pow(std::abs(xs[i] - ys[j]), p);

      const TransportResult got = solve_transport(wa, wb, cost);
      const double want = oracles::monotone_transport_1d(xs, wa, ys, wb, p);
      REQUIRE(got.cost == Catch::Approx(want).margin(1e-9));
      require_feasible(got, wa, wb);
    }
  }
}

TEST_CASE("unbalanced or malformed inputs are rejected") {
  REQUIRE_THROWS_AS(solve_transport({}, {1.0}, {}), UsageError);
  REQUIRE_THROWS_AS(solve_transport({1.0}, {0.5}, {{1.0}}), UsageError);
  REQUIRE_THROWS_AS(solve_transport({1.0}, {1.0}, {{1.0, 2.0}}), UsageError);
  REQUIRE_THROWS_AS(solve_transport({-1.0, 2.0}, {1.0}, {{0.0}, {0.0}}), UsageError);
}

TEST_CASE("degenerate demands collapse onto the support") {
  // All demand on one sink: every source ships straight there.
  const std::vector<double> a{0.25, 0.75}, b{0.0, 1.0};
  const std::vector<std::vector<double>> cost{{5.0, 1.0}, {5.0, 2.0}};
  const TransportResult r = solve_transport(a, b, cost);
  REQUIRE(r.cost == Catch::Approx(0.25 * 1.0 + 0.75 * 2.0));
  require_feasible(r, a, b);
}

TEST_CASE("transport cost obeys the triangle inequality across three measures") {
  // W_1 distances between three two-atom measures on the line.
  const std::vector<double> pos{0.0, 1.0, 2.5};
  auto wdist = [&](const std::vector<double>& wa, const std::vector<double>& wb) {
    std::vector<std::vector<double>> cost(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) cost[i][j] = std::abs(pos[i] - pos[j]);
    return solve_transport(wa, wb, cost).cost;
  };
  const std::vector<double> mu{0.5, 0.5, 0.0}, nu{0.0, 0.5, 0.5}, rho{0.25, 0.5, 0.25};
  REQUIRE(wdist(mu, nu) <= wdist(mu, rho) + wdist(rho, nu) + 1e-12);
  REQUIRE(wdist(mu, mu) == Catch::Approx(0.0).margin(1e-12));
}
