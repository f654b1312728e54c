#include "doctest.h"
#include "dana/reference.hpp"
#include "test_util.hpp"

using namespace dana;
using namespace dana::testing;

namespace {

DispatchProblem three_node_nobox() {
  return make_dispatch_problem({make_quadratic(0.5, 0.5), make_quadratic(1.5, 0.5), make_quadratic(4.0, 0.5)},
                               6.0, {5.0, -1.0, 2.0});
}

DispatchProblem three_node_boxed() {
  return make_dispatch_problem({make_quadratic(0.5, 0.5), make_quadratic(1.5, 0.5), make_quadratic(4.0, 0.5)},
                               6.0, {5.0, -1.0, 2.0}, Vec{0.2, 2.5, 1.5}, Vec{1.0, 6.0, 4.0});
}

}  // namespace

TEST_CASE("equality oracle: homogeneous costs split the demand evenly") {
  auto p = make_dispatch_problem({make_quadratic(2, 0), make_quadratic(2, 0), make_quadratic(2, 0),
                                  make_quadratic(2, 0)},
                                 10.0, {2.5, 2.5, 2.5, 2.5});
  auto s = solve_equality_qp(p);
  for (double x : s.x_star) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("equality oracle: stationarity and conservation on the 3-node case") {
  auto p = three_node_nobox();
  auto s = solve_equality_qp(p);
  CHECK(sum(s.x_star) == doctest::Approx(6.0).epsilon(1e-13));
  for (int i = 0; i < 3; ++i)
    CHECK(p.costs[i].grad(s.x_star[i]) == doctest::Approx(s.nu_star).epsilon(1e-13));
  CHECK(kkt_report(p, s.x_star, s.nu_star, s.lambda_star).max() <= 1e-12);
}

TEST_CASE("scalar dual solve agrees with the closed form on quadratics") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = random_instance(7, cost_family("wide"), 15.0, seed + 2);
    auto a = solve_equality_qp(p);
    auto b = solve_dual(p);
    CHECK(b.nu_star == doctest::Approx(a.nu_star).epsilon(1e-10));
    for (int i = 0; i < 7; ++i) CHECK(b.x_star[i] == doctest::Approx(a.x_star[i]).epsilon(1e-9));
  }
}

TEST_CASE("scalar dual solve handles sinusoidal costs") {
  auto p = random_instance(9, cost_family("sinusoidal"), 18.0, 77);
  auto s = solve_dual(p);
  CHECK(sum(s.x_star) == doctest::Approx(18.0).epsilon(1e-10));
  for (int i = 0; i < 9; ++i)
    CHECK(p.costs[i].grad(s.x_star[i]) == doctest::Approx(s.nu_star).epsilon(1e-9));
}

TEST_CASE("brute force reduces to the equality oracle when no box binds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 2 + rng.below(6);
    auto base = random_instance(n, cost_family("wide"), 3.0 * n, seed + 100);
    auto eq = solve_equality_qp(base);
    Vec lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = eq.x_star[i] - rng.uniform(5.0, 10.0);
      hi[i] = eq.x_star[i] + rng.uniform(5.0, 10.0);
    }
    auto boxed = make_dispatch_problem(base.costs, base.demand, base.x0, lo, hi);
    auto bf = solve_box_qp_bruteforce(boxed);
    for (int i = 0; i < n; ++i) CHECK(bf.x_star[i] == doctest::Approx(eq.x_star[i]).epsilon(1e-10));
    CHECK(norm_inf(bf.lambda_star) == 0.0);
  }
}

TEST_CASE("brute force solves the 3-node boxed instance with clean KKT") {
  auto p = three_node_boxed();
  auto s = solve_box_qp_bruteforce(p);
  CHECK(sum(s.x_star) == doctest::Approx(6.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    CHECK(s.x_star[i] >= (*p.x_lo)[i] - 1e-12);
    CHECK(s.x_star[i] <= (*p.x_hi)[i] + 1e-12);
  }
  CHECK(kkt_report(p, s.x_star, s.nu_star, s.lambda_star).max() <= 1e-10);
  // x1 is capped by its tight upper bound of 1.0
  CHECK(s.x_star[0] == doctest::Approx(1.0));
  CHECK(s.active_set[0] == 1);
}

TEST_CASE("brute force and dual waterfilling agree on boxed instances") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Rng rng(seed + 9);
    const int n = 3 + rng.below(6);
    std::vector<CostFunction> costs;
    Vec lo(n), hi(n);
    double lo_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      costs.push_back(make_quadratic(rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0)));
      lo[i] = rng.uniform(-1.0, 0.5);
      hi[i] = lo[i] + rng.uniform(0.5, 2.0);
      lo_sum += lo[i];
    }
    const double span = sum(hi) - lo_sum;
    const double d = lo_sum + rng.uniform(0.15, 0.85) * span;
    Vec x0(n, d / n);
    auto p = make_dispatch_problem_unchecked(costs, d, x0, lo, hi);
    auto bf = solve_box_qp_bruteforce(p);
    auto dual = solve_dual(p);
    for (int i = 0; i < n; ++i) CHECK(dual.x_star[i] == doctest::Approx(bf.x_star[i]).epsilon(1e-8));
    CHECK(kkt_report(p, bf.x_star, bf.nu_star, bf.lambda_star).max() <= 1e-10);
  }
}

TEST_CASE("brute force rejects the degenerate boundary demand") {
  auto p = make_dispatch_problem_unchecked({make_quadratic(1, 0), make_quadratic(1, 0)}, 4.0, {2.0, 2.0},
                                           Vec{0.0, 0.0}, Vec{2.0, 2.0});
  CHECK_THROWS_AS(solve_box_qp_bruteforce(p), InfeasibleOrDegenerate);
}

TEST_CASE("brute force caps the enumeration size") {
  auto p = random_instance(13, cost_family("tight"), 39.0, 3, BoxDistribution{});
  CHECK_THROWS_AS(solve_box_qp_bruteforce(p), InvalidInput);
}

TEST_CASE("attach_z_star produces the canonical representative") {
  auto p = three_node_nobox();
  auto g = GraphTopology(3, {{0, 1}, {1, 2}});
  auto l = unweighted_laplacian(g);
  auto s = solve_equality_qp(p);
  attach_z_star(s, p, l, 0.0);
  REQUIRE(s.z_star.size() == 3);
  CHECK(sum(s.z_star) == doctest::Approx(0.0).epsilon(1e-12));
  Vec lz = matvec(l.matrix().mat(), s.z_star);
  for (int i = 0; i < 3; ++i)
    CHECK(p.x0[i] + lz[i] == doctest::Approx(s.x_star[i]).epsilon(1e-10));
}

TEST_CASE("oracle json includes the solution fields") {
  auto s = solve_equality_qp(three_node_nobox());
  auto j = oracle_to_json(s);
  CHECK(j.find("x_star") != std::string::npos);
  CHECK(j.find("nu_star") != std::string::npos);
  CHECK(j.find("active_set") != std::string::npos);
}
