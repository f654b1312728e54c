#include "doctest.h"
#include "dana/problem.hpp"
#include "test_util.hpp"

using namespace dana;
using namespace dana::testing;

namespace {

// the three-node instance used throughout: f1 = x^2/4 + x/2, f2 = 3x^2/4 + x/2,
// f3 = 2x^2 + x/2
DispatchProblem three_node_nobox() {
  return make_dispatch_problem({make_quadratic(0.5, 0.5), make_quadratic(1.5, 0.5), make_quadratic(4.0, 0.5)},
                               6.0, {5.0, -1.0, 2.0});
}

WeightedLaplacian path3_laplacian() {
  return unweighted_laplacian(GraphTopology(3, {{0, 1}, {1, 2}}));
}

}  // namespace

TEST_CASE("cost evaluations match hand values") {
  auto f1 = make_quadratic(0.5, 0.5);  // x^2/4 + x/2
  CHECK(f1.value(1.0) == doctest::Approx(0.75).epsilon(1e-15));

  auto f = make_quadratic(2.0, 0.0);
  CHECK(f.grad(0.0) == 0.0);

  auto s = make_sinusoidal(3.0, 0.0, 1.0, 0.0);
  for (int k = 0; k <= 100; ++k) {
    const double x = -10.0 + 0.2 * k;
    const double h = s.hess(x);
    CHECK(h >= 2.0 - 1e-12);
    CHECK(h <= 4.0 + 1e-12);
  }
  CHECK(s.delta() == doctest::Approx(2.0));
  CHECK(s.Delta() == doctest::Approx(4.0));
}

TEST_CASE("cost validation") {
  CHECK_THROWS_AS(make_quadratic(0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(make_sinusoidal(1.0, 0.0, 1.0, 0.0), InvalidInput);  // a - c == 0
  CHECK_THROWS_AS(make_sinusoidal(1.0, 0.0, -0.1, 0.0), InvalidInput);
}

TEST_CASE("gradient and hessian agree with central differences") {
  Rng rng(2024);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    auto dist = cost_family(trial % 2 == 0 ? "sinusoidal" : "wide");
    auto p = random_instance(5, dist, 10.0, trial + 1);
    for (int rep = 0; rep < 4; ++rep) {
      Vec x(5);
      for (double& v : x) v = rng.uniform(-3.0, 3.0);
      Vec g = eval_grad(p, x);
      for (int i = 0; i < 5; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (eval_f(p, xp) - eval_f(p, xm)) / (2.0 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
        const double fdh = (p.costs[i].grad(x[i] + h) - p.costs[i].grad(x[i] - h)) / (2.0 * h);
        CHECK(std::abs(fdh - p.costs[i].hess(x[i])) <= 1e-5 * std::max(1.0, std::abs(fdh)));
      }
    }
  }
}

TEST_CASE("strong convexity holds at sampled points") {
  Rng rng(9);
  auto p = random_instance(10, cost_family("sinusoidal"), 20.0, 5);
  const Vec deltas = p.delta_bounds();
  const double floor = *std::min_element(deltas.begin(), deltas.end());
  for (int k = 0; k < 10000; ++k) {
    const int i = rng.below(10);
    const double h = p.costs[i].hess(rng.uniform(-50.0, 50.0));
    CHECK(h >= floor - 1e-12);
    CHECK(h >= p.costs[i].delta() - 1e-12);
    CHECK(h <= p.costs[i].Delta() + 1e-12);
  }
}

TEST_CASE("stable value_diff matches naive difference and stays exact for quadratics") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = trial % 2 == 0 ? make_quadratic(rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0))
                            : make_sinusoidal(3.0, 0.2, rng.uniform(0.0, 1.0), rng.uniform(0.0, 6.0));
    const double x = rng.uniform(-4.0, 4.0);
    const double dx = rng.uniform(-0.5, 0.5);
    CHECK(f.value_diff(x, dx) ==
          doctest::Approx(f.value(x + dx) - f.value(x)).epsilon(1e-9));
  }
}

TEST_CASE("reduced objective basics") {
  auto p = three_node_nobox();
  auto l = path3_laplacian();

  CHECK(reduced_objective(p, l, {0.0, 0.0, 0.0}) == doctest::Approx(eval_f(p, p.x0)).epsilon(1e-15));

  Rng rng(31);
  Vec z(3);
  for (double& v : z) v = rng.uniform(-2.0, 2.0);
  const double g0 = reduced_objective(p, l, z);
  Vec z_shift = z;
  for (double& v : z_shift) v += 3.7;
  CHECK(reduced_objective(p, l, z_shift) == doctest::Approx(g0).epsilon(1e-9));

  // conservation along the Laplacian range
  Vec x = vec_add(p.x0, matvec(l.matrix().mat(), z));
  CHECK(sum(x) == doctest::Approx(6.0).epsilon(1e-12));

  // gradient vs central differences
  Vec grad = reduced_gradient(p, l, z);
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Vec zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    const double fd = (reduced_objective(p, l, zp) - reduced_objective(p, l, zm)) / (2.0 * h);
    CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
  }
}

TEST_CASE("random_instance families and determinism") {
  auto p72 = random_instance(100, cost_family("sinusoidal"), 200.0, 17);
  CHECK(p72.n() == 100);
  CHECK(sum(p72.x0) == doctest::Approx(200.0).epsilon(1e-12));
  for (const auto& f : p72.costs) {
    CHECK(f.a >= 2.0);
    CHECK(f.a <= 4.0);
    CHECK(f.b >= -1.0);
    CHECK(f.b <= 1.0);
    CHECK(f.c >= 0.0);
    CHECK(f.c <= 1.0);
    CHECK(f.a - f.c > 0.0);
  }
  CHECK(p72.x0[0] == doctest::Approx(2.0));

  auto p73 = random_instance(40, cost_family("quad40"), 120.0, 3, BoxDistribution{});
  CHECK(p73.x0[7] == doctest::Approx(3.0));
  CHECK(p73.has_boxes());
  for (int i = 0; i < 40; ++i) {
    CHECK((*p73.x_lo)[i] >= 1.5);
    CHECK((*p73.x_lo)[i] <= 3.0);
    CHECK((*p73.x_hi)[i] >= 3.0);
    CHECK((*p73.x_hi)[i] <= 4.5);
  }

  auto again = random_instance(40, cost_family("quad40"), 120.0, 3, BoxDistribution{});
  CHECK(again.costs[11].a == p73.costs[11].a);
  CHECK((*again.x_hi)[23] == (*p73.x_hi)[23]);
}

TEST_CASE("dispatch problem invariant validation") {
  CHECK_THROWS_AS(make_dispatch_problem({make_quadratic(1, 0)}, 5.0, {4.0}), InvalidInput);
  // demand must sit strictly inside the box totals
  CHECK_THROWS_AS(make_dispatch_problem({make_quadratic(1, 0), make_quadratic(1, 0)}, 4.0, {2.0, 2.0},
                                        Vec{0.0, 0.0}, Vec{2.0, 2.0}),
                  InvalidInput);
  CHECK_NOTHROW(make_dispatch_problem_unchecked({make_quadratic(1, 0), make_quadratic(1, 0)}, 4.0,
                                                {2.0, 2.0}, Vec{0.0, 0.0}, Vec{2.0, 2.0}));
  CHECK_THROWS_AS(eval_f(three_node_nobox(), {1.0, 2.0}), InvalidInput);
}

TEST_CASE("instance json round trip") {
  auto p = random_instance(6, cost_family("sinusoidal"), 18.0, 8, BoxDistribution{});
  auto back = instance_from_json(instance_to_json(p));
  CHECK(back.n() == p.n());
  CHECK(back.demand == p.demand);
  for (int i = 0; i < 6; ++i) {
    CHECK(back.costs[i].a == p.costs[i].a);
    CHECK(back.costs[i].theta == p.costs[i].theta);
    CHECK((*back.x_lo)[i] == (*p.x_lo)[i]);
  }

  auto nobox = instance_from_json(instance_to_json(three_node_nobox()));
  CHECK_FALSE(nobox.has_boxes());
  CHECK(nobox.costs[2].a == 4.0);
}
