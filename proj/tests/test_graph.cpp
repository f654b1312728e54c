#include <set>

#include "doctest.h"
#include "dana/graph.hpp"
#include "test_util.hpp"

using namespace dana;
using namespace dana::testing;

namespace {

GraphTopology path3() { return GraphTopology(3, {{0, 1}, {1, 2}}); }

GraphTopology complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return GraphTopology(n, std::move(e));
}

// breadth-first oracle: nodes within distance k, self included for k >= 2
std::vector<int> khop_bfs_oracle(const GraphTopology& g, int start, int k) {
  std::vector<int> dist(g.n(), -1);
  dist[start] = 0;
  std::vector<int> frontier{start};
  for (int level = 0; level < k; ++level) {
    std::vector<int> next;
    for (int u : frontier)
      for (int v : g.neighbors(u))
        if (dist[v] < 0) {
          dist[v] = level + 1;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  std::vector<int> out;
  for (int v = 0; v < g.n(); ++v) {
    if (v == start) {
      if (k >= 2) out.push_back(v);
    } else if (dist[v] > 0) {
      out.push_back(v);
    }
  }
  return out;
}

// literal union-of-neighbors recursion, accumulated over p = 1..k
std::vector<int> khop_union_oracle(const GraphTopology& g, int start, int k) {
  std::set<int> level(g.neighbors(start).begin(), g.neighbors(start).end());
  std::set<int> all = level;
  for (int p = 2; p <= k; ++p) {
    std::set<int> next;
    for (int u : level) next.insert(g.neighbors(u).begin(), g.neighbors(u).end());
    all.insert(next.begin(), next.end());
    level = std::move(next);
  }
  return {all.begin(), all.end()};
}

double fiedler_value(const GraphTopology& g) {
  return eig_sym(unweighted_laplacian(g).matrix()).eigenvalues[1];
}

}  // namespace

TEST_CASE("random_connected basic contracts") {
  auto tree = random_connected(3, 2, 7);
  CHECK(tree.edge_count() == 2);
  CHECK(tree.is_connected());

  auto g = random_connected(10, 30, 1);
  CHECK(g.edge_count() == 30);
  CHECK(fiedler_value(g) > 1e-9);

  CHECK_THROWS_AS(random_connected(4, 7, 0), InvalidInput);
  CHECK_THROWS_AS(random_connected(5, 3, 0), InvalidInput);
}

TEST_CASE("random_connected is deterministic in the seed") {
  auto a = random_connected(12, 20, 99);
  auto b = random_connected(12, 20, 99);
  CHECK(a.edges() == b.edges());
  auto c = random_connected(12, 20, 100);
  CHECK(a.edges() != c.edges());
}

TEST_CASE("generated graphs have a simple zero eigenvalue") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed * 31 + 5);
    const int n = 4 + rng.below(20);
    const int max_m = n * (n - 1) / 2;
    const int m = std::min(max_m, n - 1 + rng.below(2 * n));
    auto g = random_connected(n, m, seed);
    auto evals = eig_sym(unweighted_laplacian(g).matrix()).eigenvalues;
    CHECK(std::abs(evals[0]) < 1e-9);
    CHECK(evals[1] > 1e-9);
  }
}

TEST_CASE("khop_neighbors on the path graph") {
  auto g = path3();
  CHECK(khop_neighbors(g, 0, 1) == std::vector<int>{1});
  CHECK(khop_neighbors(g, 0, 2) == std::vector<int>{0, 1, 2});
  CHECK(khop_neighbors(g, 1, 1) == std::vector<int>{0, 2});
}

TEST_CASE("khop_neighbors on the complete graph") {
  auto g = complete(4);
  CHECK(khop_neighbors(g, 0, 1) == std::vector<int>{1, 2, 3});
}

TEST_CASE("khop_neighbors matches both oracles on random graphs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = random_connected(15, 25, seed + 41);
    for (int i = 0; i < g.n(); ++i)
      for (int k = 1; k <= 3; ++k) {
        auto got = khop_neighbors(g, i, k);
        CHECK(got == khop_bfs_oracle(g, i, k));
        CHECK(got == khop_union_oracle(g, i, k));
      }
  }
}

TEST_CASE("assemble_laplacian single edge and path") {
  GraphTopology k2(2, {{0, 1}});
  auto l = assemble_laplacian(k2, {1.0});
  CHECK(l.matrix()(0, 0) == 1.0);
  CHECK(l.matrix()(0, 1) == -1.0);
  CHECK(l.matrix()(1, 1) == 1.0);

  auto lp = unweighted_laplacian(path3());
  CHECK(lp.matrix()(0, 0) == 1.0);
  CHECK(lp.matrix()(1, 1) == 2.0);
  CHECK(lp.matrix()(2, 2) == 1.0);
  CHECK(lp.matrix()(0, 1) == -1.0);
  CHECK(lp.matrix()(0, 2) == 0.0);
}

TEST_CASE("assemble_laplacian equals incidence factorization") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed + 1000);
    auto g = random_connected(9, 16, seed);
    Vec w(g.edge_count());
    for (double& x : w) x = rng.uniform(0.1, 3.0);
    auto l = assemble_laplacian(g, w);

    Mat e = incidence(g);
    Mat xe = e;
    for (int r = 0; r < e.rows(); ++r)
      for (int c = 0; c < e.cols(); ++c) xe(r, c) *= w[r];
    Mat etxe = matmul(transpose(e), xe);
    CHECK(max_entry_diff(l.matrix().mat(), etxe) <= 1e-14);

    // row sums vanish
    for (int i = 0; i < g.n(); ++i) {
      double s = 0.0;
      for (int j = 0; j < g.n(); ++j) s += l.matrix()(i, j);
      CHECK(std::abs(s) <= 1e-10);
    }
  }
}

TEST_CASE("assemble_laplacian rejects nonpositive weights") {
  GraphTopology k2(2, {{0, 1}});
  CHECK_THROWS_AS(assemble_laplacian(k2, {0.0}), InvalidInput);
  CHECK_THROWS_AS(assemble_laplacian(k2, {-1.0}), InvalidInput);
}

TEST_CASE("unweighted_laplacian K3 and star") {
  auto l3 = unweighted_laplacian(complete(3));
  for (int i = 0; i < 3; ++i) CHECK(l3.matrix()(i, i) == 2.0);
  CHECK(l3.matrix()(0, 1) == -1.0);

  GraphTopology star(4, {{0, 1}, {0, 2}, {0, 3}});
  auto ls = unweighted_laplacian(star);
  CHECK(ls.matrix()(0, 0) == 3.0);
  CHECK(ls.matrix()(1, 1) == 1.0);

  // K_n spectrum is {0, n, ..., n}
  auto evals = eig_sym(unweighted_laplacian(complete(6)).matrix()).eigenvalues;
  CHECK(std::abs(evals[0]) < 1e-12);
  for (int k = 1; k < 6; ++k) CHECK(evals[k] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("graph topology validation") {
  CHECK_THROWS_AS(GraphTopology(3, {{0, 0}}), InvalidInput);
  CHECK_THROWS_AS(GraphTopology(3, {{0, 1}, {1, 0}}), InvalidInput);
  CHECK_THROWS_AS(GraphTopology(3, {{0, 3}}), InvalidInput);
  CHECK_THROWS_AS(GraphTopology(4, {{0, 1}, {2, 3}}), InvalidInput);  // disconnected
}

TEST_CASE("graph json round trip preserves edge order and weights") {
  auto g = random_connected(8, 13, 77);
  Rng rng(3);
  Vec w(g.edge_count());
  for (double& x : w) x = rng.uniform(0.5, 2.0);

  auto text = graph_to_json(g, &w);
  auto back = laplacian_from_json(text);
  CHECK(back.graph().edges() == g.edges());
  CHECK(back.weights() == w);

  auto topo = graph_from_json(graph_to_json(g));
  CHECK(topo.edges() == g.edges());
}
