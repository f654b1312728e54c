#include "dana/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "json.hpp"

namespace dana {

GraphTopology::GraphTopology(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
  if (n < 2) throw InvalidInput("GraphTopology: need at least two nodes");
  std::set<std::pair<int, int>> seen;
  edges_.reserve(edges.size());
  adj_.assign(n, {});
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidInput("GraphTopology: node index out of range");
    if (i == j) throw InvalidInput("GraphTopology: self-loop");
    auto e = std::minmax(i, j);
    if (!seen.insert({e.first, e.second}).second) throw InvalidInput("GraphTopology: duplicate edge");
    edges_.emplace_back(e.first, e.second);
    adj_[e.first].push_back(e.second);
    adj_[e.second].push_back(e.first);
  }
  for (auto& a : adj_) std::sort(a.begin(), a.end());
  if (!is_connected()) throw InvalidInput("GraphTopology: graph is not connected");
}

bool GraphTopology::is_connected() const {
  std::vector<char> vis(n_, 0);
  std::queue<int> bfs;
  bfs.push(0);
  vis[0] = 1;
  int count = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    for (int v : adj_[u])
      if (!vis[v]) {
        vis[v] = 1;
        ++count;
        bfs.push(v);
      }
  }
  return count == n_;
}

WeightedLaplacian::WeightedLaplacian(GraphTopology g, Vec weights, std::optional<LaplacianMeta> meta,
                                     const NumericSettings& ns)
    : g_(std::move(g)), weights_(std::move(weights)), meta_(std::move(meta)) {
  if (static_cast<int>(weights_.size()) != g_.edge_count())
    throw InvalidInput("WeightedLaplacian: weight count does not match edge count");
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("WeightedLaplacian: weights must be positive");

  const int n = g_.n();
  Mat m(n, n);
  // Entrywise this is exactly E^T diag(w) E, accumulated in edge order.
  for (int e = 0; e < g_.edge_count(); ++e) {
    const auto [i, j] = g_.edges()[e];
    const double w = weights_[e];
    m(i, i) += w;
    m(j, j) += w;
    m(i, j) -= w;
    m(j, i) -= w;
  }
  m_ = SymMatrix(std::move(m), ns);
}

WeightedLaplacian WeightedLaplacian::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidInput("WeightedLaplacian::scaled: factor must be positive");
  Vec w = weights_;
  for (double& x : w) x *= factor;
  return WeightedLaplacian(g_, std::move(w), meta_);
}

GraphTopology random_connected(int n, int m, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("random_connected: n must be >= 2");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  if (m < n - 1 || m > max_edges) throw InvalidInput("random_connected: edge count infeasible");

  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> present;

  // Aldous-Broder walk on the complete graph gives a uniform spanning tree.
  std::vector<char> visited(n, 0);
  int current = rng.below(n);
  visited[current] = 1;
  int remaining = n - 1;
  while (remaining > 0) {
    int next = rng.below(n - 1);
    if (next >= current) ++next;
    if (!visited[next]) {
      visited[next] = 1;
      --remaining;
      auto e = std::minmax(current, next);
      edges.emplace_back(e.first, e.second);
      present.insert({e.first, e.second});
    }
    current = next;
  }

  while (static_cast<int>(edges.size()) < m) {
    const int i = rng.below(n);
    int j = rng.below(n - 1);
    if (j >= i) ++j;
    auto e = std::minmax(i, j);
    if (present.insert({e.first, e.second}).second) edges.emplace_back(e.first, e.second);
  }
  return GraphTopology(n, std::move(edges));
}

std::vector<int> khop_neighbors(const GraphTopology& g, int i, int k) {
  if (i < 0 || i >= g.n()) throw InvalidInput("khop_neighbors: node out of range");
  if (k < 1) throw InvalidInput("khop_neighbors: k must be >= 1");
  std::vector<int> dist(g.n(), -1);
  std::queue<int> bfs;
  bfs.push(i);
  dist[i] = 0;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    if (dist[u] >= k) continue;
    for (int v : g.neighbors(u))
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        bfs.push(v);
      }
  }
  std::vector<int> out;
  for (int v = 0; v < g.n(); ++v) {
    if (v == i) {
      // i re-enters its own 2-hop set through any incident edge
      if (k >= 2 && !g.neighbors(i).empty()) out.push_back(v);
    } else if (dist[v] >= 1 && dist[v] <= k) {
      out.push_back(v);
    }
  }
  return out;
}

Mat incidence(const GraphTopology& g) {
  Mat e(g.edge_count(), g.n());
  for (int r = 0; r < g.edge_count(); ++r) {
    e(r, g.edges()[r].first) = 1.0;
    e(r, g.edges()[r].second) = -1.0;
  }
  return e;
}

WeightedLaplacian assemble_laplacian(const GraphTopology& g, const Vec& weights, const NumericSettings& ns) {
  return WeightedLaplacian(g, weights, std::nullopt, ns);
}

WeightedLaplacian unweighted_laplacian(const GraphTopology& g, const NumericSettings& ns) {
  return WeightedLaplacian(g, Vec(g.edge_count(), 1.0), std::nullopt, ns);
}

std::string graph_to_json(const GraphTopology& g, const Vec* weights, const LaplacianMeta* meta) {
  nlohmann::json j;
  j["n"] = g.n();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  if (weights != nullptr) j["weights"] = *weights;
  if (meta != nullptr) {
    j["epsilon"] = meta->eps_design;
    j["beta"] = meta->beta;
    j["provenance"] = meta->provenance;
  }
  return j.dump(2);
}

namespace {

nlohmann::json parse(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, true);
  if (!j.is_object()) throw InvalidInput("graph json: expected an object");
  return j;
}

GraphTopology topology_of(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("edges")) throw InvalidInput("graph json: missing n or edges");
  const int n = j.at("n").get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw InvalidInput("graph json: bad edge entry");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return GraphTopology(n, std::move(edges));
}

}  // namespace

GraphTopology graph_from_json(const std::string& text) { return topology_of(parse(text)); }

WeightedLaplacian laplacian_from_json(const std::string& text, const NumericSettings& ns) {
  const nlohmann::json j = parse(text);
  GraphTopology g = topology_of(j);
  Vec w;
  if (j.contains("weights")) {
    w = j.at("weights").get<Vec>();
  } else {
    w.assign(g.edge_count(), 1.0);
  }
  std::optional<LaplacianMeta> meta;
  if (j.contains("epsilon")) {
    LaplacianMeta m;
    m.eps_design = j.at("epsilon").get<double>();
    m.beta = j.value("beta", 1.0);
    m.provenance = j.value("provenance", std::string{});
    meta = std::move(m);
  }
  return WeightedLaplacian(std::move(g), std::move(w), std::move(meta), ns);
}

}  // namespace dana
