#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dana/linalg.hpp"
#include "dana/numeric.hpp"

namespace dana {

// Undirected connected communication topology. Edge order is load-bearing:
// it fixes the incidence-matrix row order and therefore the weight layout.
class GraphTopology {
 public:
  GraphTopology(int n, std::vector<std::pair<int, int>> edges);

  int n() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }

  bool is_connected() const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;  // each stored as (min, max)
  std::vector<std::vector<int>> adj_;       // sorted ascending
};

struct LaplacianMeta {
  double eps_design = 0.0;
  double beta = 1.0;
  std::string provenance;
};

class WeightedLaplacian {
 public:
  WeightedLaplacian(GraphTopology g, Vec weights, std::optional<LaplacianMeta> meta = std::nullopt,
                    const NumericSettings& ns = {});

  const GraphTopology& graph() const { return g_; }
  const Vec& weights() const { return weights_; }
  const SymMatrix& matrix() const { return m_; }
  int n() const { return g_.n(); }
  const std::optional<LaplacianMeta>& meta() const { return meta_; }
  void set_meta(LaplacianMeta m) { meta_ = std::move(m); }

  // L scaled by a positive factor (same topology, scaled weights).
  WeightedLaplacian scaled(double factor) const;

 private:
  GraphTopology g_;
  Vec weights_;
  SymMatrix m_;
  std::optional<LaplacianMeta> meta_;
};

// Connected random graph: uniform random spanning tree (random-walk based)
// plus uniformly sampled extra non-edges until exactly m edges.
GraphTopology random_connected(int n, int m, std::uint64_t seed);

// Union-of-neighbors p-hop set, cumulative over 1..k hops. For k >= 2 the
// walk can return to i through any incident edge, so i itself is a member.
std::vector<int> khop_neighbors(const GraphTopology& g, int i, int k);

// Signed edge-node incidence matrix E: row r has +1 at edges[r].first and -1
// at edges[r].second.
Mat incidence(const GraphTopology& g);

WeightedLaplacian assemble_laplacian(const GraphTopology& g, const Vec& weights,
                                     const NumericSettings& ns = {});
WeightedLaplacian unweighted_laplacian(const GraphTopology& g, const NumericSettings& ns = {});

// JSON document {n, edges:[[i,j],...], weights:[...] optional}. Edge order in
// the file defines incidence row order.
std::string graph_to_json(const GraphTopology& g, const Vec* weights = nullptr,
                          const LaplacianMeta* meta = nullptr);
GraphTopology graph_from_json(const std::string& text);
WeightedLaplacian laplacian_from_json(const std::string& text, const NumericSettings& ns = {});

}  // namespace dana
