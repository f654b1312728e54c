#pragma once

#include <optional>
#include <string>

#include "dana/graph.hpp"
#include "dana/reduction.hpp"

namespace dana {

struct DesignDiagnostics {
  int bisection_steps = 0;
  long long projection_sweeps = 0;
  double probe_residual = 0.0;     // residual of the accepted probe
  double lmi_min_eig_first = 0.0;  // smallest eigenvalue of the returned constraint blocks
  double lmi_min_eig_second = 0.0;
  bool bracket_extended = false;   // objective bracket grew past 1
  bool weights_floored = false;
};

struct P4Solution {
  Vec weights;  // edge weights, entrywise >= 0
  double eps_minus = 0.0;
  double eps_plus = 0.0;
  DesignDiagnostics diag;
};

// Convex approximation of the bilinear weight-design problem: bisection on
// the common level of (eps_-, eps_+) with an LMI feasibility probe run by
// Dykstra-corrected alternating projections.
P4Solution solve_p4(const GraphTopology& g, const Vec& delta, const Vec& Delta,
                    const NumericSettings& ns = {});

struct DesignResult {
  WeightedLaplacian L_star;
  EpsilonMetric eps_Lstar;     // measured at the design-time bounds
  double beta = 0.0;
  double eps_pre = 0.0;        // metric of L0 before scaling
  double eps_minus = 0.0;      // P4 certificate levels (post_scale alone leaves them 0)
  double eps_plus = 0.0;
  std::optional<double> eps_local;  // metric at the true local bounds (global mode)
  DesignDiagnostics diag;
};

// beta = sqrt(2 / (mu_1(M_delta0) + mu_{n-1}(M_Delta0))); L* = beta L0. The
// scaled metric balances the two spectral deviations and is always < 1.
DesignResult post_scale(const WeightedLaplacian& l0, const Vec& delta, const Vec& Delta,
                        const NumericSettings& ns = {});

struct LowerBoundResult {
  double eps_A = 0.0;
  Mat A_star;
  DesignDiagnostics diag;
};

// Best-case bound: the same spectral box over all symmetric A with a fixed
// sparsity mask, zero row sums, and A PSD. pattern_hops selects the mask:
// 1 keeps the graph sparsity (the mask the reference design statistics
// correspond to), 2 widens it to the squared-graph sparsity of L H L.
LowerBoundResult solve_p5(const GraphTopology& g, const NumericSettings& ns = {}, int pattern_hops = 1);

enum class BoundsMode { local, global };

// Full pipeline: P4 then post-scaling. Global mode substitutes the scalar
// bounds min(delta), max(Delta) for the local ones.
DesignResult design(const GraphTopology& g, const Vec& delta, const Vec& Delta,
                    BoundsMode mode = BoundsMode::local, const NumericSettings& ns = {});

std::string design_result_to_json(const DesignResult& r, std::optional<double> eps_A = std::nullopt);

}  // namespace dana
