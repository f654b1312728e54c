#pragma once

#include <optional>
#include <string>

#include "dana/graph.hpp"
#include "dana/problem.hpp"

namespace dana {

// Ground-truth optimizer of a dispatch instance. active_set holds one entry
// per node: -1 at the lower bound, 0 free, +1 at the upper bound.
struct OracleSolution {
  Vec x_star;
  Vec z_star;  // empty until attach_z_star is called
  Vec lambda_star;  // stacked [lower; upper], size 2n
  double nu_star = 0.0;
  std::vector<int> active_set;
  double f_star = 0.0;
  std::string method;
};

// Closed form for quadratic costs without boxes:
//   x* = H^{-1}(nu 1 - b),  nu = (d + 1^T H^{-1} b) / (1^T H^{-1} 1).
OracleSolution solve_equality_qp(const DispatchProblem& p);

// Scalar dual solve for general strongly convex costs, boxes optional:
// x_i(nu) = clamp((f_i')^{-1}(nu)); sum x_i(nu) is monotone in nu.
OracleSolution solve_dual(const DispatchProblem& p);

// Active-set enumeration (free / lower / upper per node, 3^n cases) for
// quadratic box-constrained instances, n <= 12. The KKT-consistent candidate
// is unique by strong convexity.
OracleSolution solve_box_qp_bruteforce(const DispatchProblem& p);

// Fills z_star as the representative of L z = x* - x0 with 1^T z = omega.
void attach_z_star(OracleSolution& sol, const DispatchProblem& p, const WeightedLaplacian& l,
                   double omega = 0.0);

struct DanaDConfig;
struct DanaDResult;

// First-order baseline: z+ = z - alpha grad g(z), one communication round per
// iteration. With A_0 = I this is the q = 0 approximate-Newton recursion, so
// the engine is shared and the traces agree exactly.
DanaDResult run_dgd(const DispatchProblem& p, const WeightedLaplacian& l, DanaDConfig cfg);

struct KktReport {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double compslack = 0.0;
  double max() const;
};

// KKT residuals of a candidate (x, nu, lambda) for the boxed problem.
KktReport kkt_report(const DispatchProblem& p, const Vec& x, double nu, const Vec& lambda);

std::string oracle_to_json(const OracleSolution& s);

}  // namespace dana
