#pragma once

#include <optional>

#include "dana/graph.hpp"
#include "dana/problem.hpp"
#include "dana/reference.hpp"

namespace dana {

struct SaddleState {
  Vec z;
  Vec lambda;  // stacked [lower; upper] multipliers, size 2n, kept >= 0
  double t = 0.0;
};

// (grad_z L, grad_lambda L) of the box Lagrangian L(z, lambda) = g(z) + lambda^T P(z),
// with P(z) = [x_lo - x0 - Lz; x0 + Lz - x_hi].
struct LagrangianGrads {
  Vec grad_z;
  Vec p_of_z;
};
LagrangianGrads lagrangian_grads(const DispatchProblem& p, const WeightedLaplacian& l,
                                 const SaddleState& s);

// Componentwise projection [u]^+_lambda: passes u where lambda > 0, clamps to
// max(0, u) where lambda == 0.
Vec projected_dual_rate(const Vec& u, const Vec& lambda);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double compslack = 0.0;
  double max() const { return std::max(std::max(stationarity, primal), std::max(dual, compslack)); }
};
KktResiduals kkt_residuals(const DispatchProblem& p, const WeightedLaplacian& l, const SaddleState& s);

// Spectral data of I - L H L backing A_q^{-1} in the Lyapunov function.
struct AqSpectral {
  Vec eta;  // eigenvalues of I - L H L, ascending; the span(1) mode sits at 1
  Mat w;    // eigenvectors
};
AqSpectral aq_spectral(const WeightedLaplacian& l, const Vec& h);

struct LyapunovRecord {
  double v_q = 0.0;
  double primal_part = 0.0;  // (z - z*)^T A_q^{-1} (z - z*)
  double dual_part = 0.0;    // ||lambda - lambda*||^2
};
LyapunovRecord lyapunov_vq(const SaddleState& s, const Vec& z_star, const Vec& lambda_star,
                           const AqSpectral& spec, int q);

struct DanaCTraceRow {
  double t = 0.0;
  double primal_err = 0.0;
  double dual_err = 0.0;
  double v_q = 0.0;
  double obj_gap = 0.0;
  double feas_box = 0.0;
  double feas_sum = 0.0;
  double compslack = 0.0;
};

struct DanaCConfig {
  int q = 0;
  double h = 1e-3;
  double T = 50.0;
  Vec lambda0;                // defaults to zeros
  bool approx_quadratic = false;  // build A_q from H' = (H_delta + H_Delta)/2
  std::optional<OracleSolution> oracle;
  int trace_stride = 100;
};

struct DanaCResult {
  std::vector<DanaCTraceRow> trace;
  SaddleState state;
  Vec x;
  KktResiduals kkt;
  long long steps = 0;
  long long vq_violations = 0;   // steps whose V_Q rose beyond the integrator slack
  double vq_max_increase = 0.0;  // most positive per-step V_Q change observed
};

// Forward-Euler integration of  z' = -A_q grad_z L,  lambda' = [P(z)]^+_lambda
// with a post-step dual clamp.
DanaCResult integrate(const DispatchProblem& p, const WeightedLaplacian& l, const DanaCConfig& cfg);

struct Perturbation {
  double t = 0.0;
  double amplitude = 0.0;
};

struct RobustConfig {
  double h = 1e-3;
  double T = 100.0;
  // per-block flow gains; the equality-tracking speed is set mostly by how
  // strongly the z block re-injects high Laplacian modes
  double gain_x = 1.0;
  double gain_z = 1.0;
  double gain_nu = 1.0;
  double gain_lambda = 1.0;
  std::uint64_t noise_seed = 0;
  std::optional<Vec> x_init;  // defaults to p.x0; need not satisfy the demand
  std::optional<OracleSolution> oracle;
  int trace_stride = 100;
};

struct RobustResult {
  std::vector<DanaCTraceRow> trace;  // feas_sum column holds ||x + Lz - dbar||_inf
  Vec x, z, nu, lambda;
  long long steps = 0;
};

// Saddle-point flow on  f(x) + nu^T (x + Lz - dbar) + lambda^T [x_lo - x; x - x_hi],
// unit gains, projected dual ascent; additive state noise at the listed times.
RobustResult integrate_robust(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& dbar,
                              const RobustConfig& cfg, const std::vector<Perturbation>& perturbations);

std::string dana_c_trace_csv(const std::vector<DanaCTraceRow>& rows);

}  // namespace dana
