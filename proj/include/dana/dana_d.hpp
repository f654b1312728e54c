#pragma once

#include <functional>
#include <optional>

#include "dana/graph.hpp"
#include "dana/problem.hpp"

namespace dana {

// Fixed-order sparse row view of a Laplacian: diagonal first, then neighbors
// ascending. The matrix-form solver and the per-agent simulator both apply
// rows through this kernel, which keeps their float sequences identical.
class SparseLap {
 public:
  explicit SparseLap(const WeightedLaplacian& l);

  int n() const { return static_cast<int>(diag_.size()); }
  double diag(int i) const { return diag_[i]; }
  const std::vector<std::pair<int, double>>& offdiag(int i) const { return off_[i]; }

  double row_apply(int i, const Vec& v) const {
    double s = diag_[i] * v[i];
    for (const auto& [j, w] : off_[i]) s += w * v[j];
    return s;
  }
  Vec apply(const Vec& v) const {
    Vec out(n());
    for (int i = 0; i < n(); ++i) out[i] = row_apply(i, v);
    return out;
  }

 private:
  Vec diag_;
  std::vector<std::vector<std::pair<int, double>>> off_;
};

enum class StepRule { fixed, theorem1_safe, theorem2_point };

struct DanaDConfig {
  int q = 0;
  StepRule rule = StepRule::theorem1_safe;
  double alpha = 0.0;    // used when rule == fixed
  double safety = 0.99;  // multiplier on the theorem-1 bound
  std::optional<double> epsilon;  // contraction metric; resolved from design
                                  // metadata or epsilon_of when absent
  Vec z0;  // initial accumulator; trajectories live on the 1^T z = 1^T z0 slice
  int max_iters = 100000;
  double grad_tol = 1e-10;  // infinity norm of grad g
  std::optional<double> f_star;
  bool conservative_rounds = false;  // count the dedicated gradient round too
  bool emit_timing = true;
  int trace_stride = 1;

  struct IterView {
    int iter;
    const Vec& z;
    const Vec& x;
    double grad_norm;
    double decrease;  // stable f(x_next) - f(x); 0 on the final iterate
  };
  std::function<void(const IterView&)> observer;
};

struct DanaDTraceRow {
  int iter = 0;
  double obj_gap = 0.0;
  double grad_norm = 0.0;
  double feas_err = 0.0;
  long long msgs = 0;  // cumulative one-hop communication rounds
  double elapsed_s = 0.0;
};

struct DanaDResult {
  std::vector<DanaDTraceRow> trace;
  Vec x;
  Vec z;
  int iters = 0;
  bool converged = false;
  double alpha_used = 0.0;
  double epsilon_used = 0.0;
  long long rounds_reported = 0;
  long long rounds_physical = 0;
  long long locality_reads = 0;
  long long locality_violations = 0;
};

// Theorem-1 step-size cap: 2(1-eps) / ((n-1)(1+eps)(1-eps^{q+1})).
double step_bound_thm1(double eps, int n, int q);

struct Thm2Rate {
  double alpha;  // the step the linear-rate statement is proved at
  double coeff;  // per-step bound is  g(z+) - g(z) <= -coeff * ||z - z*||^2
};
Thm2Rate rate_bound_thm2(double eps, int n, int q);

struct NewtonDirection {
  Vec z_step;      // \tilde z_nt, the accumulated series direction
  Vec x_direction; // L \tilde z_nt
};
// Truncated-series approximate Newton direction, computed by the recursion
// y <- (I - L H L) y with the final multiplication by L.
NewtonDirection newton_direction(const WeightedLaplacian& l, const Vec& h, const Vec& grad_f, int q);

// z+ = z - alpha A_q(z) grad g(z); x advances by the applied increments
// alpha L ztilde, mirroring the per-agent update.
DanaDResult run_matrix_form(const DispatchProblem& p, const WeightedLaplacian& l, const DanaDConfig& cfg);

// Per-agent synchronous message-passing realization of the same recursion.
// One-hop rounds are audited: every remote value consumed by agent i must
// originate inside its one- or two-hop neighborhood.
DanaDResult run_message_passing(const DispatchProblem& p, const WeightedLaplacian& l,
                                const DanaDConfig& cfg);

std::string dana_d_trace_csv(const DanaDResult& r);

}  // namespace dana
