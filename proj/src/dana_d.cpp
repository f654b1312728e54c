#include "dana/dana_d.hpp"

#include <chrono>
#include <cstdio>

#include "dana/reduction.hpp"

namespace dana {

SparseLap::SparseLap(const WeightedLaplacian& l) {
  const int n = l.n();
  diag_.resize(n);
  off_.resize(n);
  const Mat& m = l.matrix().mat();
  for (int i = 0; i < n; ++i) {
    diag_[i] = m(i, i);
    for (int j : l.graph().neighbors(i)) off_[i].push_back({j, m(i, j)});
  }
}

double step_bound_thm1(double eps, int n, int q) {
  if (eps < 0.0) throw InvalidInput("step_bound_thm1: eps must be nonnegative");
  if (eps >= 1.0) throw AssumptionViolated("step_bound_thm1: eps must be below 1");
  if (n < 2) throw InvalidInput("step_bound_thm1: n must be >= 2");
  if (q < 0) throw InvalidInput("step_bound_thm1: q must be nonnegative");
  double eps_pow = 1.0;
  for (int k = 0; k <= q; ++k) eps_pow *= eps;
  return 2.0 * (1.0 - eps) / ((n - 1) * (1.0 + eps) * (1.0 - eps_pow));
}

Thm2Rate rate_bound_thm2(double eps, int n, int q) {
  if (eps < 0.0) throw InvalidInput("rate_bound_thm2: eps must be nonnegative");
  if (eps >= 1.0) throw AssumptionViolated("rate_bound_thm2: eps must be below 1");
  if (n < 2) throw InvalidInput("rate_bound_thm2: n must be >= 2");
  if (q < 0) throw InvalidInput("rate_bound_thm2: q must be nonnegative");
  double eps_pow_q1 = 1.0;  // eps^{q+1}
  double signed_pow = 1.0;  // (-eps)^q
  for (int k = 0; k <= q; ++k) eps_pow_q1 *= eps;
  for (int k = 0; k < q; ++k) signed_pow *= -eps;
  Thm2Rate r;
  r.alpha = (1.0 - eps) / ((n - 1) * (1.0 + eps) * (1.0 - eps_pow_q1));
  const double one_m = 1.0 - eps;
  const double one_p = 1.0 + eps;
  const double wobble = 1.0 + eps * signed_pow;
  r.coeff = (one_m * one_m * one_m * one_m) * (wobble * wobble) /
            (2.0 * (n - 1.0) * (n - 1.0) * (one_p * one_p * one_p) * (1.0 - eps_pow_q1 * eps_pow_q1));
  return r;
}

namespace {

// z-space series direction; both solver fronts reproduce this float order
Vec newton_z_step(const SparseLap& lap, const Vec& h, const Vec& grad_f, int q) {
  const int n = lap.n();
  Vec y = lap.apply(grad_f);  // L grad f == grad g
  Vec zt(n);
  for (int i = 0; i < n; ++i) zt[i] = -y[i];
  Vec u(n), v(n), w(n);
  for (int p = 1; p <= q; ++p) {
    u = lap.apply(y);
    for (int i = 0; i < n; ++i) v[i] = h[i] * u[i];
    for (int i = 0; i < n; ++i) w[i] = y[i] - lap.row_apply(i, v);  // (I - LHL) y
    y = w;
    for (int i = 0; i < n; ++i) zt[i] -= y[i];
  }
  return zt;
}

double resolve_epsilon(const DispatchProblem& p, const WeightedLaplacian& l, const DanaDConfig& cfg) {
  if (cfg.epsilon) return *cfg.epsilon;
  if (l.meta()) return l.meta()->eps_design;
  return epsilon_of(l, p.delta_bounds(), p.Delta_bounds()).value;
}

struct StepChoice {
  double alpha;
  double epsilon;
};

StepChoice resolve_step(const DispatchProblem& p, const WeightedLaplacian& l, const DanaDConfig& cfg) {
  StepChoice s{cfg.alpha, 0.0};
  if (cfg.rule == StepRule::fixed) {
    if (!(cfg.alpha > 0.0)) throw InvalidInput("dana_d: fixed step must be positive");
    return s;
  }
  s.epsilon = resolve_epsilon(p, l, cfg);
  if (cfg.rule == StepRule::theorem1_safe)
    s.alpha = cfg.safety * step_bound_thm1(s.epsilon, p.n(), cfg.q);
  else
    s.alpha = rate_bound_thm2(s.epsilon, p.n(), cfg.q).alpha;
  return s;
}

void check_shapes(const DispatchProblem& p, const WeightedLaplacian& l, const DanaDConfig& cfg) {
  if (p.n() != l.n()) throw InvalidInput("dana_d: instance and Laplacian dimension mismatch");
  if (cfg.q < 0) throw InvalidInput("dana_d: q must be nonnegative");
  if (p.has_boxes()) throw InvalidInput("dana_d: the discrete algorithm solves the box-free relaxation");
}

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DanaDTraceRow make_row(int iter, const DispatchProblem& p, const Vec& x, double gn, long long msgs,
                       const DanaDConfig& cfg, std::chrono::steady_clock::time_point t0) {
  DanaDTraceRow row;
  row.iter = iter;
  row.obj_gap = cfg.f_star ? eval_f(p, x) - *cfg.f_star : std::nan("");
  row.grad_norm = gn;
  row.feas_err = std::abs(sum(x) - p.demand);
  row.msgs = msgs;
  row.elapsed_s = cfg.emit_timing ? now_seconds(t0) : 0.0;
  return row;
}

}  // namespace

NewtonDirection newton_direction(const WeightedLaplacian& l, const Vec& h, const Vec& grad_f, int q) {
  if (static_cast<int>(h.size()) != l.n() || static_cast<int>(grad_f.size()) != l.n())
    throw InvalidInput("newton_direction: dimension mismatch");
  if (q < 0) throw InvalidInput("newton_direction: q must be nonnegative");
  SparseLap lap(l);
  NewtonDirection d;
  d.z_step = newton_z_step(lap, h, grad_f, q);
  d.x_direction = lap.apply(d.z_step);
  return d;
}

DanaDResult run_matrix_form(const DispatchProblem& p, const WeightedLaplacian& l, const DanaDConfig& cfg) {
  check_shapes(p, l, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const SparseLap lap(l);
  const int n = p.n();
  const StepChoice step = resolve_step(p, l, cfg);
  const long long rounds_per_iter = cfg.conservative_rounds ? 2LL * cfg.q + 2 : 2LL * cfg.q + 1;

  DanaDResult out;
  out.alpha_used = step.alpha;
  out.epsilon_used = step.epsilon;
  out.z.assign(n, 0.0);
  if (!cfg.z0.empty()) {
    if (static_cast<int>(cfg.z0.size()) != n) throw InvalidInput("dana_d: z0 size mismatch");
    out.z = cfg.z0;
  }

  // x advances by the applied increment alpha (L zt), never recomputed from
  // z; the stable objective difference is then exact for each (x, dx) pair
  Vec x(n), grad_f(n), h(n), dx(n);
  for (int i = 0; i < n; ++i) x[i] = p.x0[i] + lap.row_apply(i, out.z);
  int rising = 0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      grad_f[i] = p.costs[i].grad(x[i]);
      h[i] = p.costs[i].hess(x[i]);
    }
    const Vec grad_g = lap.apply(grad_f);
    const double gn = norm_inf(grad_g);

    out.iters = iter + 1;
    if (iter % cfg.trace_stride == 0 || gn <= cfg.grad_tol)
      out.trace.push_back(make_row(iter, p, x, gn, out.rounds_reported, cfg, t0));

    if (gn <= cfg.grad_tol) {
      out.converged = true;
      if (cfg.observer) cfg.observer({iter, out.z, x, gn, 0.0});
      break;
    }

    out.rounds_physical += 2LL * cfg.q + 2;
    out.rounds_reported += rounds_per_iter;

    const Vec zt = newton_z_step(lap, h, grad_f, cfg.q);
    for (int i = 0; i < n; ++i) dx[i] = step.alpha * lap.row_apply(i, zt);
    const double decrease = eval_f_diff(p, x, dx);
    if (cfg.observer) cfg.observer({iter, out.z, x, gn, decrease});
    rising = decrease > 0.0 ? rising + 1 : 0;
    if (rising >= 10) throw StepSizeTooLarge("dana_d: objective rose for 10 consecutive steps");
    for (int i = 0; i < n; ++i) out.z[i] += step.alpha * zt[i];
    for (int i = 0; i < n; ++i) x[i] += dx[i];
  }
  out.x = x;
  return out;
}

// ---------------------------------------------------------------------------
// Message-passing realization. Agents exchange values with one-hop neighbors
// only; two-hop data arrives by neighbor forwarding one round later. The
// harness records every remote read and flags origins outside N_i u N_i^2.
// ---------------------------------------------------------------------------

namespace {

struct Audit {
  std::vector<std::vector<char>> allowed;  // reader x origin
  long long reads = 0;
  long long violations = 0;

  void note(int reader, int origin) {
    ++reads;
    if (!allowed[reader][origin]) {
      ++violations;
      throw LocalityBreach("dana_d agents: read outside the two-hop neighborhood");
    }
  }
};

struct Agent {
  int id = 0;
  double x = 0.0;
  double grad = 0.0;
  double hess = 0.0;
  double y = 0.0;
  double ztilde = 0.0;
  double zacc = 0.0;
  Vec grad_in, hess_in, y_in, zt_in;  // received values, indexed by origin
  std::vector<char> has_y;
};

}  // namespace

DanaDResult run_message_passing(const DispatchProblem& p, const WeightedLaplacian& l,
                                const DanaDConfig& cfg) {
  check_shapes(p, l, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const SparseLap lap(l);
  const GraphTopology& g = l.graph();
  const int n = p.n();
  const StepChoice step = resolve_step(p, l, cfg);
  const long long rounds_per_iter = cfg.conservative_rounds ? 2LL * cfg.q + 2 : 2LL * cfg.q + 1;

  Audit audit;
  audit.allowed.assign(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    audit.allowed[i][i] = 1;
    for (int j : khop_neighbors(g, i, 2)) audit.allowed[i][j] = 1;
  }

  Vec z_init(n, 0.0);
  if (!cfg.z0.empty()) {
    if (static_cast<int>(cfg.z0.size()) != n) throw InvalidInput("dana_d: z0 size mismatch");
    z_init = cfg.z0;
  }
  std::vector<Agent> agents(n);
  for (int i = 0; i < n; ++i) {
    agents[i].id = i;
    agents[i].zacc = z_init[i];
    agents[i].x = p.x0[i] + lap.row_apply(i, z_init);
    agents[i].grad_in.assign(n, 0.0);
    agents[i].hess_in.assign(n, 0.0);
    agents[i].y_in.assign(n, 0.0);
    agents[i].zt_in.assign(n, 0.0);
    agents[i].has_y.assign(n, 0);
  }

  DanaDResult out;
  out.alpha_used = step.alpha;
  out.epsilon_used = step.epsilon;

  Vec x_start(n);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    for (auto& a : agents) {
      x_start[a.id] = a.x;
      a.grad = p.costs[a.id].grad(a.x);
      a.hess = p.costs[a.id].hess(a.x);
      a.grad_in[a.id] = a.grad;
      a.hess_in[a.id] = a.hess;
    }

    // round: gradients and Hessians to one-hop neighbors
    ++out.rounds_physical;
    for (const auto& a : agents)
      for (int j : g.neighbors(a.id)) {
        agents[j].grad_in[a.id] = a.grad;
        agents[j].hess_in[a.id] = a.hess;
      }

    // y_i = (L grad f)_i in the shared row order
    for (auto& a : agents) {
      double s = lap.diag(a.id) * a.grad_in[a.id];
      for (const auto& [j, w] : lap.offdiag(a.id)) {
        audit.note(a.id, j);
        s += w * a.grad_in[j];
      }
      a.y = s;
      a.ztilde = -a.y;
    }

    double gn = 0.0;
    for (const auto& a : agents) gn = std::max(gn, std::abs(a.y));

    out.iters = iter + 1;
    if (iter % cfg.trace_stride == 0 || gn <= cfg.grad_tol)
      out.trace.push_back(make_row(iter, p, x_start, gn, out.rounds_reported, cfg, t0));

    if (gn <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    out.rounds_physical += 2LL * cfg.q + 1;  // q two-hop stages plus the z round below
    out.rounds_reported += rounds_per_iter;

    for (int pstep = 1; pstep <= cfg.q; ++pstep) {
      for (auto& a : agents) {
        std::fill(a.has_y.begin(), a.has_y.end(), 0);
        a.y_in[a.id] = a.y;
        a.has_y[a.id] = 1;
      }
      // two one-hop rounds move the current y stage out to two hops
      for (const auto& a : agents)
        for (int j : g.neighbors(a.id)) {
          agents[j].y_in[a.id] = a.y;
          agents[j].has_y[a.id] = 1;
        }
      for (int j = 0; j < n; ++j)
        for (int k : g.neighbors(j))
          for (int origin : g.neighbors(k))
            if (!agents[j].has_y[origin]) {
              agents[j].y_in[origin] = agents[k].y_in[origin];
              agents[j].has_y[origin] = 1;
            }

      // w_i = y_i - (L H (L y))_i using one-hop Hessians and forwarded y
      Vec w_next(n);
      for (auto& a : agents) {
        const int i = a.id;
        auto v_of = [&](int k) {
          double uk = lap.diag(k) * a.y_in[k];
          for (const auto& [j, wkj] : lap.offdiag(k)) {
            audit.note(i, j);
            if (!a.has_y[j]) throw LocalityBreach("dana_d agents: missing forwarded y value");
            uk += wkj * a.y_in[j];
          }
          return a.hess_in[k] * uk;
        };
        double s = lap.diag(i) * v_of(i);
        for (const auto& [j, wij] : lap.offdiag(i)) {
          audit.note(i, j);
          s += wij * v_of(j);
        }
        w_next[i] = a.y - s;
      }
      for (auto& a : agents) {
        a.y = w_next[a.id];
        a.ztilde -= a.y;
      }
    }

    // z round: exchange the step directions, apply the local x increment
    for (auto& a : agents) a.zt_in[a.id] = a.ztilde;
    for (const auto& a : agents)
      for (int j : g.neighbors(a.id)) agents[j].zt_in[a.id] = a.ztilde;
    for (auto& a : agents) {
      double s = lap.diag(a.id) * a.zt_in[a.id];
      for (const auto& [j, w] : lap.offdiag(a.id)) {
        audit.note(a.id, j);
        s += w * a.zt_in[j];
      }
      const double dx = step.alpha * s;
      a.x += dx;
      a.zacc += step.alpha * a.ztilde;
    }
  }

  out.z.resize(n);
  out.x.resize(n);
  for (int i = 0; i < n; ++i) {
    out.z[i] = agents[i].zacc;
    out.x[i] = agents[i].x;
  }
  if (out.converged)
    for (int i = 0; i < n; ++i) out.x[i] = x_start[i];
  out.locality_reads = audit.reads;
  out.locality_violations = audit.violations;
  return out;
}

std::string dana_d_trace_csv(const DanaDResult& r) {
  std::string out = "iter,obj_gap,grad_norm,feas_err,msgs,elapsed_s\n";
  char buf[256];
  for (const auto& row : r.trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%lld,%.6f\n", row.iter, row.obj_gap,
                  row.grad_norm, row.feas_err, row.msgs, row.elapsed_s);
    out += buf;
  }
  return out;
}

}  // namespace dana
