#include "dana/dana_c.hpp"

#include <cstdio>

#include "dana/dana_d.hpp"
#include "dana/reduction.hpp"

namespace dana {

namespace {

Vec hessian_for_flow(const DispatchProblem& p, bool approx_quadratic) {
  const int n = p.n();
  Vec h(n);
  if (approx_quadratic) {
    for (int i = 0; i < n; ++i) h[i] = 0.5 * (p.costs[i].delta() + p.costs[i].Delta());
  } else {
    if (!p.is_quadratic())
      throw InvalidInput("dana_c: quadratic costs required (or enable the approximately-quadratic mode)");
    for (int i = 0; i < n; ++i) h[i] = p.costs[i].a;
  }
  return h;
}

// acc = sum_{p=0}^{q} (I - L H L)^p u, applied by the matrix-vector recursion
Vec apply_aq(const SparseLap& lap, const Vec& h, const Vec& u, int q) {
  const int n = lap.n();
  Vec acc = u;
  Vec cur = u;
  Vec t1(n), t2(n);
  for (int p = 1; p <= q; ++p) {
    t1 = lap.apply(cur);
    for (int i = 0; i < n; ++i) t2[i] = h[i] * t1[i];
    for (int i = 0; i < n; ++i) t1[i] = cur[i] - lap.row_apply(i, t2);
    cur = t1;
    for (int i = 0; i < n; ++i) acc[i] += cur[i];
  }
  return acc;
}

void require_boxes(const DispatchProblem& p) {
  if (!p.has_boxes()) throw InvalidInput("dana_c: box bounds required");
}

}  // namespace

LagrangianGrads lagrangian_grads(const DispatchProblem& p, const WeightedLaplacian& l,
                                 const SaddleState& s) {
  require_boxes(p);
  const int n = p.n();
  if (static_cast<int>(s.z.size()) != n || static_cast<int>(s.lambda.size()) != 2 * n)
    throw InvalidInput("lagrangian_grads: state dimension mismatch");
  const Mat& lm = l.matrix().mat();
  Vec x = vec_add(p.x0, matvec(lm, s.z));
  Vec inner = eval_grad(p, x);
  for (int i = 0; i < n; ++i) inner[i] += s.lambda[n + i] - s.lambda[i];

  LagrangianGrads out;
  out.grad_z = matvec(lm, inner);  // grad g + [-L L] lambda, both carry a factor L
  out.p_of_z.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    out.p_of_z[i] = (*p.x_lo)[i] - x[i];
    out.p_of_z[n + i] = x[i] - (*p.x_hi)[i];
  }
  return out;
}

Vec projected_dual_rate(const Vec& u, const Vec& lambda) {
  if (u.size() != lambda.size()) throw InvalidInput("projected_dual_rate: size mismatch");
  Vec rate(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    if (lambda[i] < -1e-12) throw StateCorruption("projected_dual_rate: negative multiplier");
    rate[i] = lambda[i] > 0.0 ? u[i] : std::max(0.0, u[i]);
  }
  return rate;
}

KktResiduals kkt_residuals(const DispatchProblem& p, const WeightedLaplacian& l, const SaddleState& s) {
  const auto grads = lagrangian_grads(p, l, s);
  KktResiduals r;
  r.stationarity = norm_inf(grads.grad_z);
  for (size_t i = 0; i < grads.p_of_z.size(); ++i) {
    r.primal = std::max(r.primal, grads.p_of_z[i]);
    r.dual = std::max(r.dual, -s.lambda[i]);
    r.compslack = std::max(r.compslack, std::abs(s.lambda[i] * grads.p_of_z[i]));
  }
  r.primal = std::max(r.primal, 0.0);
  r.dual = std::max(r.dual, 0.0);
  return r;
}

AqSpectral aq_spectral(const WeightedLaplacian& l, const Vec& h) {
  const int n = l.n();
  const Mat& lm = l.matrix().mat();
  Mat hl(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hl(i, j) = h[i] * lm(i, j);
  Mat residual = mat_sub(Mat::identity(n), matmul(lm, hl));  // I - L H L
  auto d = eig_sym(SymMatrix(std::move(residual)));
  return AqSpectral{std::move(d.eigenvalues), std::move(d.eigenvectors)};
}

LyapunovRecord lyapunov_vq(const SaddleState& s, const Vec& z_star, const Vec& lambda_star,
                           const AqSpectral& spec, int q) {
  const int n = static_cast<int>(z_star.size());
  LyapunovRecord rec;
  Vec dz = vec_sub(s.z, z_star);
  for (int k = 0; k < n; ++k) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += spec.w(i, k) * dz[i];
    const double eta = spec.eta[k];
    // A_q eigenvalue is the geometric sum; the span(1) mode (eta = 1) gives q+1
    double inv_factor;
    if (std::abs(1.0 - eta) < 1e-9) {
      inv_factor = 1.0 / (q + 1.0);
    } else {
      double eta_pow = 1.0;
      for (int p = 0; p <= q; ++p) eta_pow *= eta;
      inv_factor = (1.0 - eta) / (1.0 - eta_pow);
    }
    rec.primal_part += inv_factor * c * c;
  }
  Vec dl = vec_sub(s.lambda, lambda_star);
  rec.dual_part = dot(dl, dl);
  rec.v_q = 0.5 * (rec.primal_part + rec.dual_part);
  return rec;
}

DanaCResult integrate(const DispatchProblem& p, const WeightedLaplacian& l, const DanaCConfig& cfg) {
  require_boxes(p);
  if (p.n() != l.n()) throw InvalidInput("dana_c: dimension mismatch");
  if (!(cfg.h > 0.0) || !(cfg.T > 0.0)) throw InvalidInput("dana_c: h and T must be positive");
  const int n = p.n();
  const SparseLap lap(l);
  const Vec h_flow = hessian_for_flow(p, cfg.approx_quadratic);

  SaddleState s;
  s.z.assign(n, 0.0);
  s.lambda = cfg.lambda0.empty() ? Vec(2 * n, 0.0) : cfg.lambda0;
  if (static_cast<int>(s.lambda.size()) != 2 * n) throw InvalidInput("dana_c: lambda0 size mismatch");
  for (double v : s.lambda)
    if (v < 0.0) throw InvalidInput("dana_c: lambda0 must be nonnegative");

  std::optional<AqSpectral> spec;
  if (cfg.oracle) spec = aq_spectral(l, h_flow);

  DanaCResult out;
  const long long steps = static_cast<long long>(std::llround(cfg.T / cfg.h));
  Vec x(n), grad_f(n), inner(n), p_of_z(2 * n);
  double prev_vq = 0.0;
  int rising = 0;

  auto record = [&](double t_now) {
    DanaCTraceRow row;
    row.t = t_now;
    row.feas_sum = std::abs(sum(x) - p.demand);
    double box = 0.0, cs = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      box = std::max(box, p_of_z[i]);
      cs = std::max(cs, std::abs(s.lambda[i] * p_of_z[i]));
    }
    row.feas_box = std::max(box, 0.0);
    row.compslack = cs;
    if (cfg.oracle) {
      row.primal_err = norm2(vec_sub(x, cfg.oracle->x_star));
      row.dual_err = norm2(vec_sub(s.lambda, cfg.oracle->lambda_star));
      row.obj_gap = eval_f(p, x) - cfg.oracle->f_star;
      row.v_q = lyapunov_vq(s, cfg.oracle->z_star, cfg.oracle->lambda_star, *spec, cfg.q).v_q;
    } else {
      row.primal_err = row.dual_err = row.v_q = row.obj_gap = std::nan("");
    }
    out.trace.push_back(row);
  };

  for (long long k = 0; k <= steps; ++k) {
    s.t = k * cfg.h;
    for (int i = 0; i < n; ++i) x[i] = p.x0[i] + lap.row_apply(i, s.z);
    for (int i = 0; i < n; ++i) grad_f[i] = p.costs[i].grad(x[i]);
    for (int i = 0; i < n; ++i) inner[i] = grad_f[i] + s.lambda[n + i] - s.lambda[i];
    for (int i = 0; i < n; ++i) p_of_z[i] = (*p.x_lo)[i] - x[i];
    for (int i = 0; i < n; ++i) p_of_z[n + i] = x[i] - (*p.x_hi)[i];

    if (cfg.oracle) {
      const double vq = lyapunov_vq(s, cfg.oracle->z_star, cfg.oracle->lambda_star, *spec, cfg.q).v_q;
      if (k > 0) {
        const double rise = vq - prev_vq;
        out.vq_max_increase = std::max(out.vq_max_increase, rise);
        if (rise > 1e-8 * cfg.h) ++out.vq_violations;
        rising = (!std::isfinite(vq) || rise > 1e-6 * cfg.h) ? rising + 1 : 0;
        if (rising >= 100) throw StepTooLarge("dana_c: Lyapunov value keeps rising; reduce the step");
      }
      prev_vq = vq;
    }

    if (k % cfg.trace_stride == 0 || k == steps) record(s.t);
    if (k == steps) break;

    Vec grad_z = lap.apply(inner);
    Vec dz = apply_aq(lap, h_flow, grad_z, cfg.q);
    Vec dual_rate = projected_dual_rate(p_of_z, s.lambda);
    for (int i = 0; i < n; ++i) s.z[i] -= cfg.h * dz[i];
    for (int i = 0; i < 2 * n; ++i) s.lambda[i] = std::max(0.0, s.lambda[i] + cfg.h * dual_rate[i]);
  }

  out.steps = steps;
  out.state = s;
  out.x = x;
  out.kkt = kkt_residuals(p, l, s);
  return out;
}

RobustResult integrate_robust(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& dbar,
                              const RobustConfig& cfg, const std::vector<Perturbation>& perturbations) {
  require_boxes(p);
  if (p.n() != l.n()) throw InvalidInput("dana_c robust: dimension mismatch");
  if (static_cast<int>(dbar.size()) != p.n()) throw InvalidInput("dana_c robust: dbar size mismatch");
  if (std::abs(sum(dbar) - p.demand) > 1e-9 * std::max(1.0, std::abs(p.demand)))
    throw InvalidInput("dana_c robust: dbar must sum to the demand");

  const int n = p.n();
  const SparseLap lap(l);
  Rng rng(cfg.noise_seed);

  RobustResult out;
  out.x = cfg.x_init ? *cfg.x_init : p.x0;
  out.z.assign(n, 0.0);
  out.nu.assign(n, 0.0);
  out.lambda.assign(2 * n, 0.0);

  const long long steps = static_cast<long long>(std::llround(cfg.T / cfg.h));
  size_t next_pert = 0;
  Vec viol(n), dual_rate(2 * n), p_box(2 * n);

  auto record = [&](double t_now) {
    DanaCTraceRow row;
    row.t = t_now;
    row.feas_sum = norm_inf(viol);  // robust equality metric ||x + Lz - dbar||_inf
    double box = 0.0, cs = 0.0;
    for (int i = 0; i < n; ++i) {
      p_box[i] = (*p.x_lo)[i] - out.x[i];
      p_box[n + i] = out.x[i] - (*p.x_hi)[i];
    }
    for (int i = 0; i < 2 * n; ++i) {
      box = std::max(box, p_box[i]);
      cs = std::max(cs, std::abs(out.lambda[i] * p_box[i]));
    }
    row.feas_box = std::max(box, 0.0);
    row.compslack = cs;
    if (cfg.oracle) {
      row.primal_err = norm2(vec_sub(out.x, cfg.oracle->x_star));
      double dd = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dnu = out.nu[i] - (-cfg.oracle->nu_star);
        dd += dnu * dnu;
      }
      Vec dl = vec_sub(out.lambda, cfg.oracle->lambda_star);
      row.dual_err = std::sqrt(dd + dot(dl, dl));
      row.obj_gap = eval_f(p, out.x) - cfg.oracle->f_star;
      row.v_q = 0.5 * (row.primal_err * row.primal_err + dd + dot(dl, dl));
    } else {
      row.primal_err = row.dual_err = row.v_q = row.obj_gap = std::nan("");
    }
    out.trace.push_back(row);
  };

  for (long long k = 0; k <= steps; ++k) {
    const double t_now = k * cfg.h;
    while (next_pert < perturbations.size() && t_now >= perturbations[next_pert].t) {
      const double amp = perturbations[next_pert].amplitude;
      for (int i = 0; i < n; ++i) out.x[i] += rng.uniform(-amp, amp);
      for (int i = 0; i < n; ++i) out.z[i] += rng.uniform(-amp, amp);
      ++next_pert;
    }

    Vec lz = lap.apply(out.z);
    for (int i = 0; i < n; ++i) viol[i] = out.x[i] + lz[i] - dbar[i];

    if (k % cfg.trace_stride == 0 || k == steps) record(t_now);
    if (k == steps) break;

    // descent in (x, z), ascent in nu, projected ascent in lambda, unit gains
    Vec grad_x(n);
    for (int i = 0; i < n; ++i)
      grad_x[i] = p.costs[i].grad(out.x[i]) + out.nu[i] - out.lambda[i] + out.lambda[n + i];
    Vec grad_z = lap.apply(out.nu);
    for (int i = 0; i < n; ++i) {
      p_box[i] = (*p.x_lo)[i] - out.x[i];
      p_box[n + i] = out.x[i] - (*p.x_hi)[i];
    }
    dual_rate = projected_dual_rate(p_box, out.lambda);

    for (int i = 0; i < n; ++i) out.x[i] -= cfg.h * cfg.gain_x * grad_x[i];
    for (int i = 0; i < n; ++i) out.z[i] -= cfg.h * cfg.gain_z * grad_z[i];
    for (int i = 0; i < n; ++i) out.nu[i] += cfg.h * cfg.gain_nu * viol[i];
    for (int i = 0; i < 2 * n; ++i)
      out.lambda[i] = std::max(0.0, out.lambda[i] + cfg.h * cfg.gain_lambda * dual_rate[i]);
  }
  out.steps = steps;
  return out;
}

std::string dana_c_trace_csv(const std::vector<DanaCTraceRow>& rows) {
  std::string out = "t,primal_err,dual_err,V_Q,obj_gap,feas_box,feas_sum,compslack\n";
  char buf[320];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.t,
                  row.primal_err, row.dual_err, row.v_q, row.obj_gap, row.feas_box, row.feas_sum,
                  row.compslack);
    out += buf;
  }
  return out;
}

}  // namespace dana
