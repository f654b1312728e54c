#include "dana/reference.hpp"

#include "dana/dana_d.hpp"

#include <algorithm>

#include "json.hpp"

namespace dana {

namespace {

// (f_i')^{-1}(nu) by safeguarded Newton; f_i' is strictly increasing because
// a - c > 0.
double invert_grad(const CostFunction& f, double nu) {
  if (f.c == 0.0) return (nu - f.b) / f.a;
  double lo = (nu - f.b - f.c) / f.a;
  double hi = (nu - f.b + f.c) / f.a;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = f.grad(x) - nu;
    if (g > 0.0)
      hi = x;
    else
      lo = x;
    const double h = f.hess(x);
    double step = g / h;
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double clamp_to_box(const DispatchProblem& p, int i, double v) {
  if (!p.has_boxes()) return v;
  return std::min(std::max(v, (*p.x_lo)[i]), (*p.x_hi)[i]);
}

Vec allocation_at(const DispatchProblem& p, double nu) {
  Vec x(p.n());
  for (int i = 0; i < p.n(); ++i) x[i] = clamp_to_box(p, i, invert_grad(p.costs[i], nu));
  return x;
}

void finish(OracleSolution& s, const DispatchProblem& p) {
  const int n = p.n();
  s.lambda_star.assign(2 * n, 0.0);
  s.active_set.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const double gi = p.costs[i].grad(s.x_star[i]);
    if (p.has_boxes()) {
      const double at_lo = std::abs(s.x_star[i] - (*p.x_lo)[i]);
      const double at_hi = std::abs(s.x_star[i] - (*p.x_hi)[i]);
      const double span = (*p.x_hi)[i] - (*p.x_lo)[i];
      if (at_lo <= 1e-12 * std::max(1.0, span) && gi - s.nu_star > 0.0) {
        s.active_set[i] = -1;
        s.lambda_star[i] = gi - s.nu_star;
      } else if (at_hi <= 1e-12 * std::max(1.0, span) && s.nu_star - gi > 0.0) {
        s.active_set[i] = 1;
        s.lambda_star[n + i] = s.nu_star - gi;
      }
    }
  }
  s.f_star = eval_f(p, s.x_star);
}

}  // namespace

OracleSolution solve_equality_qp(const DispatchProblem& p) {
  if (!p.is_quadratic()) throw InvalidInput("solve_equality_qp: quadratic costs required");
  const int n = p.n();
  double inv_sum = 0.0;
  double b_over_a = 0.0;
  for (int i = 0; i < n; ++i) {
    inv_sum += 1.0 / p.costs[i].a;
    b_over_a += p.costs[i].b / p.costs[i].a;
  }
  OracleSolution s;
  s.method = "equality-closed-form";
  s.nu_star = (p.demand + b_over_a) / inv_sum;
  s.x_star.resize(n);
  for (int i = 0; i < n; ++i) s.x_star[i] = (s.nu_star - p.costs[i].b) / p.costs[i].a;
  finish(s, p);
  return s;
}

OracleSolution solve_dual(const DispatchProblem& p) {
  // Bracket nu so that sum x(nu) straddles the demand.
  double lo = p.costs[0].grad(p.x0[0]);
  double hi = lo;
  for (int i = 0; i < p.n(); ++i) {
    lo = std::min(lo, p.costs[i].grad(p.x0[i]));
    hi = std::max(hi, p.costs[i].grad(p.x0[i]));
  }
  double width = std::max(1.0, hi - lo);
  for (int it = 0; it < 200 && sum(allocation_at(p, lo)) > p.demand; ++it) lo -= width;
  for (int it = 0; it < 200 && sum(allocation_at(p, hi)) < p.demand; ++it) hi += width;
  if (sum(allocation_at(p, lo)) > p.demand || sum(allocation_at(p, hi)) < p.demand)
    throw InfeasibleOrDegenerate("solve_dual: demand outside reachable range");

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sum(allocation_at(p, mid)) < p.demand)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  OracleSolution s;
  s.method = "scalar-dual";
  s.nu_star = 0.5 * (lo + hi);
  s.x_star = allocation_at(p, s.nu_star);
  finish(s, p);
  return s;
}

OracleSolution solve_box_qp_bruteforce(const DispatchProblem& p) {
  if (!p.is_quadratic()) throw InvalidInput("solve_box_qp_bruteforce: quadratic costs required");
  if (!p.has_boxes()) throw InvalidInput("solve_box_qp_bruteforce: instance has no boxes");
  const int n = p.n();
  if (n > 12) throw InvalidInput("solve_box_qp_bruteforce: capped at n <= 12");
  if (!(sum(*p.x_lo) < p.demand && p.demand < sum(*p.x_hi)))
    throw InfeasibleOrDegenerate("solve_box_qp_bruteforce: demand not strictly inside box totals");

  const Vec& lo = *p.x_lo;
  const Vec& hi = *p.x_hi;
  long long cases = 1;
  for (int i = 0; i < n; ++i) cases *= 3;

  std::optional<OracleSolution> best;
  std::vector<int> assign(n);
  for (long long code = 0; code < cases; ++code) {
    long long c = code;
    double bound_mass = 0.0;
    double inv_sum = 0.0;
    double b_over_a = 0.0;
    for (int i = 0; i < n; ++i) {
      assign[i] = static_cast<int>(c % 3) - 1;  // -1 lower, 0 free, +1 upper
      c /= 3;
      if (assign[i] == -1)
        bound_mass += lo[i];
      else if (assign[i] == 1)
        bound_mass += hi[i];
      else {
        inv_sum += 1.0 / p.costs[i].a;
        b_over_a += p.costs[i].b / p.costs[i].a;
      }
    }

    double nu;
    if (inv_sum == 0.0) {
      if (std::abs(bound_mass - p.demand) > 1e-10 * std::max(1.0, std::abs(p.demand))) continue;
      nu = 0.0;  // all variables pinned; any multiplier below works if signs check out
    } else {
      nu = (p.demand - bound_mass + b_over_a) / inv_sum;
    }

    bool ok = true;
    Vec x(n);
    const double tol = 1e-10;
    for (int i = 0; i < n && ok; ++i) {
      if (assign[i] == 0) {
        x[i] = (nu - p.costs[i].b) / p.costs[i].a;
        ok = (x[i] >= lo[i] - tol && x[i] <= hi[i] + tol);
      } else if (assign[i] == -1) {
        x[i] = lo[i];
        ok = (p.costs[i].grad(x[i]) - nu >= -tol);
      } else {
        x[i] = hi[i];
        ok = (nu - p.costs[i].grad(x[i]) >= -tol);
      }
    }
    if (!ok) continue;

    OracleSolution cand;
    cand.method = "active-set-bruteforce";
    cand.nu_star = nu;
    cand.x_star = std::move(x);
    cand.active_set = assign;
    cand.lambda_star.assign(2 * n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (assign[i] == -1)
        cand.lambda_star[i] = std::max(0.0, p.costs[i].grad(cand.x_star[i]) - nu);
      else if (assign[i] == 1)
        cand.lambda_star[n + i] = std::max(0.0, nu - p.costs[i].grad(cand.x_star[i]));
    }
    cand.f_star = eval_f(p, cand.x_star);
    if (!best || cand.f_star < best->f_star) best = std::move(cand);
  }
  if (!best) throw InfeasibleOrDegenerate("solve_box_qp_bruteforce: no KKT-consistent candidate");
  return *best;
}

void attach_z_star(OracleSolution& sol, const DispatchProblem& p, const WeightedLaplacian& l, double omega) {
  const int n = p.n();
  Vec rhs = vec_sub(sol.x_star, p.x0);
  const SpectralDecomposition d = eig_sym(l.matrix());
  // pseudo-inverse in the eigenbasis, then shift onto the 1^T z = omega slice
  Vec z(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (d.eigenvalues[k] <= 1e-9) continue;
    double coeff = 0.0;
    for (int i = 0; i < n; ++i) coeff += d.eigenvectors(i, k) * rhs[i];
    coeff /= d.eigenvalues[k];
    for (int i = 0; i < n; ++i) z[i] += coeff * d.eigenvectors(i, k);
  }
  const double shift = (omega - sum(z)) / n;
  for (double& v : z) v += shift;
  sol.z_star = std::move(z);
}

double KktReport::max() const {
  return std::max(std::max(stationarity, primal), std::max(dual, compslack));
}

KktReport kkt_report(const DispatchProblem& p, const Vec& x, double nu, const Vec& lambda) {
  const int n = p.n();
  KktReport r;
  for (int i = 0; i < n; ++i) {
    const double lam_lo = lambda.empty() ? 0.0 : lambda[i];
    const double lam_hi = lambda.empty() ? 0.0 : lambda[n + i];
    r.stationarity = std::max(r.stationarity, std::abs(p.costs[i].grad(x[i]) - nu - lam_lo + lam_hi));
    r.dual = std::max(r.dual, std::max(0.0, -lam_lo));
    r.dual = std::max(r.dual, std::max(0.0, -lam_hi));
    if (p.has_boxes()) {
      const double p_lo = (*p.x_lo)[i] - x[i];
      const double p_hi = x[i] - (*p.x_hi)[i];
      r.primal = std::max(r.primal, std::max(0.0, std::max(p_lo, p_hi)));
      r.compslack = std::max(r.compslack, std::abs(lam_lo * p_lo));
      r.compslack = std::max(r.compslack, std::abs(lam_hi * p_hi));
    }
  }
  r.primal = std::max(r.primal, std::abs(sum(x) - p.demand));
  return r;
}

DanaDResult run_dgd(const DispatchProblem& p, const WeightedLaplacian& l, DanaDConfig cfg) {
  cfg.q = 0;  // identity weighting of the step direction
  return run_matrix_form(p, l, cfg);
}

std::string oracle_to_json(const OracleSolution& s) {
  nlohmann::json j;
  j["x_star"] = s.x_star;
  if (!s.z_star.empty()) j["z_star"] = s.z_star;
  j["lambda_star"] = s.lambda_star;
  j["nu_star"] = s.nu_star;
  j["active_set"] = s.active_set;
  j["f_star"] = s.f_star;
  j["method"] = s.method;
  return j.dump(2);
}

}  // namespace dana
