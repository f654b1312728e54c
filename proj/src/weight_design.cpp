#include "dana/weight_design.hpp"

#include <algorithm>

#include "json.hpp"

namespace dana {

namespace {

double phi_taylor(double eps_plus) {
  // truncated expansion used by the square-completion constraint; the series
  // turns around at 2, so the probe never evaluates it beyond that point
  return 1.0 - 0.5 * eps_plus + eps_plus * eps_plus / 8.0;
}

struct PsdProjection {
  Mat projected;
  double min_eig = 0.0;
};

PsdProjection psd_project_tracked(const Mat& sym, WarmEig& warm, const NumericSettings& ns) {
  SpectralDecomposition d = warm.decompose(SymMatrix(sym), ns);
  const int n = sym.rows();
  PsdProjection out;
  out.min_eig = d.eigenvalues.front();
  out.projected = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    const double lam = std::max(d.eigenvalues[k], 0.0);
    if (lam == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double w = lam * d.eigenvectors(i, k);
      for (int j = i; j < n; ++j) out.projected(i, j) += w * d.eigenvectors(j, k);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.projected(j, i) = out.projected(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Generic two-set feasibility probe over a flattened product space. The
// affine projection must return an exact member of the affine set; the cone
// projection an exact member of the cone. A periodic certificate check on the
// affine point decides feasibility directly by eigenvalue tests, so the probe
// can stop long before the iterates themselves meet.
// ---------------------------------------------------------------------------
struct ProbeOutcome {
  bool feasible = false;
  Vec point;  // the affine-set point that passed the certificate
  double residual = 0.0;
  long long sweeps = 0;
};

template <typename AffineFn, typename ConeFn, typename CertFn>
ProbeOutcome run_probe(const Vec& start, AffineFn&& project_affine, ConeFn&& project_cone,
                       CertFn&& certificate, const NumericSettings& ns) {
  ProbeOutcome out;
  Vec s = start;
  Vec correction(start.size(), 0.0);
  double last_window_residual = -1.0;

  for (int sweep = 0; sweep < ns.projection_sweep_cap; ++sweep) {
    ++out.sweeps;
    Vec a = project_affine(s);

    Vec cone_in;
    switch (ns.probe_engine) {
      case NumericSettings::ProbeEngine::plain:
        cone_in = a;
        break;
      case NumericSettings::ProbeEngine::dykstra:
        cone_in = vec_add(a, correction);
        break;
      case NumericSettings::ProbeEngine::douglas_rachford: {
        cone_in = vec_sub(vec_scale(a, 2.0), s);
        break;
      }
    }
    Vec b = project_cone(cone_in);

    double scale = 1.0 + norm2(a);
    out.residual = norm2(vec_sub(b, a)) / scale;

    switch (ns.probe_engine) {
      case NumericSettings::ProbeEngine::plain:
        s = b;
        break;
      case NumericSettings::ProbeEngine::dykstra:
        correction = vec_sub(cone_in, b);
        s = b;
        break;
      case NumericSettings::ProbeEngine::douglas_rachford:
        s = vec_add(s, vec_sub(b, a));
        break;
    }

    const bool worth_checking =
        out.residual <= ns.probe_converged_residual || (sweep + 1) % ns.certificate_interval == 0;
    if (worth_checking && certificate(a)) {
      out.feasible = true;
      out.point = std::move(a);
      return out;
    }
    if (sweep > 0 && sweep % ns.stall_window == 0) {
      // a plateaued residual with failing certificates means the sets do not
      // meet (or meet too tangentially to ever certify): infeasible either way
      if (last_window_residual > 0.0 && out.residual > ns.probe_converged_residual &&
          out.residual > (1.0 - ns.stall_window_shrink) * last_window_residual) {
        return out;
      }
      last_window_residual = out.residual;
    }
  }
  // cap reached: one final certificate attempt on the affine point
  Vec a = project_affine(s);
  if (out.residual <= ns.probe_infeasible_residual && certificate(a)) {
    out.feasible = true;
    out.point = std::move(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// P4 feasibility engine. Variables are the m edge weights x; at a fixed level
// t the two constraint blocks are affine in x:
//   G1(x) = [[(1+t) I_{n-1}, B^T L(x)], [L(x) B, H_delta^{-1}]]       (2n-1)
//   F2(x) = (1/2) B^T (sqrt(H_Delta) L(x) + L(x) sqrt(H_Delta)) B
//           - phi(min(t,2)) I_{n-1}                                    (n-1)
// with B the reduced basis. The flattened state is [vec G1 | vec F2 | x].
// ---------------------------------------------------------------------------
class P4Engine {
 public:
  P4Engine(const GraphTopology& g, const Vec& delta, const Vec& Delta, const NumericSettings& ns)
      : g_(g), ns_(ns), n_(g.n()), m_(g.edge_count()), basis_(projector(g.n()).basis()) {
    d1_ = 2 * n_ - 1;
    d2_ = n_ - 1;
    len1_ = d1_ * d1_;
    len2_ = d2_ * d2_;
    inv_delta_.resize(n_);
    sqrt_Delta_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      inv_delta_[i] = 1.0 / delta[i];
      sqrt_Delta_[i] = std::sqrt(Delta[i]);
    }

    u_.assign(m_, Vec(n_ - 1));
    a_.assign(m_, Vec(n_ - 1));
    for (int e = 0; e < m_; ++e) {
      const auto [i, j] = g.edges()[e];
      for (int r = 0; r < n_ - 1; ++r) {
        u_[e][r] = basis_(i, r) - basis_(j, r);
        a_[e][r] = sqrt_Delta_[i] * basis_(i, r) - sqrt_Delta_[j] * basis_(j, r);
      }
    }

    Mat gram(m_, m_);
    for (int e = 0; e < m_; ++e) {
      for (int f = e; f < m_; ++f) {
        const double uu = dot(u_[e], u_[f]);
        const double vv = edge_overlap(e, f);
        const double aa = dot(a_[e], a_[f]);
        const double au = dot(a_[e], u_[f]);
        const double ua = dot(u_[e], a_[f]);
        double val = 2.0 * uu * vv + 0.5 * (aa * uu + au * ua);
        if (e == f) val += 1.0;
        gram(e, f) = val;
        gram(f, e) = val;
      }
    }
    normal_ = CholeskyFactor(gram);
  }

  double edge_overlap(int e, int f) const {
    const auto [i, j] = g_.edges()[e];
    const auto [k, l] = g_.edges()[f];
    return static_cast<double>((i == k) - (i == l) - ((j == k) - (j == l)));
  }

  Mat laplacian_of(const Vec& x) const {
    Mat l(n_, n_);
    for (int e = 0; e < m_; ++e) {
      const auto [i, j] = g_.edges()[e];
      l(i, i) += x[e];
      l(j, j) += x[e];
      l(i, j) -= x[e];
      l(j, i) -= x[e];
    }
    return l;
  }

  Mat g1_of(const Vec& x, double t) const {
    Mat s(d1_, d1_);
    for (int r = 0; r < n_ - 1; ++r) s(r, r) = 1.0 + t;
    for (int i = 0; i < n_; ++i) s(n_ - 1 + i, n_ - 1 + i) = inv_delta_[i];
    const Mat l = laplacian_of(x);
    Mat bl = matmul(transpose(basis_), l);  // (n-1) x n
    for (int r = 0; r < n_ - 1; ++r)
      for (int c = 0; c < n_; ++c) {
        s(r, n_ - 1 + c) = bl(r, c);
        s(n_ - 1 + c, r) = bl(r, c);
      }
    return s;
  }

  Mat f2_of(const Vec& x, double t) const {
    const double phi = phi_taylor(std::min(t, 2.0));
    const Mat l = laplacian_of(x);
    Mat sym(n_, n_);  // (sqrt(H) L + L sqrt(H)) / 2
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) sym(i, j) = 0.5 * (sqrt_Delta_[i] * l(i, j) + l(i, j) * sqrt_Delta_[j]);
    Mat f = matmul(transpose(basis_), matmul(sym, basis_));
    for (int r = 0; r < n_ - 1; ++r) f(r, r) -= phi;
    return f;
  }

  Vec pack(const Mat& s1, const Mat& s2, const Vec& x) const {
    Vec out(len1_ + len2_ + m_);
    std::copy(s1.data().begin(), s1.data().end(), out.begin());
    std::copy(s2.data().begin(), s2.data().end(), out.begin() + len1_);
    std::copy(x.begin(), x.end(), out.begin() + len1_ + len2_);
    return out;
  }

  Mat block1(const Vec& s) const {
    Mat m(d1_, d1_);
    std::copy(s.begin(), s.begin() + len1_, m.data().begin());
    return m;
  }
  Mat block2(const Vec& s) const {
    Mat m(d2_, d2_);
    std::copy(s.begin() + len1_, s.begin() + len1_ + len2_, m.data().begin());
    return m;
  }
  Vec xpart(const Vec& s) const { return Vec(s.begin() + len1_ + len2_, s.end()); }

  // least squares onto the graph of x -> (G1, F2); exact affine member out
  Vec project_affine(const Vec& state, double t) const {
    const double phi = phi_taylor(std::min(t, 2.0));
    Mat r1 = block1(state);
    Mat r2 = block2(state);
    Vec y = xpart(state);
    Vec rhs(m_);
    for (int e = 0; e < m_; ++e) {
      const auto [i, j] = g_.edges()[e];
      double b1 = 0.0;
      for (int r = 0; r < n_ - 1; ++r)
        b1 += u_[e][r] * (0.5 * (r1(r, n_ - 1 + i) + r1(n_ - 1 + i, r)) -
                          0.5 * (r1(r, n_ - 1 + j) + r1(n_ - 1 + j, r)));
      double f2 = 0.0;  // <F2_e, sym(R2) + phi I>
      for (int r = 0; r < n_ - 1; ++r) {
        double row = phi * u_[e][r];
        for (int c = 0; c < n_ - 1; ++c) row += 0.5 * (r2(r, c) + r2(c, r)) * u_[e][c];
        f2 += a_[e][r] * row;
      }
      rhs[e] = 2.0 * b1 + f2 + y[e];
    }
    Vec x = normal_.solve(rhs);
    return pack(g1_of(x, t), f2_of(x, t), x);
  }

  Vec project_cone(const Vec& state, WarmEig& w1, WarmEig& w2) const {
    Mat s1 = block1(state);
    Mat s2 = block2(state);
    Vec x = xpart(state);
    PsdProjection p1 = psd_project_tracked(s1, w1, ns_);
    PsdProjection p2 = psd_project_tracked(s2, w2, ns_);
    for (double& v : x) v = std::max(v, 0.0);
    return pack(p1.projected, p2.projected, x);
  }

  struct Verified {
    double min_eig_g1 = 0.0;
    double min_eig_f2 = 0.0;
    bool ok = false;
  };

  Verified verify(const Vec& weights, double t, WarmEig& w1, WarmEig& w2) const {
    Verified v;
    v.min_eig_g1 = w1.decompose(SymMatrix(g1_of(weights, t)), ns_).eigenvalues.front();
    v.min_eig_f2 = w2.decompose(SymMatrix(f2_of(weights, t)), ns_).eigenvalues.front();
    v.ok = v.min_eig_g1 >= -ns_.lmi_feasibility_tol && v.min_eig_f2 >= -ns_.lmi_feasibility_tol;
    return v;
  }

  Vec clamp_weights(const Vec& x) const {
    Vec w = x;
    for (double& v : w) v = std::max(v, 0.0);
    return w;
  }

  const GraphTopology& g_;
  NumericSettings ns_;
  int n_, m_, d1_, d2_;
  size_t len1_ = 0, len2_ = 0;
  const Mat& basis_;
  Vec inv_delta_;
  Vec sqrt_Delta_;
  std::vector<Vec> u_;  // basis^T (e_i - e_j)
  std::vector<Vec> a_;  // basis^T sqrt(H_Delta) (e_i - e_j)
  CholeskyFactor normal_;
};

}  // namespace

P4Solution solve_p4(const GraphTopology& g, const Vec& delta, const Vec& Delta, const NumericSettings& ns) {
  if (static_cast<int>(delta.size()) != g.n() || static_cast<int>(Delta.size()) != g.n())
    throw InvalidInput("solve_p4: bound size mismatch");
  for (int i = 0; i < g.n(); ++i)
    if (!(0.0 < delta[i] && delta[i] <= Delta[i])) throw InvalidInput("solve_p4: need 0 < delta <= Delta");

  P4Engine engine(g, delta, Delta, ns);
  P4Solution sol;

  // unit weights scaled so the F2 linear form is roughly active
  Vec w0(g.edge_count(), 1.0);
  {
    auto ev = eig_sym(SymMatrix(engine.f2_of(w0, 0.0)), ns).eigenvalues;
    const double lift = ev.front() + 1.0;
    if (lift > 1e-9)
      for (double& w : w0) w /= lift;
  }

  double lo = 0.0;
  double hi = 1.0 - 1e-6;
  std::optional<Vec> best_weights;
  double best_residual = 0.0;
  P4Engine::Verified best_cert;

  auto attempt = [&](double t) {
    WarmEig cone1, cone2, cert1, cert2;
    Vec start_x = best_weights ? *best_weights : w0;
    Vec start = engine.pack(engine.g1_of(start_x, t), engine.f2_of(start_x, t), start_x);
    P4Engine::Verified cert;
    auto outcome = run_probe(
        start, [&](const Vec& s) { return engine.project_affine(s, t); },
        [&](const Vec& s) { return engine.project_cone(s, cone1, cone2); },
        [&](const Vec& affine_pt) {
          Vec w = engine.clamp_weights(engine.xpart(affine_pt));
          cert = engine.verify(w, t, cert1, cert2);
          return cert.ok;
        },
        ns);
    sol.diag.projection_sweeps += outcome.sweeps;
    ++sol.diag.bisection_steps;
    if (outcome.feasible) {
      best_weights = engine.clamp_weights(engine.xpart(outcome.point));
      best_residual = outcome.residual;
      best_cert = cert;
    }
    return outcome.feasible;
  };

  // A certified upper bracket from scaled unit weights: pick the scale that
  // pins the F2 linear form at phi(2) = 1/2 (its loosest level), then read
  // off the level the G1 side needs at that scale. The scaled unit weights
  // are feasible there by construction.
  double unit_level = 0.0;
  {
    Vec ones_w(g.edge_count(), 1.0);
    const double nmin =
        eig_sym(SymMatrix(engine.f2_of(ones_w, 2.0)), ns).eigenvalues.front() + 0.5;
    if (nmin > 0.0) {
      const double s = 0.5 / nmin;
      Vec scaled(g.edge_count(), s);
      const double top = eig_sym(reduced_hessian(assemble_laplacian(g, scaled, ns), delta), ns)
                             .eigenvalues.back();
      unit_level = top - 1.0;
    }
  }
  const double bracket_limit = std::max(ns.bracket_max, 4.0 * std::max(unit_level, 1.0));

  // feasible upper bracket; the level constraint loosens monotonically in t
  // because the square-completion term is evaluated at min(t, 2)
  while (!attempt(hi)) {
    lo = hi;
    if (hi < 1.0 && unit_level > 1.0)
      hi = std::max(2.0, 1.02 * unit_level + 1e-6);
    else
      hi = (hi < 1.0) ? 2.0 : hi * 2.0;
    sol.diag.bracket_extended = true;
    if (hi > bracket_limit)
      throw NoFeasiblePoint("solve_p4: no feasible level found up to the bracket cap");
  }

  while (hi - lo > ns.bisection_tol && sol.diag.bisection_steps < ns.bisection_step_cap) {
    const double mid = 0.5 * (lo + hi);
    if (attempt(mid))
      hi = mid;
    else
      lo = mid;
  }

  sol.weights = *best_weights;
  sol.eps_minus = hi;
  sol.eps_plus = std::min(hi, 2.0);
  sol.diag.probe_residual = best_residual;
  sol.diag.lmi_min_eig_first = best_cert.min_eig_g1;
  sol.diag.lmi_min_eig_second = best_cert.min_eig_f2;
  return sol;
}

DesignResult post_scale(const WeightedLaplacian& l0, const Vec& delta, const Vec& Delta,
                        const NumericSettings& ns) {
  if (static_cast<int>(delta.size()) != l0.n() || static_cast<int>(Delta.size()) != l0.n())
    throw InvalidInput("post_scale: bound size mismatch");
  if (max_abs(l0.matrix().mat()) <= 0.0) throw InvalidInput("post_scale: zero Laplacian");

  const SymMatrix m_delta0 = reduced_hessian(l0, delta);
  const SymMatrix m_Delta0 = reduced_hessian(l0, Delta);
  const double mu_min = eig_sym(m_delta0, ns).eigenvalues.front();
  const double mu_max = eig_sym(m_Delta0, ns).eigenvalues.back();
  if (!(mu_min + mu_max > 0.0)) throw InvalidInput("post_scale: degenerate spectrum");

  const double beta = std::sqrt(2.0 / (mu_min + mu_max));

  DesignResult r{.L_star = l0.scaled(beta)};
  r.beta = beta;
  r.eps_pre = std::max(std::abs(1.0 - mu_min), std::abs(1.0 - mu_max));
  r.eps_Lstar = epsilon_of(r.L_star, delta, Delta, ns);
  LaplacianMeta meta;
  meta.eps_design = r.eps_Lstar.value;
  meta.beta = beta;
  meta.provenance = "post-scaled";
  r.L_star.set_meta(meta);
  return r;
}

namespace {

// ---------------------------------------------------------------------------
// P5 engine: symmetric A with the two-hop sparsity of L H L, zero row sums,
// and reduced spectrum inside [1-t, 1+t]. Two sets: the sparsity+row-sum
// affine subspace (exact least-squares projection) and the spectral box
// {B 1 = 0, spec(B) on the complement of span(1) inside [1-t, 1+t]}, whose
// projection is a single eigenvalue clip.
// ---------------------------------------------------------------------------
class P5Engine {
 public:
  P5Engine(const GraphTopology& g, const NumericSettings& ns, int pattern_hops)
      : g_(g), ns_(ns), n_(g.n()) {
    if (pattern_hops < 1 || pattern_hops > 2) throw InvalidInput("solve_p5: pattern_hops must be 1 or 2");
    pattern_.assign(n_, std::vector<char>(n_, 0));
    for (int i = 0; i < n_; ++i) {
      pattern_[i][i] = 1;
      for (int j : khop_neighbors(g, i, pattern_hops))
        if (j != i) pattern_[i][j] = 1;
    }
    Mat k(n_, n_);
    for (int i = 0; i < n_; ++i) {
      int deg2 = 0;
      for (int j = 0; j < n_; ++j)
        if (j != i && pattern_[i][j]) ++deg2;
      k(i, i) = 0.5 + 0.25 * deg2;
      for (int j = 0; j < n_; ++j)
        if (j != i && pattern_[i][j]) k(i, j) = 0.25;
    }
    rowsum_normal_ = CholeskyFactor(k);

    centering_ = Mat(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) centering_(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / n_;
  }

  Vec flat(const Mat& m) const { return m.data(); }
  Mat unflat(const Vec& v) const {
    Mat m(n_, n_);
    std::copy(v.begin(), v.end(), m.data().begin());
    return m;
  }

  Mat project_structure(const Mat& m) const {
    Mat a(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (pattern_[i][j]) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    Vec r(n_);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += a(i, j);
      r[i] = s;
    }
    const Vec nu = rowsum_normal_.solve(r);
    for (int i = 0; i < n_; ++i) {
      a(i, i) -= 0.5 * nu[i];
      for (int j = 0; j < n_; ++j)
        if (j != i && pattern_[i][j]) a(i, j) -= 0.25 * (nu[i] + nu[j]);
    }
    return a;
  }

  // exact projection onto the spectral box: zero the span(1) row/column and
  // clip the remaining eigenvalues into [1-t, 1+t]
  Mat project_box(const Mat& m, double t, WarmEig& warm) const {
    Mat centered = matmul(centering_, matmul(m, centering_));
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        const double v = 0.5 * (centered(i, j) + centered(j, i));
        centered(i, j) = v;
        centered(j, i) = v;
      }
    SpectralDecomposition d = warm.decompose(SymMatrix(centered), ns_);
    // the ones direction carries eigenvalue 0 after centering; find it by
    // alignment and keep it pinned at zero
    int ones_mode = 0;
    double best = -1.0;
    for (int k = 0; k < n_; ++k) {
      double align = 0.0;
      for (int i = 0; i < n_; ++i) align += d.eigenvectors(i, k);
      if (std::abs(align) > best) {
        best = std::abs(align);
        ones_mode = k;
      }
    }
    Mat out(n_, n_);
    for (int k = 0; k < n_; ++k) {
      double lam = k == ones_mode ? 0.0 : std::min(std::max(d.eigenvalues[k], 1.0 - t), 1.0 + t);
      if (lam == 0.0) continue;
      for (int i = 0; i < n_; ++i) {
        const double w = lam * d.eigenvectors(i, k);
        for (int j = i; j < n_; ++j) out(i, j) += w * d.eigenvectors(j, k);
      }
    }
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) out(j, i) = out(i, j);
    return out;
  }

  struct Verified {
    double min_eig_lower = 0.0;
    double min_eig_upper = 0.0;
    bool ok = false;
  };

  Verified verify(const Mat& a, double t) const {
    Verified v;
    v.min_eig_lower =
        eig_sym(SymMatrix(mat_sub(a, mat_scale(centering_, 1.0 - t))), ns_).eigenvalues.front();
    v.min_eig_upper =
        eig_sym(SymMatrix(mat_sub(mat_scale(centering_, 1.0 + t), a)), ns_).eigenvalues.front();
    v.ok = v.min_eig_lower >= -ns_.lmi_feasibility_tol && v.min_eig_upper >= -ns_.lmi_feasibility_tol;
    return v;
  }

  const GraphTopology& g_;
  NumericSettings ns_;
  int n_;
  std::vector<std::vector<char>> pattern_;
  CholeskyFactor rowsum_normal_;
  Mat centering_;
};

}  // namespace

LowerBoundResult solve_p5(const GraphTopology& g, const NumericSettings& ns, int pattern_hops) {
  P5Engine engine(g, ns, pattern_hops);
  LowerBoundResult out;

  Mat start = engine.project_structure(engine.centering_);

  double lo = 0.0;
  double hi = 1.0 - 1e-6;
  std::optional<Mat> best;
  double best_residual = 0.0;
  P5Engine::Verified best_cert;

  auto attempt = [&](double t) {
    WarmEig box_eig;
    P5Engine::Verified cert;
    Vec start_flat = engine.flat(best ? *best : start);
    auto outcome = run_probe(
        start_flat,
        [&](const Vec& s) { return engine.flat(engine.project_structure(engine.unflat(s))); },
        [&](const Vec& s) { return engine.flat(engine.project_box(engine.unflat(s), t, box_eig)); },
        [&](const Vec& affine_pt) {
          cert = engine.verify(engine.unflat(affine_pt), t);
          return cert.ok;
        },
        ns);
    out.diag.projection_sweeps += outcome.sweeps;
    ++out.diag.bisection_steps;
    if (outcome.feasible) {
      best = engine.unflat(outcome.point);
      best_residual = outcome.residual;
      best_cert = cert;
    }
    return outcome.feasible;
  };

  if (!attempt(hi)) throw NoFeasiblePoint("solve_p5: infeasible even at the unit level");
  while (hi - lo > ns.bisection_tol && out.diag.bisection_steps < ns.bisection_step_cap) {
    const double mid = 0.5 * (lo + hi);
    if (attempt(mid))
      hi = mid;
    else
      lo = mid;
  }

  out.eps_A = hi;
  out.A_star = *best;
  out.diag.probe_residual = best_residual;
  out.diag.lmi_min_eig_first = best_cert.min_eig_lower;
  out.diag.lmi_min_eig_second = best_cert.min_eig_upper;
  return out;
}

DesignResult design(const GraphTopology& g, const Vec& delta, const Vec& Delta, BoundsMode mode,
                    const NumericSettings& ns) {
  Vec d_use = delta;
  Vec D_use = Delta;
  if (mode == BoundsMode::global) {
    const double d_min = *std::min_element(delta.begin(), delta.end());
    const double D_max = *std::max_element(Delta.begin(), Delta.end());
    d_use.assign(delta.size(), d_min);
    D_use.assign(Delta.size(), D_max);
  }

  P4Solution p4 = solve_p4(g, d_use, D_use, ns);

  // strictly positive weights keep the Laplacian type's invariants intact
  double w_max = 0.0;
  for (double w : p4.weights) w_max = std::max(w_max, w);
  const double floor = ns.weight_floor * std::max(1.0, w_max);
  Vec w = p4.weights;
  bool floored = false;
  for (double& v : w)
    if (v < floor) {
      v = floor;
      floored = true;
    }

  WeightedLaplacian l0 = assemble_laplacian(g, w, ns);
  DesignResult r = post_scale(l0, d_use, D_use, ns);
  r.eps_minus = p4.eps_minus;
  r.eps_plus = p4.eps_plus;
  r.diag = p4.diag;
  r.diag.weights_floored = floored;
  if (mode == BoundsMode::global) r.eps_local = epsilon_of(r.L_star, delta, Delta, ns).value;

  LaplacianMeta meta;
  meta.eps_design = r.eps_Lstar.value;
  meta.beta = r.beta;
  meta.provenance = mode == BoundsMode::global ? "designed-global-bounds" : "designed-local-bounds";
  r.L_star.set_meta(meta);
  return r;
}

std::string design_result_to_json(const DesignResult& r, std::optional<double> eps_A) {
  nlohmann::json j;
  const int n = r.L_star.n();
  auto& rows = j["L"] = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < n; ++c) row.push_back(r.L_star.matrix()(i, c));
    rows.push_back(std::move(row));
  }
  j["n"] = n;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (auto [a, b] : r.L_star.graph().edges()) edges.push_back({a, b});
  j["weights"] = r.L_star.weights();
  j["epsilon"] = r.eps_Lstar.value;
  j["beta"] = r.beta;
  j["eps_pre"] = r.eps_pre;
  j["eps_minus"] = r.eps_minus;
  j["eps_plus"] = r.eps_plus;
  if (r.eps_local) j["epsilon_local"] = *r.eps_local;
  if (eps_A) j["eps_A"] = *eps_A;
  j["provenance"] = r.L_star.meta() ? r.L_star.meta()->provenance : "";
  auto& diag = j["diagnostics"];
  diag["bisection_steps"] = r.diag.bisection_steps;
  diag["projection_sweeps"] = r.diag.projection_sweeps;
  diag["probe_residual"] = r.diag.probe_residual;
  diag["lmi_min_eig_first"] = r.diag.lmi_min_eig_first;
  diag["lmi_min_eig_second"] = r.diag.lmi_min_eig_second;
  diag["bracket_extended"] = r.diag.bracket_extended;
  return j.dump(2);
}

}  // namespace dana
