#include "dana/problem.hpp"

#include <algorithm>

#include "json.hpp"

namespace dana {

namespace {
constexpr double kPi = 3.14159265358979323846;

void validate_cost(const CostFunction& f) {
  if (!(f.a > 0.0)) throw InvalidInput("CostFunction: curvature a must be positive");
  if (f.c < 0.0) throw InvalidInput("CostFunction: amplitude c must be nonnegative");
  if (!(f.a - f.c > 0.0)) throw InvalidInput("CostFunction: requires a - c > 0");
}
}  // namespace

CostFunction make_quadratic(double a, double b) {
  CostFunction f{a, b, 0.0, 0.0};
  validate_cost(f);
  return f;
}

CostFunction make_sinusoidal(double a, double b, double c, double theta) {
  CostFunction f{a, b, c, theta};
  validate_cost(f);
  return f;
}

Vec DispatchProblem::delta_bounds() const {
  Vec d(costs.size());
  for (size_t i = 0; i < costs.size(); ++i) d[i] = costs[i].delta();
  return d;
}

Vec DispatchProblem::Delta_bounds() const {
  Vec d(costs.size());
  for (size_t i = 0; i < costs.size(); ++i) d[i] = costs[i].Delta();
  return d;
}

bool DispatchProblem::is_quadratic() const {
  return std::all_of(costs.begin(), costs.end(), [](const CostFunction& f) { return f.c == 0.0; });
}

namespace {

DispatchProblem assemble(std::vector<CostFunction> costs, double demand, Vec x0, std::optional<Vec> x_lo,
                         std::optional<Vec> x_hi, bool check) {
  DispatchProblem p;
  p.costs = std::move(costs);
  p.demand = demand;
  p.x0 = std::move(x0);
  p.x_lo = std::move(x_lo);
  p.x_hi = std::move(x_hi);

  const size_t n = p.costs.size();
  if (n == 0) throw InvalidInput("DispatchProblem: empty cost list");
  for (const auto& f : p.costs) validate_cost(f);
  if (p.x0.size() != n) throw InvalidInput("DispatchProblem: x0 size mismatch");
  if (p.x_lo.has_value() != p.x_hi.has_value())
    throw InvalidInput("DispatchProblem: box bounds must come as a pair");
  if (p.x_lo && (p.x_lo->size() != n || p.x_hi->size() != n))
    throw InvalidInput("DispatchProblem: box size mismatch");
  if (!all_finite(p.x0) || !std::isfinite(demand)) throw InvalidInput("DispatchProblem: non-finite data");

  if (check) {
    if (std::abs(sum(p.x0) - p.demand) > 1e-9 * std::max(1.0, std::abs(p.demand)))
      throw InvalidInput("DispatchProblem: initial state does not meet demand");
    if (p.x_lo) {
      for (size_t i = 0; i < n; ++i)
        if (!((*p.x_lo)[i] < (*p.x_hi)[i])) throw InvalidInput("DispatchProblem: empty box");
      if (!(sum(*p.x_lo) < p.demand && p.demand < sum(*p.x_hi)))
        throw InvalidInput("DispatchProblem: demand not strictly inside box totals");
    }
  }
  return p;
}

}  // namespace

DispatchProblem make_dispatch_problem(std::vector<CostFunction> costs, double demand, Vec x0,
                                      std::optional<Vec> x_lo, std::optional<Vec> x_hi) {
  return assemble(std::move(costs), demand, std::move(x0), std::move(x_lo), std::move(x_hi), true);
}

DispatchProblem make_dispatch_problem_unchecked(std::vector<CostFunction> costs, double demand, Vec x0,
                                                std::optional<Vec> x_lo, std::optional<Vec> x_hi) {
  return assemble(std::move(costs), demand, std::move(x0), std::move(x_lo), std::move(x_hi), false);
}

double eval_f(const DispatchProblem& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.n()) throw InvalidInput("eval_f: size mismatch");
  if (!all_finite(x)) throw InvalidInput("eval_f: non-finite allocation");
  double s = 0.0;
  for (int i = 0; i < p.n(); ++i) s += p.costs[i].value(x[i]);
  return s;
}

Vec eval_grad(const DispatchProblem& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.n()) throw InvalidInput("eval_grad: size mismatch");
  if (!all_finite(x)) throw InvalidInput("eval_grad: non-finite allocation");
  Vec g(p.n());
  for (int i = 0; i < p.n(); ++i) g[i] = p.costs[i].grad(x[i]);
  return g;
}

HessianDiagonal eval_hess(const DispatchProblem& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.n()) throw InvalidInput("eval_hess: size mismatch");
  if (!all_finite(x)) throw InvalidInput("eval_hess: non-finite allocation");
  HessianDiagonal h;
  h.h.resize(p.n());
  for (int i = 0; i < p.n(); ++i) h.h[i] = p.costs[i].hess(x[i]);
  h.delta = p.delta_bounds();
  h.Delta = p.Delta_bounds();
  return h;
}

double eval_f_diff(const DispatchProblem& p, const Vec& x, const Vec& dx) {
  double s = 0.0;
  for (int i = 0; i < p.n(); ++i) s += p.costs[i].value_diff(x[i], dx[i]);
  return s;
}

double reduced_objective(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& z) {
  Vec x = vec_add(p.x0, matvec(l.matrix().mat(), z));
  return eval_f(p, x);
}

Vec reduced_gradient(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& z) {
  Vec x = vec_add(p.x0, matvec(l.matrix().mat(), z));
  return matvec(l.matrix().mat(), eval_grad(p, x));
}

CostDistribution cost_family(const std::string& name) {
  if (name == "tight") return CostDistribution{0.8, 1.2, 0.0, 1.0, 0.0, 0.0};
  if (name == "wide") return CostDistribution{0.2, 5.0, 0.0, 1.0, 0.0, 0.0};
  if (name == "sinusoidal") return CostDistribution{2.0, 4.0, -1.0, 1.0, 0.0, 1.0};
  if (name == "quad40") return CostDistribution{0.5, 3.0, -2.0, 2.0, 0.0, 0.0};
  if (name == "lowcurv") return CostDistribution{0.5, 1.0, -1.0, 1.0, 0.0, 0.0};
  throw InvalidInput("cost_family: unknown family '" + name + "'");
}

DispatchProblem random_instance(int n, const CostDistribution& dist, double demand, std::uint64_t seed,
                                std::optional<BoxDistribution> boxes) {
  if (n < 2) throw InvalidInput("random_instance: n must be >= 2");
  Rng rng(seed);
  std::vector<CostFunction> costs;
  costs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(dist.a_lo, dist.a_hi);
    const double b = rng.uniform(dist.b_lo, dist.b_hi);
    double c = 0.0;
    double theta = 0.0;
    if (dist.sinusoidal()) {
      // rejection keeps a - c strictly positive
      do {
        c = rng.uniform(dist.c_lo, dist.c_hi);
      } while (!(a - c > 0.0));
      theta = rng.uniform(0.0, 2.0 * kPi);
    }
    costs.push_back(CostFunction{a, b, c, theta});
  }
  Vec x0(n, demand / n);
  std::optional<Vec> lo, hi;
  if (boxes) {
    lo = Vec(n);
    hi = Vec(n);
    // redraw until the demand sits strictly inside the box totals
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 1000) throw InvalidInput("random_instance: box distribution incompatible with demand");
      for (int i = 0; i < n; ++i) {
        (*lo)[i] = rng.uniform(boxes->lo_lo, boxes->lo_hi);
        (*hi)[i] = rng.uniform(boxes->hi_lo, boxes->hi_hi);
      }
      if (sum(*lo) < demand && demand < sum(*hi)) break;
    }
  }
  return make_dispatch_problem(std::move(costs), demand, std::move(x0), std::move(lo), std::move(hi));
}

std::string instance_to_json(const DispatchProblem& p) {
  nlohmann::json j;
  auto& costs = j["costs"] = nlohmann::json::array();
  for (const auto& f : p.costs) {
    nlohmann::json c;
    c["a"] = f.a;
    c["b"] = f.b;
    if (f.c != 0.0) {
      c["c"] = f.c;
      c["theta"] = f.theta;
    }
    costs.push_back(std::move(c));
  }
  j["d"] = p.demand;
  j["x0"] = p.x0;
  if (p.x_lo) {
    j["x_lo"] = *p.x_lo;
    j["x_hi"] = *p.x_hi;
  }
  return j.dump(2);
}

DispatchProblem instance_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("costs") || !j.contains("d") || !j.contains("x0"))
    throw InvalidInput("instance json: missing costs, d, or x0");
  std::vector<CostFunction> costs;
  for (const auto& c : j.at("costs")) {
    CostFunction f;
    f.a = c.at("a").get<double>();
    f.b = c.value("b", 0.0);
    f.c = c.value("c", 0.0);
    f.theta = c.value("theta", 0.0);
    costs.push_back(f);
  }
  std::optional<Vec> lo, hi;
  if (j.contains("x_lo")) {
    lo = j.at("x_lo").get<Vec>();
    if (!j.contains("x_hi")) throw InvalidInput("instance json: x_lo without x_hi");
    hi = j.at("x_hi").get<Vec>();
  }
  return make_dispatch_problem(std::move(costs), j.at("d").get<double>(), j.at("x0").get<Vec>(),
                               std::move(lo), std::move(hi));
}

}  // namespace dana
