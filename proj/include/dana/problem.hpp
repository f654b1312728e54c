#pragma once

#include <optional>
#include <string>

#include "dana/graph.hpp"
#include "dana/numeric.hpp"

namespace dana {

// Per-agent cost  f_i(x) = a/2 x^2 + b x + c sin(x + theta),  a - c > 0.
// c == 0 is the plain quadratic case with delta == Delta == a.
struct CostFunction {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double theta = 0.0;

  double delta() const { return a - c; }  // lower second-derivative bound
  double Delta() const { return a + c; }  // upper second-derivative bound

  double value(double x) const { return 0.5 * a * x * x + b * x + c * std::sin(x + theta); }
  double grad(double x) const { return a * x + b + c * std::cos(x + theta); }
  double hess(double x) const { return a - c * std::sin(x + theta); }

  // f(x + dx) - f(x) in a cancellation-free form; exact for quadratics and
  // product-form for the sinusoid, so tiny true differences stay resolvable.
  double value_diff(double x, double dx) const {
    double d = a * dx * x + 0.5 * a * dx * dx + b * dx;
    if (c != 0.0) d += 2.0 * c * std::cos(x + theta + 0.5 * dx) * std::sin(0.5 * dx);
    return d;
  }
};

CostFunction make_quadratic(double a, double b);
CostFunction make_sinusoidal(double a, double b, double c, double theta);

struct HessianDiagonal {
  Vec h;      // evaluations at the query point
  Vec delta;  // constant lower bounds
  Vec Delta;  // constant upper bounds
};

struct DispatchProblem {
  std::vector<CostFunction> costs;
  double demand = 0.0;
  std::optional<Vec> x_lo;
  std::optional<Vec> x_hi;
  Vec x0;

  int n() const { return static_cast<int>(costs.size()); }
  bool has_boxes() const { return x_lo.has_value(); }
  Vec delta_bounds() const;
  Vec Delta_bounds() const;
  bool is_quadratic() const;
};

// Validates the instance invariants (sum x0 == d, strict box slack).
DispatchProblem make_dispatch_problem(std::vector<CostFunction> costs, double demand, Vec x0,
                                      std::optional<Vec> x_lo = std::nullopt,
                                      std::optional<Vec> x_hi = std::nullopt);
// Skips the feasibility invariants; used for boundary cases and for robust
// experiments whose initial state deliberately violates the demand equation.
DispatchProblem make_dispatch_problem_unchecked(std::vector<CostFunction> costs, double demand, Vec x0,
                                                std::optional<Vec> x_lo = std::nullopt,
                                                std::optional<Vec> x_hi = std::nullopt);

double eval_f(const DispatchProblem& p, const Vec& x);
Vec eval_grad(const DispatchProblem& p, const Vec& x);
HessianDiagonal eval_hess(const DispatchProblem& p, const Vec& x);

// Sum of per-agent stable differences f(x + dx) - f(x).
double eval_f_diff(const DispatchProblem& p, const Vec& x, const Vec& dx);

// Reduced objective g(z) = f(x0 + L z) and its gradient L grad f(x0 + L z).
double reduced_objective(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& z);
Vec reduced_gradient(const DispatchProblem& p, const WeightedLaplacian& l, const Vec& z);

// Named parameter families for random instances.
struct CostDistribution {
  double a_lo = 0.8, a_hi = 1.2;
  double b_lo = 0.0, b_hi = 1.0;
  double c_lo = 0.0, c_hi = 0.0;  // c_hi == 0 means quadratic
  bool sinusoidal() const { return c_hi > 0.0; }
};

CostDistribution cost_family(const std::string& name);

struct BoxDistribution {
  double lo_lo = 1.5, lo_hi = 3.0;
  double hi_lo = 3.0, hi_hi = 4.5;
};

DispatchProblem random_instance(int n, const CostDistribution& dist, double demand, std::uint64_t seed,
                                std::optional<BoxDistribution> boxes = std::nullopt);

// JSON document {costs:[{a,b,c,theta},...], d, x_lo, x_hi, x0}; omitted
// arrays mean "not present".
std::string instance_to_json(const DispatchProblem& p);
DispatchProblem instance_from_json(const std::string& text);

}  // namespace dana
