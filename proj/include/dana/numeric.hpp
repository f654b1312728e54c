#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dana {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Error taxonomy. Callers catch by category; the CLI maps these to exit codes.
// ---------------------------------------------------------------------------

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct AssumptionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoFeasiblePoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepSizeTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateCorruption : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LocalityBreach : std::logic_error {
  using std::logic_error::logic_error;
};
struct InfeasibleOrDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Single numeric-settings record threaded through constructors/entry points.
// Defaults are the project-wide fixed tolerances.
// ---------------------------------------------------------------------------

struct NumericSettings {
  // dense symmetric kernel
  double symmetry_tol = 1e-12;
  double jacobi_rel_tol = 1e-13;
  int jacobi_max_sweeps = 64;

  // Laplacian validation
  double rowsum_tol = 1e-10;
  double psd_floor = -1e-9;

  // LMI feasibility engine
  enum class ProbeEngine { dykstra, plain, douglas_rachford };
  ProbeEngine probe_engine = ProbeEngine::douglas_rachford;
  int projection_sweep_cap = 5000;
  int certificate_interval = 20;  // sweeps between explicit eigenvalue checks
  int bisection_step_cap = 25;
  double bisection_tol = 1e-3;
  double lmi_feasibility_tol = 1e-7;
  double probe_infeasible_residual = 1e-6;
  double probe_converged_residual = 1e-10;
  double stall_window_shrink = 5e-3;  // min relative residual progress per window
  int stall_window = 150;
  double weight_floor = 1e-8;  // keeps designed edge weights strictly positive
  double bracket_max = 256.0;  // largest objective level probed before giving up
};

// ---------------------------------------------------------------------------
// Dense row-major matrix. Sizes in this project stay below ~200, so plain
// triple loops are fine and keep results bit-deterministic.
// ---------------------------------------------------------------------------

class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw InvalidInput("Mat: negative dimension");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const Vec& data() const { return a_; }
  Vec& data() { return a_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec a_;
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, const Vec& x);
Mat transpose(const Mat& a);
Mat mat_add(const Mat& a, const Mat& b);
Mat mat_sub(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& a, double s);
double frob_norm(const Mat& a);
double max_abs(const Mat& a);
bool all_finite(const Mat& a);
bool all_finite(const Vec& v);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
Vec vec_add(const Vec& a, const Vec& b);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_scale(const Vec& a, double s);
double sum(const Vec& v);

// Cholesky solve for symmetric positive definite systems (in-factored form).
// Used by the least-squares projections in the weight-design engine.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(const Mat& spd);
  Vec solve(const Vec& rhs) const;
  int dim() const { return l_.rows(); }

 private:
  Mat l_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. All bounded/real sampling is hand-rolled on top of the
// raw 64-bit stream so results do not depend on the standard library's
// distribution implementations.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform integer in [0, n)
  int below(int n) {
    if (n <= 0) throw InvalidInput("Rng::below: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t r = raw();
    while (r >= limit) r = raw();
    return static_cast<int>(r % un);
  }

  // uniform double in [0, 1) with 53-bit resolution
  double unit() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * unit(); }

  // derived, well-separated stream seed; used to hand each worker its own RNG
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t idx) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (idx + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dana
