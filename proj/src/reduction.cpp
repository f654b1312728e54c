#include "dana/reduction.hpp"

#include <map>
#include <mutex>

namespace dana {

Mat build_t_matrix(int n) {
  if (n < 2) throw InvalidInput("build_t_matrix: n must be >= 2");
  const double sqn = std::sqrt(static_cast<double>(n));
  const double rho = 1.0 / std::sqrt(n * (n + 1.0 + 2.0 * sqn));
  Mat t(n, n);
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < n - 1; ++j) t(i, j) = (i == j) ? (n - 1.0 + sqn) : -1.0;
    t(i, n - 1) = 1.0 / sqn;
  }
  for (int j = 0; j < n - 1; ++j) t(n - 1, j) = -1.0 - sqn;
  t(n - 1, n - 1) = 1.0 / sqn;
  // right-multiplication by diag(rho, ..., rho, 1)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n - 1; ++j) t(i, j) *= rho;
  return t;
}

ProjectorT::ProjectorT(int n) : n_(n), t_(build_t_matrix(n)) {
  basis_ = Mat(n, n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n - 1; ++j) basis_(i, j) = t_(i, j);
}

const ProjectorT& projector(int n) {
  static std::mutex mu;
  static std::map<int, ProjectorT> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, ProjectorT(n)).first;
  return it->second;
}

SymMatrix reduced_hessian(const Mat& laplacian, const Vec& h) {
  const int n = laplacian.rows();
  if (laplacian.cols() != n || static_cast<int>(h.size()) != n)
    throw InvalidInput("reduced_hessian: dimension mismatch");
  const Mat& basis = projector(n).basis();
  // LB = L * basis, then M = (LB)^T diag(h) (LB)
  Mat lb = matmul(laplacian, basis);
  Mat m(n - 1, n - 1);
  for (int r = 0; r < n - 1; ++r) {
    for (int c = r; c < n - 1; ++c) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += lb(k, r) * h[k] * lb(k, c);
      m(r, c) = s;
      m(c, r) = s;
    }
  }
  return SymMatrix(std::move(m));
}

SymMatrix reduced_hessian(const WeightedLaplacian& l, const Vec& h) {
  return reduced_hessian(l.matrix().mat(), h);
}

EpsilonMetric epsilon_from_bounds(const SymMatrix& m_delta, const SymMatrix& m_Delta,
                                  const NumericSettings& ns) {
  EpsilonMetric e;
  e.mu_min_delta = eig_sym(m_delta, ns).eigenvalues.front();
  e.mu_max_Delta = eig_sym(m_Delta, ns).eigenvalues.back();
  e.value = std::max(std::abs(1.0 - e.mu_min_delta), std::abs(1.0 - e.mu_max_Delta));
  return e;
}

EpsilonMetric epsilon_of(const WeightedLaplacian& l, const Vec& delta, const Vec& Delta,
                         const NumericSettings& ns) {
  if (delta.size() != Delta.size() || static_cast<int>(delta.size()) != l.n())
    throw InvalidInput("epsilon_of: dimension mismatch");
  for (size_t i = 0; i < delta.size(); ++i)
    if (!(0.0 < delta[i] && delta[i] <= Delta[i])) throw InvalidInput("epsilon_of: need 0 < delta <= Delta");
  return epsilon_from_bounds(reduced_hessian(l, delta), reduced_hessian(l, Delta), ns);
}

}  // namespace dana
