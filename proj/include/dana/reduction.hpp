#pragma once

#include "dana/graph.hpp"
#include "dana/linalg.hpp"
#include "dana/numeric.hpp"

namespace dana {

// Orthogonal change of coordinates isolating span(1) in the last component.
// `t` is the explicit n x n matrix; `basis` is T J^T, the n x (n-1) block
// whose columns are an orthonormal basis of the complement of span(1). All
// reduced quantities in the project are congruences by `basis`:
//   M = basis^T (L H L) basis,  basis basis^T = I - 11^T/n.
class ProjectorT {
 public:
  explicit ProjectorT(int n);

  int n() const { return n_; }
  const Mat& t() const { return t_; }
  const Mat& basis() const { return basis_; }

 private:
  int n_ = 0;
  Mat t_;
  Mat basis_;
};

// Shared per-n cache; the projector is immutable after construction.
const ProjectorT& projector(int n);

Mat build_t_matrix(int n);

// M = basis^T L diag(h) L basis, the (n-1) x (n-1) reduced Hessian. Shares its
// spectrum with the n-1 eigenvalues of L diag(h) L away from span(1).
SymMatrix reduced_hessian(const Mat& laplacian, const Vec& h);
SymMatrix reduced_hessian(const WeightedLaplacian& l, const Vec& h);

struct EpsilonMetric {
  double value = 0.0;
  double mu_min_delta = 0.0;  // smallest eigenvalue of M at the lower bounds
  double mu_max_Delta = 0.0;  // largest eigenvalue of M at the upper bounds
};

// max(|1 - mu_1(M_delta)|, |1 - mu_{n-1}(M_Delta)|). The extremes over all
// diagonal Hessians between the bounds are attained at the bound matrices.
EpsilonMetric epsilon_of(const WeightedLaplacian& l, const Vec& delta, const Vec& Delta,
                         const NumericSettings& ns = {});
EpsilonMetric epsilon_from_bounds(const SymMatrix& m_delta, const SymMatrix& m_Delta,
                                  const NumericSettings& ns = {});

}  // namespace dana
