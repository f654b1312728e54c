#pragma once

#include "dana/numeric.hpp"

namespace dana {

// Dense symmetric matrix. The constructor symmetrizes (averages the two
// triangles) so downstream code can rely on exact index symmetry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Mat m, const NumericSettings& ns = {});
  static SymMatrix diagonal(const Vec& d);

  int dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

struct SpectralDecomposition {
  Vec eigenvalues;   // ascending
  Mat eigenvectors;  // orthonormal columns, paired with eigenvalues
};

// Cyclic Jacobi eigendecomposition for symmetric matrices.
SpectralDecomposition eig_sym(const SymMatrix& a, const NumericSettings& ns = {});

// Frobenius-nearest positive semidefinite matrix: clip negative eigenvalues.
SymMatrix psd_project(const SymMatrix& a, const NumericSettings& ns = {});

// Truncated series sum_{p=0}^{q} (I - M)^p via the recursion S <- I + (I-M) S.
// Convergence to M^{-1} is the caller's concern.
SymMatrix neumann_inverse(const SymMatrix& m, int q);

// Internal helper for iterative projection loops: eigendecomposition that
// first rotates into a previous eigenbasis, which leaves Jacobi nearly
// diagonal input when successive matrices are close.
class WarmEig {
 public:
  SpectralDecomposition decompose(const SymMatrix& a, const NumericSettings& ns = {});
  void reset() { have_basis_ = false; }

 private:
  bool have_basis_ = false;
  Mat basis_;
};

}  // namespace dana
