#include "dana/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace dana {

SymMatrix::SymMatrix(Mat m, const NumericSettings& ns) {
  if (m.rows() != m.cols()) throw InvalidInput("SymMatrix: matrix not square");
  if (m.rows() < 1) throw InvalidInput("SymMatrix: dim must be >= 1");
  if (!all_finite(m)) throw InvalidInput("SymMatrix: non-finite entries");
  const int n = m.rows();
  double scale = std::max(1.0, max_abs(m));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > ns.symmetry_tol * scale)
        throw InvalidInput("SymMatrix: input is not symmetric");
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  m_ = std::move(m);
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return SymMatrix(std::move(m));
}

namespace {

double offdiag_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

// One two-sided Jacobi rotation in the (p, q) plane, applied to the symmetric
// work matrix and accumulated into the eigenvector matrix.
void jacobi_rotate(Mat& a, Mat& v, int p, int q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double app = a(p, p);
  const double aqq = a(q, q);
  const double tau = (aqq - app) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const int n = a.rows();

  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double aip = a(i, p);
    const double aiq = a(i, q);
    a(i, p) = c * aip - s * aiq;
    a(p, i) = a(i, p);
    a(i, q) = s * aip + c * aiq;
    a(q, i) = a(i, q);
  }
  for (int i = 0; i < n; ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = c * vip - s * viq;
    v(i, q) = s * vip + c * viq;
  }
}

SpectralDecomposition jacobi_eig(Mat a, Mat v, const NumericSettings& ns) {
  const int n = a.rows();
  const double scale = std::max(1.0, frob_norm(a));
  if (n > 1) {
    // entries below this threshold cannot push the off-diagonal mass past the
    // stop tolerance, so their rotations are skipped
    const double skip = ns.jacobi_rel_tol * scale / (2.0 * n);
    for (int sweep = 0; sweep < ns.jacobi_max_sweeps; ++sweep) {
      if (offdiag_norm(a) <= ns.jacobi_rel_tol * scale) break;
      for (int p = 0; p < n - 1; ++p)
        for (int q = p + 1; q < n; ++q)
          if (std::abs(a(p, q)) > skip) jacobi_rotate(a, v, p, q);
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  SpectralDecomposition d;
  d.eigenvalues.resize(n);
  d.eigenvectors = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    d.eigenvalues[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) d.eigenvectors(i, k) = v(i, order[k]);
  }
  return d;
}

}  // namespace

SpectralDecomposition eig_sym(const SymMatrix& a, const NumericSettings& ns) {
  return jacobi_eig(a.mat(), Mat::identity(a.dim()), ns);
}

SymMatrix psd_project(const SymMatrix& a, const NumericSettings& ns) {
  const SpectralDecomposition d = eig_sym(a, ns);
  const int n = a.dim();
  Mat out(n, n);
  for (int k = 0; k < n; ++k) {
    const double lam = std::max(d.eigenvalues[k], 0.0);
    if (lam == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double wik = lam * d.eigenvectors(i, k);
      for (int j = i; j < n; ++j) {
        out(i, j) += wik * d.eigenvectors(j, k);
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return SymMatrix(std::move(out), ns);
}

SymMatrix neumann_inverse(const SymMatrix& m, int q) {
  if (q < 0) throw InvalidInput("neumann_inverse: q must be nonnegative");
  const int n = m.dim();
  Mat residual = mat_sub(Mat::identity(n), m.mat());  // I - M
  Mat s = Mat::identity(n);
  for (int p = 0; p < q; ++p) {
    s = mat_add(Mat::identity(n), matmul(residual, s));
  }
  return SymMatrix(std::move(s));
}

SpectralDecomposition WarmEig::decompose(const SymMatrix& a, const NumericSettings& ns) {
  const int n = a.dim();
  if (!have_basis_ || basis_.rows() != n) {
    SpectralDecomposition d = eig_sym(a, ns);
    basis_ = d.eigenvectors;
    have_basis_ = true;
    return d;
  }
  // Rotate into the previous eigenbasis; the result is nearly diagonal when
  // the matrix moved only a little since the last call.
  Mat rotated = matmul(transpose(basis_), matmul(a.mat(), basis_));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (rotated(i, j) + rotated(j, i));
      rotated(i, j) = v;
      rotated(j, i) = v;
    }
  SpectralDecomposition d = jacobi_eig(std::move(rotated), Mat::identity(n), ns);
  d.eigenvectors = matmul(basis_, d.eigenvectors);
  basis_ = d.eigenvectors;
  return d;
}

}  // namespace dana
