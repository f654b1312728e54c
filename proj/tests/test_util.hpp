#pragma once

#include <algorithm>

#include "dana/linalg.hpp"
#include "dana/numeric.hpp"

namespace dana::testing {

inline Mat random_symmetric(int n, Rng& rng, double scale = 1.0) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform(-scale, scale);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

// Random orthogonal basis: eigenvectors of a random symmetric matrix.
inline Mat random_orthogonal(int n, Rng& rng) {
  return eig_sym(SymMatrix(random_symmetric(n, rng))).eigenvectors;
}

// W diag(spectrum) W^T for a random orthogonal W.
inline SymMatrix matrix_with_spectrum(const Vec& spectrum, Rng& rng) {
  const int n = static_cast<int>(spectrum.size());
  Mat w = random_orthogonal(n, rng);
  Mat m(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) += spectrum[k] * w(i, k) * w(j, k);
  return SymMatrix(std::move(m));
}

// Spectral norm of a symmetric matrix via the Jacobi decomposition.
inline double spectral_norm(const SymMatrix& a) {
  const auto d = eig_sym(a);
  return std::max(std::abs(d.eigenvalues.front()), std::abs(d.eigenvalues.back()));
}

inline double max_entry_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline Mat centering_projector(int n) {
  Mat p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / n;
  return p;
}

}  // namespace dana::testing
