#include "dana/numeric.hpp"

#include <algorithm>

namespace dana {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matmul: dimension mismatch");
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols() != static_cast<int>(x.size())) throw InvalidInput("matvec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Mat mat_add(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("mat_add: dimension mismatch");
  Mat c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Mat mat_sub(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("mat_sub: dimension mismatch");
  Mat c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Mat mat_scale(const Mat& a, double s) {
  Mat c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

double frob_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Mat& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Vec vec_add(const Vec& a, const Vec& b) {
  Vec c = a;
  for (size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Vec vec_sub(const Vec& a, const Vec& b) {
  Vec c = a;
  for (size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Vec vec_scale(const Vec& a, double s) {
  Vec c = a;
  for (double& v : c) v *= s;
  return c;
}

double sum(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

CholeskyFactor::CholeskyFactor(const Mat& spd) {
  if (spd.rows() != spd.cols()) throw InvalidInput("CholeskyFactor: matrix not square");
  const int n = spd.rows();
  l_ = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (d <= 0.0 || !std::isfinite(d)) throw InvalidInput("CholeskyFactor: matrix not positive definite");
    l_(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / l_(j, j);
    }
  }
}

Vec CholeskyFactor::solve(const Vec& rhs) const {
  const int n = l_.rows();
  if (static_cast<int>(rhs.size()) != n) throw InvalidInput("CholeskyFactor::solve: size mismatch");
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
    y[i] = s / l_(i, i);
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
    x[i] = s / l_(i, i);
  }
  return x;
}

}  // namespace dana
