#include "orthofuse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "orthofuse/errors.hpp"

namespace orthofuse {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Matrix::row(int i) const {
  Vec r(cols_);
  for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

double Matrix::trace() const {
  double t = 0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(Errc::dimension_mismatch, "matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) {
  a += b;
  return a;
}

Matrix operator*(const Matrix& a, double s) {
  Matrix r = a;
  r *= s;
  return r;
}

Vec operator*(const Matrix& a, const Vec& x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw Error(Errc::dimension_mismatch, "matrix-vector shape mismatch");
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

void axpy(double s, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec operator*(double s, Vec a) {
  for (double& v : a) v *= s;
  return a;
}

void add_outer(Matrix& m, const Vec& x, double scale) {
  const int d = static_cast<int>(x.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) += scale * x[i] * x[j];
}

Matrix cholesky(const Matrix& a) {
  const int d = a.rows();
  if (d != a.cols()) throw Error(Errc::dimension_mismatch, "cholesky needs a square matrix");
  const double pivot_floor = 1e-12 * a.trace() / std::max(d, 1);
  Matrix l(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= pivot_floor)
          throw Error(Errc::not_positive_definite, "cholesky pivot below tolerance");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

Vec cholesky_solve(const Matrix& l, const Vec& b) {
  const int d = l.rows();
  Vec y(d), x(d);
  for (int i = 0; i < d; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (int i = d - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < d; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

Vec solve_spd(const Matrix& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != static_cast<int>(b.size()))
    throw Error(Errc::dimension_mismatch, "solve_spd shape mismatch");
  const double scale = a.max_abs();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-10 * (1.0 + scale))
        throw std::invalid_argument("solve_spd: matrix not symmetric");
  return cholesky_solve(cholesky(a), b);
}

}  // namespace orthofuse
