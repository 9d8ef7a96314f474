#ifndef ORTHOFUSE_LINALG_HPP_
#define ORTHOFUSE_LINALG_HPP_

#include <cstddef>
#include <vector>

namespace orthofuse {

using Vec = std::vector<double>;

//! Small dense row-major matrix. All systems solved in this project are tiny
//! (d <= 16 per task, m*d for the coupled fusion system), so the kernel is a
//! plain unblocked Cholesky with no external dependency.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vec row(int i) const;
  double trace() const;
  double max_abs() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, double s);
Vec operator*(const Matrix& a, const Vec& x);

// y += s * x
void axpy(double s, const Vec& x, Vec& y);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec operator-(const Vec& a, const Vec& b);
Vec operator+(const Vec& a, const Vec& b);
Vec operator*(double s, Vec a);

// a x a' scaled outer product accumulated into m
void add_outer(Matrix& m, const Vec& x, double scale);

//! Lower-triangular Cholesky factor of a symmetric positive definite matrix.
//! Throws Error(not_positive_definite) when a pivot falls at or below
//! 1e-12 * trace(A) / d.
Matrix cholesky(const Matrix& a);

//! Solve L L' x = b given the lower factor from cholesky().
Vec cholesky_solve(const Matrix& l, const Vec& b);

//! Solve A x = b for symmetric positive definite A.
//! Requires A symmetric to 1e-10 relative tolerance.
Vec solve_spd(const Matrix& a, const Vec& b);

}  // namespace orthofuse

#endif  // ORTHOFUSE_LINALG_HPP_
