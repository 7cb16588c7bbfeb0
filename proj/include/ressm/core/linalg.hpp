#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace ressm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace stats {

/// Column-major stacking of an m x n matrix.
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index rows, Index cols);

/// Number of entries on or below the diagonal of a P x Q matrix (P >= Q).
Index low_length(Index rows, Index cols);

/// Positions of the lower-triangular entries of a P x Q matrix inside vec().
/// Satisfies vec(X)[indices()] == low(X).
class IndexMapF {
 public:
  IndexMapF(Index rows, Index cols);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  const std::vector<Index>& indices() const { return indices_; }

 private:
  Index rows_;
  Index cols_;
  std::vector<Index> indices_;
};

/// vec(X) with the strictly-upper entries removed. Throws ValidationError
/// when rows < cols.
Vector low(const Matrix& x);
/// Inverse of low(): rebuilds a P x Q matrix with a zero upper triangle.
Matrix unlow(const Vector& v, Index rows, Index cols);
/// Zeroes the strictly-upper triangle in place.
void zero_upper(Matrix& x);

void symmetrize(Matrix& x);

/// Cholesky of a symmetric positive-definite matrix. The input is
/// symmetrized first; on failure 1e-10 I is added once and the
/// factorization retried. A second failure throws NumericalError
/// mentioning `what`.
Eigen::LLT<Matrix> factorize_spd(Matrix q, std::string_view what);

/// Solves (L L^T) x = b with a precomputed factor.
Vector spd_solve(const Eigen::LLT<Matrix>& llt, const Vector& b);

}  // namespace stats
}  // namespace ressm
