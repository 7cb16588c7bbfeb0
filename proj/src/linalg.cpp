#include "ressm/core/linalg.hpp"

#include "ressm/core/error.hpp"

#include <string>

namespace ressm::stats {

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw ValidationError("unvec: length " + std::to_string(v.size()) +
                          " does not match " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Index low_length(Index rows, Index cols) {
  return (2 * rows - cols + 1) * cols / 2;
}

IndexMapF::IndexMapF(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < cols) {
    throw ValidationError("low(): need rows >= cols, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  indices_.reserve(static_cast<std::size_t>(low_length(rows, cols)));
  for (Index q = 0; q < cols; ++q) {
    for (Index p = q; p < rows; ++p) indices_.push_back(q * rows + p);
  }
}

Vector low(const Matrix& x) {
  const IndexMapF f(x.rows(), x.cols());
  Vector out(f.size());
  const double* data = x.data();
  for (Index t = 0; t < f.size(); ++t) out[t] = data[f.indices()[t]];
  return out;
}

Matrix unlow(const Vector& v, Index rows, Index cols) {
  const IndexMapF f(rows, cols);
  if (v.size() != f.size()) {
    throw ValidationError("unlow: length " + std::to_string(v.size()) +
                          " does not match low_length " +
                          std::to_string(f.size()));
  }
  Matrix out = Matrix::Zero(rows, cols);
  double* data = out.data();
  for (Index t = 0; t < f.size(); ++t) data[f.indices()[t]] = v[t];
  return out;
}

void zero_upper(Matrix& x) {
  for (Index q = 1; q < x.cols(); ++q) {
    for (Index p = 0; p < std::min(q, x.rows()); ++p) x(p, q) = 0.0;
  }
}

void symmetrize(Matrix& x) {
  x = 0.5 * (x + x.transpose()).eval();
}

Eigen::LLT<Matrix> factorize_spd(Matrix q, std::string_view what) {
  if (!q.allFinite()) {
    throw NumericalError("non-finite precision matrix (" + std::string(what) +
                         ")");
  }
  symmetrize(q);
  Eigen::LLT<Matrix> llt(q);
  if (llt.info() == Eigen::Success) return llt;
  q.diagonal().array() += 1e-10;
  llt.compute(q);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("precision matrix is not SPD (" + std::string(what) +
                         ", dim " + std::to_string(q.rows()) + ")");
  }
  return llt;
}

Vector spd_solve(const Eigen::LLT<Matrix>& llt, const Vector& b) {
  return llt.solve(b);
}

}  // namespace ressm::stats
