#include "ressm/core/distributions.hpp"

#include "ressm/core/error.hpp"

#include <cmath>
#include <string>

namespace ressm::stats {
namespace {

Vector standard_normal(Index n, RngStream& rng) {
  Vector z(n);
  for (Index t = 0; t < n; ++t) z[t] = rng.normal();
  return z;
}

// Lower-triangular Bartlett factor: sqrt(chi2(dof - t)) on the diagonal,
// standard normals below it.
Matrix bartlett_factor(double dof, Index dim, RngStream& rng) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Index t = 0; t < dim; ++t) {
    a(t, t) = std::sqrt(rng.chi_square(dof - static_cast<double>(t)));
    for (Index s = 0; s < t; ++s) a(t, s) = rng.normal();
  }
  return a;
}

void check_dof(double dof, Index dim) {
  if (!(dof >= static_cast<double>(dim))) {
    throw ValidationError("Wishart dof " + std::to_string(dof) +
                          " below dimension " + std::to_string(dim));
  }
}

}  // namespace

Vector CanonicalGaussian::mean() const {
  return factorize_spd(precision, "canonical gaussian mean").solve(b);
}

Vector sample_canonical_gaussian(const CanonicalGaussian& g, RngStream& rng,
                                 std::string_view what) {
  return sample_canonical_gaussian(factorize_spd(g.precision, what), g.b, rng);
}

Vector sample_canonical_gaussian(const Eigen::LLT<Matrix>& factor,
                                 const Vector& b, RngStream& rng) {
  const auto lower = factor.matrixL();
  Vector w = lower.solve(b);
  w += standard_normal(b.size(), rng);
  return factor.matrixU().solve(w);
}

Matrix sample_wishart(double dof, const Matrix& scale, RngStream& rng) {
  check_dof(dof, scale.rows());
  const auto llt = factorize_spd(scale, "Wishart scale");
  const Matrix l = llt.matrixL();
  const Matrix la = l * bartlett_factor(dof, scale.rows(), rng);
  Matrix w = la * la.transpose();
  symmetrize(w);
  return w;
}

Matrix sample_wishart_inverse_scale(double dof, const Matrix& inverse_scale,
                                    RngStream& rng) {
  check_dof(dof, inverse_scale.rows());
  // inverse_scale = L L^T, so scale = L^{-T} L^{-1} and L^{-T} A is a
  // square root of the draw.
  const auto llt = factorize_spd(inverse_scale, "Wishart inverse scale");
  const Matrix a = bartlett_factor(dof, inverse_scale.rows(), rng);
  const Matrix t = llt.matrixU().solve(a);
  Matrix w = t * t.transpose();
  symmetrize(w);
  return w;
}

double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ValidationError("inverse gamma needs positive shape and rate, got " +
                          std::to_string(shape) + ", " + std::to_string(rate));
  }
  return 1.0 / rng.gamma(shape, 1.0 / rate);
}

}  // namespace ressm::stats
