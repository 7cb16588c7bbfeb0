#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/core/random.hpp"

#include <string_view>

namespace ressm::stats {

/// N_C(b, Q): Gaussian with precision Q and natural mean b, i.e. mean
/// Q^{-1} b and covariance Q^{-1}.
struct CanonicalGaussian {
  Vector b;
  Matrix precision;

  Index dim() const { return b.size(); }
  /// Q^{-1} b via Cholesky.
  Vector mean() const;
};

/// Draw from N_C(b, Q). Factorizes Q = L L^T, then returns
/// L^{-T} (L^{-1} b + z) with z standard normal; no explicit inverse.
Vector sample_canonical_gaussian(const CanonicalGaussian& g, RngStream& rng,
                                 std::string_view what = "canonical gaussian");
/// Same draw with a factor the caller already holds.
Vector sample_canonical_gaussian(const Eigen::LLT<Matrix>& factor,
                                 const Vector& b, RngStream& rng);

/// Bartlett draw from W(dof, scale): mean dof * scale.
/// Requires dof >= dim and an SPD scale.
Matrix sample_wishart(double dof, const Matrix& scale, RngStream& rng);

/// Draw from W(dof, inverse_scale^{-1}) without forming the inverse.
/// This is the conjugate posterior form W(nu + n, (H + S)^{-1}).
Matrix sample_wishart_inverse_scale(double dof, const Matrix& inverse_scale,
                                    RngStream& rng);

/// IG(shape, rate): reciprocal of a Gamma(shape, rate) draw.
double sample_inverse_gamma(double shape, double rate, RngStream& rng);

}  // namespace ressm::stats
