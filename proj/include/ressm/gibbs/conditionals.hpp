#pragma once

#include "ressm/core/distributions.hpp"
#include "ressm/core/linalg.hpp"
#include "ressm/core/random.hpp"

namespace ressm::gibbs {

using stats::CanonicalGaussian;

/// Sufficient statistics of one segment's MVAR regression M_s = A z_s + w_s
/// over s = m+1..K, with z_s = [M_{s-1}; ...; M_{s-m}].
struct DynamicsStats {
  Matrix szz;  // sum z z^T, mQ x mQ
  Matrix smz;  // sum M_s z^T, Q x mQ

  DynamicsStats& operator+=(const DynamicsStats& other);
};
DynamicsStats dynamics_stats(const Matrix& M, Index m);

/// sigma^-2-weighted sensor regression statistics of one segment.
struct LoadingStats {
  Matrix smm;  // sigma^-2 M M^T, Q x Q
  Matrix sym;  // sigma^-2 Y M^T, P x Q

  LoadingStats& operator+=(const LoadingStats& other);
};
LoadingStats loading_stats(const Matrix& y, const Matrix& M, double sigma2);

/// Precision of M(t_k) for the dynamics window [lo, hi] (lags h whose
/// residual at s = k + h lies in the likelihood), with A_0 = -I:
///   sigma^-2 Theta^T Theta + sum_{h=lo..hi} A_h^T A_h
/// plus init_precision * I when lo > 0 (the first m timepoints).
Matrix latent_precision(const Matrix& theta_gram_scaled, const Matrix& a,
                        Index lo, Index hi, double init_precision);

/// Dynamics window of timepoint k (0-based) for order m and length K.
struct LatentWindow {
  Index lo;
  Index hi;
};
LatentWindow latent_window(Index k, Index m, Index K);

/// Full conditional of M(t_k) given every other timepoint (0-based k).
CanonicalGaussian latent_conditional(const Matrix& y, const Matrix& M,
                                     const Matrix& theta, const Matrix& a,
                                     double sigma2, Index k,
                                     double init_precision = 0.0);

/// Single-site scan over k = 1..K, one factorization per window.
void update_latent_states(const Matrix& y, Matrix& M, const Matrix& theta,
                          const Matrix& a, double sigma2,
                          double init_precision, stats::RngStream& rng);

/// vec(A) | M with prior N(prior_mean_vec, prior_precision^{-1}); the
/// likelihood precision is (S_zz kron I_Q), filled entrywise.
CanonicalGaussian dynamics_conditional(const DynamicsStats& st,
                                       const Matrix& prior_precision,
                                       const Vector& prior_mean_vec);

/// low(Theta) | M, Y with prior N(prior_mean_low, prior_precision^{-1});
/// the likelihood precision is [S_mm kron I_P] restricted to the
/// lower-triangular entries, nonzero only within one channel p.
CanonicalGaussian loading_conditional(const LoadingStats& st,
                                      const Matrix& prior_precision,
                                      const Vector& prior_mean_low);

/// Parent of n exchangeable children: prior N(grandparent, parent_prec^-1),
/// children N(parent, child_prec^-1). Precision parent_prec + n child_prec,
/// natural mean parent_prec grandparent + child_prec child_sum.
CanonicalGaussian parent_conditional(const Matrix& parent_precision,
                                     const Vector& grandparent,
                                     const Matrix& child_precision,
                                     const Vector& child_sum, int n_children);

/// Population level: flat prior when prior_precision = 0, otherwise
/// N(0, prior_precision^{-1} I).
CanonicalGaussian population_conditional(const Matrix& group_precision,
                                         const Vector& group_sum, int groups,
                                         double prior_precision);

/// Conjugate posterior W(dof, inverse_scale^{-1}) of a precision matrix.
struct WishartPosterior {
  double dof;
  Matrix inverse_scale;
};
/// Prior W(nu, (kappa I)^{-1}) and n residual vectors with scatter S:
/// W(nu + n, (kappa I + S)^{-1}).
WishartPosterior wishart_conditional(double nu, double kappa,
                                     const Matrix& scatter, int n);

struct InverseGammaPosterior {
  double shape;
  double rate;
  double mean() const { return rate / (shape - 1.0); }
};
/// IG(a0 + PK/2, b0 + SSR/2) with SSR = ||Y - Theta M||_F^2.
InverseGammaPosterior noise_conditional(const Matrix& y, const Matrix& M,
                                        const Matrix& theta, double a0,
                                        double b0);

}  // namespace ressm::gibbs
