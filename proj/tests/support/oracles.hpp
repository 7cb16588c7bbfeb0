#pragma once

// Brute-force reference computations for the tests. Each builds the dense
// joint object the sampler avoids (Kronecker designs, full joint
// covariances, explicit inverses) so it shares no code with the library
// beyond vec/low.

#include "ressm/core/linalg.hpp"
#include "ressm/core/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using ressm::Index;
using ressm::Matrix;
using ressm::Vector;

inline Matrix random_matrix(Index rows, Index cols, ressm::stats::RngStream& rng,
                            double scale = 1.0) {
  Matrix x(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) x(r, c) = scale * rng.normal();
  }
  return x;
}

inline Matrix random_spd(Index n, ressm::stats::RngStream& rng, double ridge = 1.0) {
  const Matrix b = random_matrix(n, n, rng);
  return b * b.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

inline Matrix random_lower(Index P, Index Q, ressm::stats::RngStream& rng) {
  Matrix t = random_matrix(P, Q, rng, 0.7);
  for (Index q = 0; q < Q; ++q) {
    for (Index p = 0; p < q; ++p) t(p, q) = 0.0;
    t(q, q) = 0.5 + std::abs(t(q, q));
  }
  return t;
}

struct Moments {
  Vector mean;
  Matrix precision;
};

/// Joint Gaussian precision and linear term of vec(M) (Q K entries) given
/// Y, Theta, A, sigma^2, with the first m states N(0, tau0^-1 I).
inline void latent_joint(const Matrix& y, const Matrix& theta, const Matrix& a,
                         double sigma2, double tau0, Index K, Matrix& J, Vector& h) {
  const Index Q = theta.cols();
  const Index m = a.cols() / Q;
  const Index n = Q * K;
  J = Matrix::Zero(n, n);
  h = Vector::Zero(n);
  const Matrix tt = theta.transpose() * theta / sigma2;
  for (Index k = 0; k < K; ++k) {
    J.block(k * Q, k * Q, Q, Q) += tt;
    h.segment(k * Q, Q) += theta.transpose() * y.col(k) / sigma2;
  }
  for (Index s = m; s < K; ++s) {
    Matrix D = Matrix::Zero(Q, n);
    D.block(0, s * Q, Q, Q) = Matrix::Identity(Q, Q);
    for (Index l = 1; l <= m; ++l) D.block(0, (s - l) * Q, Q, Q) = -a.middleCols((l - 1) * Q, Q);
    J += D.transpose() * D;
  }
  for (Index k = 0; k < m; ++k) J.block(k * Q, k * Q, Q, Q) += tau0 * Matrix::Identity(Q, Q);
}

/// Conditional of M(t_k) given the other timepoints by the Schur
/// complement of the joint covariance.
inline Moments latent_conditional(const Matrix& y, const Matrix& M, const Matrix& theta,
                                  const Matrix& a, double sigma2, double tau0, Index k) {
  const Index Q = theta.cols();
  const Index K = y.cols();
  Matrix J;
  Vector h;
  latent_joint(y, theta, a, sigma2, tau0, K, J, h);
  const Matrix cov = J.inverse();
  const Vector mu = cov * h;
  const Index n = Q * K;
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (i < k * Q || i >= (k + 1) * Q) rest.push_back(i);
  }
  const auto nr = static_cast<Index>(rest.size());
  Matrix s_kr(Q, nr), s_rr(nr, nr);
  Vector d(nr);
  const Vector vm = ressm::stats::vec(M);
  for (Index c = 0; c < nr; ++c) {
    d[c] = vm[rest[c]] - mu[rest[c]];
    for (Index r = 0; r < Q; ++r) s_kr(r, c) = cov(k * Q + r, rest[c]);
    for (Index r = 0; r < nr; ++r) s_rr(r, c) = cov(rest[r], rest[c]);
  }
  const Matrix s_rr_inv = s_rr.inverse();
  Moments out;
  out.mean = mu.segment(k * Q, Q) + s_kr * s_rr_inv * d;
  const Matrix cond_cov = cov.block(k * Q, k * Q, Q, Q) - s_kr * s_rr_inv * s_kr.transpose();
  out.precision = cond_cov.inverse();
  return out;
}

/// vec(A) | M as a stacked regression with rows (z_s^T kron I_Q).
inline Moments dynamics_conditional(const Matrix& M, Index m, const Matrix& prior_precision,
                                    const Vector& prior_mean) {
  const Index Q = M.rows();
  const Index K = M.cols();
  const Index rows = Q * (K - m);
  Matrix X = Matrix::Zero(rows, m * Q * Q);
  Vector target(rows);
  for (Index s = m; s < K; ++s) {
    Vector z(m * Q);
    for (Index l = 1; l <= m; ++l) z.segment((l - 1) * Q, Q) = M.col(s - l);
    const Index r0 = (s - m) * Q;
    for (Index c = 0; c < m * Q; ++c) {
      X.block(r0, c * Q, Q, Q) = z[c] * Matrix::Identity(Q, Q);
    }
    target.segment(r0, Q) = M.col(s);
  }
  Moments out;
  out.precision = X.transpose() * X + prior_precision;
  out.mean = out.precision.inverse() * (X.transpose() * target + prior_precision * prior_mean);
  return out;
}

/// low(Theta) | Y, M as a regression of vec(Y) on (M^T kron I_P) restricted
/// to the lower-triangular columns.
inline Moments loading_conditional(const Matrix& y, const Matrix& M, double sigma2,
                                   const Matrix& prior_precision, const Vector& prior_mean) {
  const Index P = y.rows();
  const Index Q = M.rows();
  const Index K = M.cols();
  Matrix full = Matrix::Zero(P * K, P * Q);
  for (Index k = 0; k < K; ++k) {
    for (Index q = 0; q < Q; ++q) {
      full.block(k * P, q * P, P, P) = M(q, k) * Matrix::Identity(P, P);
    }
  }
  std::vector<Index> cols;
  for (Index q = 0; q < Q; ++q) {
    for (Index p = q; p < P; ++p) cols.push_back(q * P + p);
  }
  Matrix X(P * K, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) X.col(static_cast<Index>(c)) = full.col(cols[c]);
  Moments out;
  out.precision = X.transpose() * X / sigma2 + prior_precision;
  out.mean = out.precision.inverse() *
             (X.transpose() * ressm::stats::vec(y) / sigma2 + prior_precision * prior_mean);
  return out;
}

/// Parent x of n children c_j ~ N(x, C^-1) with prior N(g, G^-1), by a
/// stacked regression with a block-diagonal noise precision.
inline Moments parent_conditional(const Matrix& G, const Vector& g, const Matrix& C,
                                  const std::vector<Vector>& children) {
  const Index d = g.size();
  const auto n = static_cast<Index>(children.size());
  Matrix X(n * d, d);
  Matrix W = Matrix::Zero(n * d, n * d);
  Vector c(n * d);
  for (Index j = 0; j < n; ++j) {
    X.middleRows(j * d, d) = Matrix::Identity(d, d);
    W.block(j * d, j * d, d, d) = C;
    c.segment(j * d, d) = children[static_cast<std::size_t>(j)];
  }
  Moments out;
  out.precision = X.transpose() * W * X + G;
  out.mean = out.precision.inverse() * (X.transpose() * W * c + G * g);
  return out;
}

inline double log_normal_density(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

/// Complete-data log-likelihood of one segment, one scalar observation at
/// a time.
inline double naive_complete_loglik(const Matrix& y, const Matrix& M, const Matrix& theta,
                                    const Matrix& a, double sigma2, double tau0) {
  const Index Q = M.rows();
  const Index m = a.cols() / Q;
  double total = 0.0;
  for (Index k = 0; k < y.cols(); ++k) {
    for (Index p = 0; p < y.rows(); ++p) {
      double fit = 0.0;
      for (Index q = 0; q < Q; ++q) fit += theta(p, q) * M(q, k);
      total += log_normal_density(y(p, k), fit, sigma2);
    }
  }
  for (Index k = 0; k < M.cols(); ++k) {
    for (Index q = 0; q < Q; ++q) {
      if (k < m) {
        if (tau0 > 0.0) total += log_normal_density(M(q, k), 0.0, 1.0 / tau0);
        continue;
      }
      double pred = 0.0;
      for (Index l = 1; l <= m; ++l) {
        for (Index c = 0; c < Q; ++c) pred += a(q, (l - 1) * Q + c) * M(c, k - l);
      }
      total += log_normal_density(M(q, k), pred, 1.0);
    }
  }
  return total;
}

/// Theta A (Theta^T Theta)^-1 Theta^T with an explicit dense inverse.
inline Matrix pinv_connectivity(const Matrix& theta, const Matrix& a_h) {
  return theta * a_h * (theta.transpose() * theta).inverse() * theta.transpose();
}

/// Log-density of W(dof, scale) at X up to the normalizing constant.
inline double wishart_kernel(const Matrix& X, double dof, const Matrix& scale) {
  const Index d = X.rows();
  return 0.5 * (dof - static_cast<double>(d) - 1.0) * std::log(X.determinant()) -
         0.5 * (scale.inverse() * X).trace();
}

/// Random orthogonal matrix from a QR factorization.
inline Matrix random_orthogonal(Index n, ressm::stats::RngStream& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace oracle
