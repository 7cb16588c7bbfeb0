#include "ressm/gibbs/conditionals.hpp"

#include "ressm/core/error.hpp"

#include <algorithm>
#include <optional>
#include <vector>
#include <utility>

namespace ressm::gibbs {

DynamicsStats& DynamicsStats::operator+=(const DynamicsStats& other) {
  szz += other.szz;
  smz += other.smz;
  return *this;
}

DynamicsStats dynamics_stats(const Matrix& M, Index m) {
  const Index q = M.rows();
  const Index n = M.cols() - m;
  Matrix z(m * q, n);
  for (Index h = 1; h <= m; ++h) {
    z.middleRows((h - 1) * q, q) = M.middleCols(m - h, n);
  }
  DynamicsStats st;
  st.szz.noalias() = z * z.transpose();
  st.smz.noalias() = M.rightCols(n) * z.transpose();
  return st;
}

LoadingStats& LoadingStats::operator+=(const LoadingStats& other) {
  smm += other.smm;
  sym += other.sym;
  return *this;
}

LoadingStats loading_stats(const Matrix& y, const Matrix& M, double sigma2) {
  LoadingStats st;
  st.smm.noalias() = (M * M.transpose()) / sigma2;
  st.sym.noalias() = (y * M.transpose()) / sigma2;
  return st;
}

LatentWindow latent_window(Index k, Index m, Index K) {
  return {std::max<Index>(0, m - k), std::min<Index>(m, K - 1 - k)};
}

Matrix latent_precision(const Matrix& theta_gram_scaled, const Matrix& a,
                        Index lo, Index hi, double init_precision) {
  const Index q = a.rows();
  Matrix prec = theta_gram_scaled;
  for (Index h = lo; h <= hi; ++h) {
    if (h == 0) {
      prec.diagonal().array() += 1.0;
    } else {
      const auto block = a.middleCols((h - 1) * q, q);
      prec.noalias() += block.transpose() * block;
    }
  }
  if (lo > 0 && init_precision > 0.0) {
    prec.diagonal().array() += init_precision;
  }
  return prec;
}

namespace {

// MVAR residual at s: M_s - sum_{h>=1} A_h M_{s-h} (the innovation w_s).
Vector innovation(const Matrix& M, const Matrix& a, Index s) {
  const Index q = a.rows();
  const Index m = a.cols() / q;
  Vector w = M.col(s);
  for (Index h = 1; h <= m; ++h) {
    w.noalias() -= a.middleCols((h - 1) * q, q) * M.col(s - h);
  }
  return w;
}

// Natural mean of M(t_k): sigma^-2 Theta^T Y_k plus, for each lag h in the
// window, -A_h^T sum_{h2 != h} A_h2 M_{k+h-h2} with A_0 = -I. With w_s the
// innovation at s = k + h that sum equals -(w_s + A_h M_k).
Vector latent_natural_mean(const Vector& scaled_theta_y, const Matrix& M,
                           const Matrix& a, Index k, LatentWindow win) {
  const Index q = a.rows();
  Vector b = scaled_theta_y;
  for (Index h = win.lo; h <= win.hi; ++h) {
    const Vector w = innovation(M, a, k + h);
    if (h == 0) {
      b.noalias() += M.col(k) - w;
    } else {
      const auto block = a.middleCols((h - 1) * q, q);
      b.noalias() += block.transpose() * (w + block * M.col(k));
    }
  }
  return b;
}

}  // namespace

CanonicalGaussian latent_conditional(const Matrix& y, const Matrix& M,
                                     const Matrix& theta, const Matrix& a,
                                     double sigma2, Index k,
                                     double init_precision) {
  const Index m = a.cols() / a.rows();
  const auto win = latent_window(k, m, M.cols());
  const Matrix gram = theta.transpose() * theta / sigma2;
  CanonicalGaussian g;
  g.precision = latent_precision(gram, a, win.lo, win.hi, init_precision);
  g.b = latent_natural_mean(theta.transpose() * y.col(k) / sigma2, M, a, k, win);
  return g;
}

void update_latent_states(const Matrix& y, Matrix& M, const Matrix& theta,
                          const Matrix& a, double sigma2,
                          double init_precision, stats::RngStream& rng) {
  const Index q = a.rows();
  const Index m = a.cols() / q;
  const Index K = M.cols();
  const Matrix gram = theta.transpose() * theta / sigma2;
  const Matrix theta_y = theta.transpose() * y / sigma2;
  // Factors keyed by window, lo * (m + 1) + hi.
  std::vector<std::optional<Eigen::LLT<Matrix>>> factors(
      static_cast<std::size_t>((m + 1) * (m + 1)));
  std::vector<Matrix> lower(factors.size());
  Vector b(q), w(q);
  for (Index k = 0; k < K; ++k) {
    const auto win = latent_window(k, m, K);
    const auto key = static_cast<std::size_t>(win.lo * (m + 1) + win.hi);
    if (!factors[key]) {
      factors[key] = stats::factorize_spd(
          latent_precision(gram, a, win.lo, win.hi, init_precision),
          "latent state precision");
      lower[key] = factors[key]->matrixL();
    }
    const Matrix& L = lower[key];
    b = theta_y.col(k);
    for (Index h = win.lo; h <= win.hi; ++h) {
      const Index s = k + h;
      for (Index i = 0; i < q; ++i) {
        double v = M(i, s);
        for (Index h2 = 1; h2 <= m; ++h2) {
          for (Index j = 0; j < q; ++j) v -= a(i, (h2 - 1) * q + j) * M(j, s - h2);
        }
        w[i] = v;
      }
      if (h == 0) {
        for (Index i = 0; i < q; ++i) b[i] += M(i, k) - w[i];
      } else {
        const Index off = (h - 1) * q;
        for (Index i = 0; i < q; ++i) {
          for (Index j = 0; j < q; ++j) w[i] += a(i, off + j) * M(j, k);
        }
        for (Index j = 0; j < q; ++j) {
          double v = 0.0;
          for (Index i = 0; i < q; ++i) v += a(i, off + j) * w[i];
          b[j] += v;
        }
      }
    }
    // Forward solve L v = b, add noise, back solve L^T x = v.
    for (Index i = 0; i < q; ++i) {
      double v = b[i];
      for (Index j = 0; j < i; ++j) v -= L(i, j) * b[j];
      b[i] = v / L(i, i);
    }
    for (Index i = 0; i < q; ++i) b[i] += rng.normal();
    for (Index i = q - 1; i >= 0; --i) {
      double v = b[i];
      for (Index j = i + 1; j < q; ++j) v -= L(j, i) * b[j];
      b[i] = v / L(i, i);
    }
    M.col(k) = b;
  }
}

CanonicalGaussian dynamics_conditional(const DynamicsStats& st,
                                       const Matrix& prior_precision,
                                       const Vector& prior_mean_vec) {
  const Index q = st.smz.rows();
  const Index cols = st.smz.cols();
  CanonicalGaussian g;
  g.precision = prior_precision;
  // (S_zz kron I_Q)(c Q + r, c' Q + r') = S_zz(c, c') [r == r'].
  for (Index c = 0; c < cols; ++c) {
    for (Index c2 = 0; c2 < cols; ++c2) {
      const double v = st.szz(c, c2);
      for (Index r = 0; r < q; ++r) g.precision(c * q + r, c2 * q + r) += v;
    }
  }
  g.b = prior_precision * prior_mean_vec + stats::vec(st.smz);
  return g;
}

CanonicalGaussian loading_conditional(const LoadingStats& st,
                                      const Matrix& prior_precision,
                                      const Vector& prior_mean_low) {
  const Index p_dim = st.sym.rows();
  const Index q_dim = st.sym.cols();
  // Position of (p, q), p >= q, inside low(): columns stacked, each column
  // q holding rows q..P-1.
  std::vector<Index> offset(static_cast<std::size_t>(q_dim));
  for (Index q = 0, pos = 0; q < q_dim; ++q) {
    offset[q] = pos;
    pos += p_dim - q;
  }
  auto at = [&](Index p, Index q) { return offset[q] + (p - q); };

  CanonicalGaussian g;
  g.precision = prior_precision;
  for (Index p = 0; p < p_dim; ++p) {
    const Index free = std::min(p + 1, q_dim);
    for (Index q = 0; q < free; ++q) {
      for (Index q2 = 0; q2 < free; ++q2) {
        g.precision(at(p, q), at(p, q2)) += st.smm(q, q2);
      }
    }
  }
  g.b = prior_precision * prior_mean_low + stats::low(st.sym);
  return g;
}

CanonicalGaussian parent_conditional(const Matrix& parent_precision,
                                     const Vector& grandparent,
                                     const Matrix& child_precision,
                                     const Vector& child_sum, int n_children) {
  CanonicalGaussian g;
  g.precision = parent_precision + static_cast<double>(n_children) * child_precision;
  g.b = parent_precision * grandparent + child_precision * child_sum;
  return g;
}

CanonicalGaussian population_conditional(const Matrix& group_precision,
                                         const Vector& group_sum, int groups,
                                         double prior_precision) {
  CanonicalGaussian g;
  g.precision = static_cast<double>(groups) * group_precision;
  g.precision.diagonal().array() += prior_precision;
  g.b = group_precision * group_sum;
  return g;
}

WishartPosterior wishart_conditional(double nu, double kappa,
                                     const Matrix& scatter, int n) {
  WishartPosterior w{nu + n, scatter};
  w.inverse_scale.diagonal().array() += kappa;
  return w;
}

InverseGammaPosterior noise_conditional(const Matrix& y, const Matrix& M,
                                        const Matrix& theta, double a0,
                                        double b0) {
  const double ssr = (y - theta * M).squaredNorm();
  const double n = static_cast<double>(y.size());
  return {a0 + 0.5 * n, b0 + 0.5 * ssr};
}

}  // namespace ressm::gibbs
