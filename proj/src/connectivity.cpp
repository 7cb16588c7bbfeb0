#include "ressm/diag/connectivity.hpp"

#include "ressm/core/error.hpp"

#include <Eigen/QR>

#include <cmath>

namespace ressm::diag {

Matrix connectivity(const Matrix& theta, const Matrix& a_h) {
  const Index q = theta.cols();
  if (a_h.rows() != q || a_h.cols() != q) {
    throw ValidationError("connectivity: A_h must be Q x Q");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(theta);
  if (qr.rank() < q) {
    throw ValidationError("connectivity: Theta is rank-deficient (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(q) +
                          ")");
  }
  const Eigen::LLT<Matrix> gram(theta.transpose() * theta);
  const Matrix right = gram.solve(theta.transpose());  // (Theta^T Theta)^-1 Theta^T
  return theta * a_h * right;
}

std::vector<Matrix> connectivity_lags(const Matrix& theta, const Matrix& a) {
  const Index q = a.rows();
  std::vector<Matrix> out;
  for (Index h = 0; h < a.cols() / q; ++h) {
    out.push_back(connectivity(theta, a.middleCols(h * q, q)));
  }
  return out;
}

ConnectivitySet connectivity_set(const model::ChainState& st) {
  ConnectivitySet out;
  for (std::size_t s = 0; s < st.theta_seg.size(); ++s) {
    out.segment.push_back(connectivity_lags(st.theta_seg[s], st.a_seg[s]));
  }
  for (std::size_t u = 0; u < st.theta_sub.size(); ++u) {
    out.subject.push_back(connectivity_lags(st.theta_sub[u], st.a_sub[u]));
  }
  for (std::size_t r = 0; r < st.theta_grp.size(); ++r) {
    out.group.push_back(connectivity_lags(st.theta_grp[r], st.a_grp[r]));
  }
  return out;
}

std::vector<Edge> edge_list(const Matrix& b, int lag, double threshold) {
  std::vector<Edge> out;
  for (Index from = 0; from < b.cols(); ++from) {
    for (Index to = 0; to < b.rows(); ++to) {
      if (from != to && std::abs(b(to, from)) > threshold) {
        out.push_back({static_cast<int>(from), static_cast<int>(to), lag, b(to, from)});
      }
    }
  }
  return out;
}

std::vector<Matrix> connectivity_draws(const Matrix& theta_low_draws,
                                       const Matrix& a_vec_draws, Index P,
                                       Index Q, Index m) {
  const Index rows = theta_low_draws.rows();
  std::vector<Matrix> out(static_cast<std::size_t>(m), Matrix(rows, P * P));
  for (Index l = 0; l < rows; ++l) {
    const Matrix theta = stats::unlow(theta_low_draws.row(l).transpose(), P, Q);
    const Matrix a = stats::unvec(a_vec_draws.row(l).transpose(), Q, m * Q);
    const auto lags = connectivity_lags(theta, a);
    for (Index h = 0; h < m; ++h) out[h].row(l) = stats::vec(lags[h]).transpose();
  }
  return out;
}

}  // namespace ressm::diag
