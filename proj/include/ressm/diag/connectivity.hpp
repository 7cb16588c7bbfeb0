#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"

#include <vector>

namespace ressm::diag {

/// B_h = Theta A_h (Theta^T Theta)^{-1} Theta^T, P x P. The Gram inverse is
/// applied through a Cholesky solve. Throws ValidationError when Theta is
/// rank-deficient.
Matrix connectivity(const Matrix& theta, const Matrix& a_h);

/// One B per lag of a Q x mQ dynamics matrix.
std::vector<Matrix> connectivity_lags(const Matrix& theta, const Matrix& a);

/// Directional maps per level and lag, built from matching (Theta, A)
/// pairs. Each B is unchanged by column sign flips and orthogonal
/// rotations of the latent space.
struct ConnectivitySet {
  std::vector<std::vector<Matrix>> segment;  // [s][h]
  std::vector<std::vector<Matrix>> subject;  // [u][h]
  std::vector<std::vector<Matrix>> group;    // [r][h]
};
ConnectivitySet connectivity_set(const model::ChainState& state);

/// Directed edge p_from -> p_to at lag h: B(p_to, p_from).
struct Edge {
  int from;
  int to;
  int lag;  // 1-based
  double weight;
};
/// Entries with |B| > threshold, off-diagonal only.
std::vector<Edge> edge_list(const Matrix& b, int lag, double threshold = 0.05);

/// Per-draw group connectivity from kept draws (rows) of low(Theta_r) and
/// vec(A_r); returns one L x (P*P) matrix of vec(B_h) per lag.
std::vector<Matrix> connectivity_draws(const Matrix& theta_low_draws,
                                       const Matrix& a_vec_draws, Index P,
                                       Index Q, Index m);

}  // namespace ressm::diag
