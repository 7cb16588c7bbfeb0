#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/core/random.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"

#include <cstdint>
#include <vector>

namespace ressm::sim {

enum class StationarityPolicy { kAllow, kReject };

/// Ground truth and dispersions for one synthetic study.
struct SimScenario {
  model::HierLayout layout;
  Index P = 8;
  Index Q = 2;
  Index m = 2;
  Index K = 250;
  std::vector<Matrix> a_group;      // A_r, Q x mQ
  std::vector<Matrix> theta_group;  // Theta_r, P x Q lower-triangular
  /// Diagonal covariances of vec(A_rij) around vec(A_ri) and of vec(A_ri)
  /// around vec(A_r), as variances in vec order.
  Vector a_seg_var;
  Vector a_sub_var;
  /// Isotropic standard deviations of low(Theta_rij) - low(Theta_ri) and
  /// low(Theta_ri) - low(Theta_r).
  double sigma_u = 0.04;
  double sigma_psi = 0.075;
  std::vector<double> noise_var;  // sigma^2_r per group
  int warmup = 500;
  StationarityPolicy policy = StationarityPolicy::kAllow;
  int max_retries = 100;
};

struct SimResult {
  model::HierDataset data;
  /// M, A and Theta at every level and sigma^2. Population A and Theta are
  /// the means of the group values; precisions are left at identity.
  model::ChainState truth;
};

/// Smooth decaying P x Q loading pattern with a zero upper triangle and
/// 0.5 on the diagonal, standing in for a real-data loading estimate.
Matrix synthetic_loading(Index P, Index Q);

/// Per-entry variances of vec(A) for a Q x mQ matrix: diag_lag1^2 on the
/// lag-1 diagonal, diag_later^2 on later-lag diagonals, off_diag^2 elsewhere.
Vector dynamics_variance_table(Index Q, Index m, double diag_lag1_sd,
                               double diag_later_sd, double off_diag_sd);

/// Group dynamics of the two-group design: group 0 has lag-1 diagonal
/// (0.95, 0.90, ...) and lag-2 diagonal (-0.55, -0.50, ...); group 1 has
/// I and -0.6 I. Lags beyond 2 are zero.
Matrix design_dynamics(Index Q, Index m, int group);

/// Two-group design scaled to the given layout: design_dynamics truths,
/// synthetic_loading for both groups, the dispersion tables of the
/// reference study and sigma^2 = 0.16.
SimScenario reference_scenario(model::HierLayout layout, Index P, Index Q,
                               Index m, Index K);

/// Draws the whole hierarchy and the data. Subjects use their own
/// substreams so the output does not depend on `threads`.
SimResult simulate_hierarchy(const SimScenario& scenario, std::uint64_t seed,
                             int threads = 1);

/// MVAR(m) trajectory with unit-variance innovations, started at zero, with
/// `warmup` steps discarded. Returns Q x K.
Matrix simulate_mvar(const Matrix& a, Index K, int warmup,
                     stats::RngStream& rng);

/// ||truth - estimate|| / ||truth||.
double relative_estimation_error(const Vector& truth, const Vector& estimate);

}  // namespace ressm::sim
