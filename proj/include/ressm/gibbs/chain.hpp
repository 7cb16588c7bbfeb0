#pragma once

#include "ressm/gibbs/sampler.hpp"
#include "ressm/ident/initialization.hpp"
#include "ressm/ident/sign_tracking.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/spec.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace ressm::gibbs {

/// Thinned post-burn-in draws of the non-segment parameters, one row per
/// kept iteration. Units are concatenated in layout order: A blocks as
/// vec(A), Theta blocks as low(Theta).
struct KeptDraws {
  std::vector<int> iterations;
  Matrix a_pop, a_grp, a_sub;
  Matrix theta_pop, theta_grp, theta_sub;
  /// Diagonals of the covariances Sigma = precision^-1 in the order
  /// Sigma_v,r (all r), Sigma_gamma,r, Sigma_a, Sigma_u,r, Sigma_psi,r,
  /// Sigma_theta.
  Matrix cov_diag;
  Matrix sigma2;  // per segment

  int rows() const { return static_cast<int>(iterations.size()); }
};

/// Complete, plug-in and conditional log-likelihood per kept iteration.
struct LoglikTrace {
  std::vector<double> complete;     // log p(Y, M | Lambda)
  std::vector<double> plugin;       // log p(Y, M | Lambda-hat)
  std::vector<double> conditional;  // log p(Y | Theta M, sigma^2)
};

/// Sums over kept iterations; divide by `count` for posterior means.
struct RunningSums {
  int count = 0;
  model::ChainState state;  // every ChainState field, precisions included
  std::vector<Matrix> cov_v, cov_gamma, cov_u, cov_psi;
  Matrix cov_a, cov_theta;
  std::vector<Matrix> fitted;  // Theta_rij M_rij; empty if not recorded
};

struct ChainOutput {
  KeptDraws draws;
  LoglikTrace trace;
  RunningSums sums;
  ident::SignAudit audit;
  ident::InitializationResult stage1;
  model::ChainState state;  // state after `iterations_done` sweeps
  int iterations_done = 0;
  /// log p(Y | posterior-mean Theta M, posterior-mean sigma^2); set when
  /// the run completes with fitted values recorded.
  double conditional_at_mean = 0.0;
  bool has_conditional_at_mean = false;

  /// Elementwise posterior mean of every ChainState field.
  model::ChainState posterior_mean() const;
  /// Posterior means of the covariance matrices, in the cov_diag order.
  std::vector<Matrix> covariance_means() const;
};

struct Progress {
  int iteration;
  int total;
  std::string_view phase;  // "initialization", "burn-in", "sampling"
  double seconds;          // since run start
};

struct RunOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  SweepPlan plan;
  bool record_plugin = true;
  bool record_fitted = true;
  int checkpoint_every = 0;
  std::function<void(const ChainOutput&)> on_checkpoint;
  std::function<void(const Progress&)> on_progress;
  /// Called after every kept iteration with the current state.
  std::function<void(int iteration, const model::ChainState&)> on_kept;
};

/// Stage 1 (when schedule.n_init_iter > 0), then the main chain with sign
/// tracking inside the configured window. With `resume`, continues a
/// checkpointed run and produces the same output as an uninterrupted one.
ChainOutput run_chain(const model::HierDataset& data,
                      const model::ModelSpec& spec,
                      const model::Hyperparams& hyper,
                      const model::MCMCSchedule& schedule,
                      const RunOptions& options,
                      const ChainOutput* resume = nullptr);

}  // namespace ressm::gibbs
