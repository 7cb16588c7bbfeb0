#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ressm::ident {

struct InitializationResult {
  Matrix theta0_mean;  // P x Q; zero when no iterations ran
  int iterations = 0;
  std::vector<double> loglik;  // complete log-likelihood per iteration
};

/// Chain start shared by both stages: Theta at every level set to `theta`,
/// A at zero, sigma^2 at each segment's sample variance, precisions at the
/// prior scale (kappa I)^-1, M zero (filled by GibbsSampler::prime).
model::ChainState initial_state(const model::HierDataset& data,
                                const model::ModelSpec& spec,
                                const model::Hyperparams& hyper,
                                const Matrix& theta);

/// Stage 1: the shared-loading sampler (Theta_rij = Theta_ri = Theta_r =
/// Theta_0, flat prior) run for `iterations` sweeps from a zero Theta_0.
/// Returns the mean of Theta_0 over the second half of the run.
InitializationResult run_initialization(
    const model::HierDataset& data, const model::ModelSpec& spec,
    const model::Hyperparams& hyper, int iterations, std::uint64_t seed,
    int threads = 1,
    const std::function<void(int iteration)>& on_iteration = {});

}  // namespace ressm::ident
