#pragma once

#include "ressm/gibbs/conditionals.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"

#include <array>
#include <cstdint>

namespace ressm::gibbs {

enum class SegmentUpdate { kDynamics, kLoading, kNoise };

/// Phase order of one sweep: M, then the segment-level A / Theta / sigma^2
/// in `segment_order`, then subjects, groups, population and variance
/// components.
struct SweepPlan {
  std::array<SegmentUpdate, 3> segment_order{
      SegmentUpdate::kDynamics, SegmentUpdate::kLoading, SegmentUpdate::kNoise};
  /// Initialization chain: one Theta_0 shared by every segment, flat prior,
  /// all Theta levels tied to it. The A hierarchy is sampled as usual.
  bool shared_loading = false;
};

/// One block-Gibbs transition over a fixed dataset. Stateless apart from
/// configuration: every draw comes from a stream keyed by (seed, phase,
/// unit, iteration), so results do not depend on the thread count.
class GibbsSampler {
 public:
  GibbsSampler(const model::HierDataset& data, model::ModelSpec spec,
               model::Hyperparams hyper, SweepPlan plan, std::uint64_t seed,
               int threads);

  /// Makes a freshly initialized state safe to sweep: fills all-zero M
  /// (ridge projection, or N(0, I) when Theta is rank-deficient) and, if
  /// any loading is rank-deficient, runs one loading-only update.
  void prime(model::ChainState& state) const;

  /// One full transition; iterations are 1-based.
  void sweep(model::ChainState& state, int iteration) const;

  void update_segments(model::ChainState& state, int iteration) const;
  void update_subjects(model::ChainState& state, int iteration) const;
  void update_groups(model::ChainState& state, int iteration) const;
  void update_population(model::ChainState& state, int iteration) const;
  void update_variance_components(model::ChainState& state,
                                  int iteration) const;

  const model::HierDataset& data() const { return *data_; }
  const model::ModelSpec& spec() const { return spec_; }
  const model::Hyperparams& hyper() const { return hyper_; }
  const SweepPlan& plan() const { return plan_; }
  std::uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }

 private:
  stats::RngStream stream(stats::StreamTag tag, std::uint32_t unit,
                          int iteration) const;
  void update_segment(model::ChainState& state, int s, int iteration) const;
  void update_segment_loadings_only(model::ChainState& state,
                                    int iteration) const;
  void update_pooled_loading(model::ChainState& state, int r,
                             int iteration) const;
  void update_shared_loading(model::ChainState& state, int iteration) const;
  void update_pooled_dynamics(model::ChainState& state, int r,
                              int iteration) const;

  const model::HierDataset* data_;
  model::ModelSpec spec_;
  model::Hyperparams hyper_;
  SweepPlan plan_;
  std::uint64_t seed_;
  int threads_;
};

/// Statistics of each segment, computed in parallel and summed in unit order.
LoadingStats pooled_loading_stats(const model::HierDataset& data,
                                  const model::ChainState& state, int first,
                                  int count, int threads);
DynamicsStats pooled_dynamics_stats(const model::ChainState& state, Index m,
                                    int first, int count, int threads);

}  // namespace ressm::gibbs
