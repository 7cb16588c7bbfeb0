#pragma once

#include "ressm/gibbs/chain.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"
#include "ressm/sim/simulator.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ressm::bench {

/// Independent seeds for replicate `rep`: one for the simulator and one for
/// the chain.
std::uint64_t replicate_seed(std::uint64_t seed, int rep, int purpose);

/// Column signs (+1 / -1) per group that align an estimate with the truth:
/// sign of cos(truth Theta_r column, estimated Theta_r column).
std::vector<Vector> group_signs(const model::ChainState& estimate,
                                const model::ChainState& truth);

/// Applies group sign matrices S_r to stored draws in place: Theta columns
/// are multiplied by S_r and every A by S_r A S_r.
void align_draws(gibbs::KeptDraws& draws, const std::vector<Vector>& signs,
                 const model::HierLayout& layout, const model::ModelSpec& spec,
                 Index P);

struct Rate {
  long hits = 0;
  long total = 0;
  double value() const { return total > 0 ? static_cast<double>(hits) / total : 0.0; }
  Rate& operator+=(const Rate& o) {
    hits += o.hits;
    total += o.total;
    return *this;
  }
};

/// Interval coverage of the truth and relative estimation errors for one
/// fitted replicate, after sign alignment to the truth.
struct CoverageResult {
  Rate a_grp, theta_grp, a_sub, theta_sub;
  double ree_a_grp = 0.0;
  double ree_theta_grp = 0.0;
  /// Group 0 minus group 1 contrast of A: flagged true differences on the
  /// diagonals and flagged off-diagonal entries (true difference zero).
  Rate diag_detected;
  Rate offdiag_false;
};
CoverageResult evaluate_coverage(gibbs::ChainOutput output,
                                 const sim::SimResult& sim,
                                 const model::ModelSpec& spec,
                                 double level = 0.95);

/// Fraction of kept segment and subject loading draws whose columns have
/// a non-negative cosine with the true columns, counted per group and
/// column for both orientations so the group alignment can be chosen after
/// the run.
class SignRateCounter {
 public:
  SignRateCounter(const model::ChainState& truth, const model::HierLayout& layout);
  void observe(const model::ChainState& draw);
  Rate segment_rate(const std::vector<Vector>& signs) const;
  Rate subject_rate(const std::vector<Vector>& signs) const;

 private:
  Rate rate(const std::vector<std::vector<std::array<long, 3>>>& counts,
            const std::vector<Vector>& signs) const;

  const model::ChainState* truth_;
  const model::HierLayout* layout_;
  // [r][q] -> {cos >= 0, cos <= 0, checked}
  std::vector<std::vector<std::array<long, 3>>> seg_, sub_;
};

/// Mean Frobenius error of aligned segment loadings.
double mean_estimation_error(const model::ChainState& mean,
                             const model::ChainState& truth,
                             const std::vector<Vector>& signs,
                             const model::HierLayout& layout);

struct ReplicateFailure {
  int replicate;
  std::string what;
};

struct CoverageStudy {
  sim::SimScenario scenario;  // template; reseeded per replicate
  model::MCMCSchedule schedule;
  int replicates = 50;
  bool include_fixed_all = true;
  double level = 0.95;
};
struct CoverageReport {
  std::vector<CoverageResult> full;
  std::vector<CoverageResult> fixed_all;  // empty unless requested
  std::vector<ReplicateFailure> failures;
};
CoverageReport run_coverage_study(const CoverageStudy& study,
                                  std::uint64_t seed, int workers,
                                  const std::function<void(int)>& on_done = {});

struct SignArm {
  std::string name;
  bool initialize;
  bool tracking;
};
/// No-treatment, initialize-only, tracking-only and two-stage.
std::vector<SignArm> sign_arms();

struct SignStudy {
  sim::SimScenario scenario;
  model::MCMCSchedule schedule;  // the two-stage schedule
  int replicates = 10;
};
struct SignArmResult {
  Rate csir_segment, csir_subject;
  double mee = 0.0;
};
struct SignReport {
  std::vector<SignArm> arms;
  std::vector<std::vector<SignArmResult>> results;  // [rep][arm]
  std::vector<ReplicateFailure> failures;
};
SignReport run_sign_study(const SignStudy& study, std::uint64_t seed,
                          int workers,
                          const std::function<void(int)>& on_done = {});

struct DicStudy {
  sim::SimScenario scenario;  // truth
  model::MCMCSchedule schedule;
  std::vector<Index> q_values{2, 3, 4};
  std::vector<Index> m_values{1, 2};
  int replicates = 10;
};
struct DicEntry {
  Index Q = 0;
  Index m = 0;
  double cdic = 0.0;
  double dic1 = 0.0, dic2 = 0.0, dic3 = 0.0;
  double p_d = 0.0, p_v = 0.0;
};
struct DicReport {
  std::vector<std::vector<DicEntry>> results;  // [rep][candidate]
  std::vector<ReplicateFailure> failures;
};
DicReport run_dic_study(const DicStudy& study, std::uint64_t seed, int workers,
                        const std::function<void(int)>& on_done = {});

/// cDIC and DIC variants of a finished chain.
DicEntry dic_entry(const gibbs::ChainOutput& out, const model::ModelSpec& spec);

struct PerfResult {
  double seconds_per_iteration = 0.0;
  int iterations = 0;
  int threads = 1;
};
/// Times `iterations` sweeps (after one untimed sweep) of the full sampler
/// on simulated data.
PerfResult run_perf(const sim::SimScenario& scenario, int iterations,
                    std::uint64_t seed, int threads);

}  // namespace ressm::bench
