#include "doctest.h"

#include "ressm/core/error.hpp"
#include "ressm/diag/loglik.hpp"
#include "ressm/gibbs/chain.hpp"
#include "ressm/gibbs/sampler.hpp"
#include "ressm/ident/initialization.hpp"
#include "ressm/io/checkpoint.hpp"
#include "ressm/sim/simulator.hpp"
#include "support/compare.hpp"

#include <cmath>
#include <filesystem>
#include <optional>

using namespace ressm;
using model::HierLayout;

namespace {

sim::SimResult small_data(std::uint64_t seed, Index Q = 2, Index m = 2) {
  auto sc = sim::reference_scenario(HierLayout::balanced(2, 3, 2), 5, Q, m, 60);
  sc.policy = sim::StationarityPolicy::kReject;
  sc.warmup = 100;
  return sim::simulate_hierarchy(sc, seed);
}

model::MCMCSchedule short_schedule() {
  model::MCMCSchedule s;
  s.n_iter = 60;
  s.n_burnin = 30;
  s.thin = 3;
  s.n_init_iter = 20;
  s.sign_check_start = 10;
  s.sign_check_end = 30;
  s.sign_check_every = 5;
  return s;
}

}  // namespace

TEST_CASE("chains are identical across thread counts") {
  const auto sim = small_data(1);
  model::ModelSpec spec{2, 2, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(5, 2, 2);
  gibbs::RunOptions opt;
  opt.seed = 77;
  opt.threads = 1;
  const auto one = gibbs::run_chain(sim.data, spec, hyper, short_schedule(), opt);
  for (int threads : {4, 8}) {
    opt.threads = threads;
    const auto many = gibbs::run_chain(sim.data, spec, hyper, short_schedule(), opt);
    CHECK(oracle::first_difference(one, many) == "");
  }
  opt.threads = 1;
  opt.seed = 78;
  const auto other = gibbs::run_chain(sim.data, spec, hyper, short_schedule(), opt);
  CHECK(oracle::first_difference(one, other) != "");
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted chain") {
  const auto sim = small_data(2);
  model::ModelSpec spec{2, 2, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(5, 2, 2);
  const auto schedule = short_schedule();
  gibbs::RunOptions opt;
  opt.seed = 5;
  opt.threads = 2;
  opt.checkpoint_every = 7;
  std::vector<gibbs::ChainOutput> saved;
  opt.on_checkpoint = [&](const gibbs::ChainOutput& o) { saved.push_back(o); };
  const auto full = gibbs::run_chain(sim.data, spec, hyper, schedule, opt);
  REQUIRE(saved.size() == 8);

  opt.on_checkpoint = {};
  for (std::size_t k : {std::size_t{1}, std::size_t{5}}) {
    const auto resumed = gibbs::run_chain(sim.data, spec, hyper, schedule, opt, &saved[k]);
    CHECK(oracle::first_difference(full, resumed) == "");
  }

  const auto dir = std::filesystem::temp_directory_path() / "ressm_unit_resume";
  std::filesystem::remove_all(dir);
  io::write_checkpoint(dir, saved[6]);
  const auto loaded = io::read_checkpoint(dir);
  const auto from_disk = gibbs::run_chain(sim.data, spec, hyper, schedule, opt, &loaded.output);
  CHECK(oracle::first_difference(full, from_disk) == "");
  std::filesystem::remove_all(dir);
}

TEST_CASE("one sweep with no burn-in keeps one draw") {
  const auto sim = small_data(3);
  model::ModelSpec spec{2, 2, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(5, 2, 2);
  model::MCMCSchedule s;
  s.n_iter = 1;
  s.n_burnin = 0;
  s.thin = 1;
  s.n_init_iter = 0;
  s.sign_tracking = false;
  gibbs::RunOptions opt;
  opt.seed = 9;
  const auto a = gibbs::run_chain(sim.data, spec, hyper, s, opt);
  const auto b = gibbs::run_chain(sim.data, spec, hyper, s, opt);
  CHECK(a.draws.rows() == 1);
  CHECK(a.draws.iterations[0] == 1);
  CHECK(a.trace.complete.size() == 1);
  CHECK(a.has_conditional_at_mean);
  CHECK(oracle::first_difference(a, b) == "");
}

TEST_CASE("kept draws have the documented shapes and finite log-likelihoods") {
  const auto sim = small_data(4);
  model::ModelSpec spec{2, 2, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(5, 2, 2);
  gibbs::RunOptions opt;
  opt.seed = 10;
  int kept_calls = 0;
  opt.on_kept = [&](int, const model::ChainState&) { ++kept_calls; };
  const auto out = gibbs::run_chain(sim.data, spec, hyper, short_schedule(), opt);
  const int L = short_schedule().kept_count();
  CHECK(out.draws.rows() == L);
  CHECK(kept_calls == L);
  CHECK(out.draws.a_pop.cols() == 8);
  CHECK(out.draws.a_grp.cols() == 16);
  CHECK(out.draws.a_sub.cols() == 48);
  CHECK(out.draws.theta_grp.cols() == 2 * 9);
  CHECK(out.draws.sigma2.cols() == 12);
  CHECK(out.draws.cov_diag.cols() == 2 * 8 * 2 + 8 + 2 * 9 * 2 + 9);
  for (double v : out.trace.complete) CHECK(std::isfinite(v));
  CHECK(out.trace.plugin.size() == static_cast<std::size_t>(L));
  const auto mean = out.posterior_mean();
  CHECK(mean.sigma2.size() == 12);
  CHECK(out.covariance_means().size() == 2 + 2 + 1 + 2 + 2 + 1);
}

TEST_CASE("fixed-all mode recovers group dynamics on homogeneous data") {
  auto sc = sim::reference_scenario(HierLayout::balanced(1, 20, 10), 8, 2, 2, 250);
  sc.a_seg_var.setZero();
  sc.a_sub_var.setZero();
  sc.sigma_u = 0.0;
  sc.sigma_psi = 0.0;
  const auto sim = sim::simulate_hierarchy(sc, 31);
  model::ModelSpec spec{2, 2, model::FitMode::kFixedAll};
  const auto hyper = model::default_hyperparams(8, 2, 2);
  model::MCMCSchedule s;
  s.n_iter = 400;
  s.n_burnin = 200;
  s.thin = 2;
  s.n_init_iter = 200;
  s.sign_check_start = 100;
  s.sign_check_end = 200;
  gibbs::RunOptions opt;
  opt.seed = 12;
  opt.record_plugin = false;
  const auto out = gibbs::run_chain(sim.data, spec, hyper, s, opt);
  const auto mean = out.posterior_mean();
  const Matrix& a = mean.a_grp[0];
  // A is identified up to column signs of the latent space: compare S A S.
  Matrix aligned = a;
  const Matrix& th = mean.theta_grp[0];
  for (Index q = 0; q < 2; ++q) {
    if (th.col(q).dot(sim.truth.theta_grp[0].col(q)) < 0) {
      aligned.row(q) *= -1.0;
      for (Index h = 0; h < 2; ++h) aligned.col(h * 2 + q) *= -1.0;
    }
  }
  CHECK((aligned - sim.truth.a_grp[0]).cwiseAbs().maxCoeff() < 0.05);
  for (int s2 = 0; s2 < sim.data.layout.total_segments(); ++s2) {
    CHECK(out.state.a_seg[s2] == out.state.a_grp[0]);
  }
}

TEST_CASE("invalid inputs are rejected before sampling") {
  const auto sim = small_data(5);
  model::ModelSpec spec{5, 1, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(5, 5, 1);
  gibbs::RunOptions opt;
  CHECK_THROWS_AS(gibbs::run_chain(sim.data, spec, hyper, short_schedule(), opt),
                  ValidationError);
  model::ModelSpec ok{2, 2, model::FitMode::kFull};
  auto bad = short_schedule();
  bad.sign_check_end = 50;
  CHECK_THROWS_AS(gibbs::run_chain(sim.data, ok, model::default_hyperparams(5, 2, 2), bad, opt),
                  ValidationError);
}
