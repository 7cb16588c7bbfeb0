#include "ressm/bench/bench.hpp"

#include "ressm/core/error.hpp"
#include "ressm/core/parallel.hpp"
#include "ressm/core/random.hpp"
#include "ressm/diag/dic.hpp"
#include "ressm/diag/summary.hpp"
#include "ressm/gibbs/sampler.hpp"
#include "ressm/ident/initialization.hpp"

#include <chrono>
#include <cmath>

namespace ressm::bench {
namespace {

double column_cosine(const Matrix& x, const Matrix& y, Index q) {
  const double nx = x.col(q).norm();
  const double ny = y.col(q).norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::clamp(x.col(q).dot(y.col(q)) / (nx * ny), -1.0, 1.0);
}

/// Multiplier of each vec(A) entry under S A S.
Vector dynamics_sign_pattern(const Vector& s, Index Q, Index m) {
  Vector out(m * Q * Q);
  for (Index e = 0; e < out.size(); ++e) {
    const Index row = e % Q;
    const Index col = (e / Q) % Q;
    out[e] = s[row] * s[col];
  }
  return out;
}

/// Multiplier of each low(Theta) entry under Theta S.
Vector loading_sign_pattern(const Vector& s, Index P, Index Q) {
  const stats::IndexMapF map(P, Q);
  Vector out(map.size());
  for (Index k = 0; k < map.size(); ++k) out[k] = s[map.indices()[k] / P];
  return out;
}

void scale_blocks(Matrix& draws, Index block, const std::vector<Vector>& patterns) {
  for (std::size_t b = 0; b < patterns.size(); ++b) {
    auto cols = draws.middleCols(static_cast<Index>(b) * block, block);
    cols = cols * patterns[b].asDiagonal();
  }
}

bool covers(const Matrix& draws, Index col, double truth, double level) {
  std::vector<double> v(draws.rows());
  for (Index l = 0; l < draws.rows(); ++l) v[l] = draws(l, col);
  const double alpha = 1.0 - level;
  return diag::quantile(v, 0.5 * alpha) <= truth &&
         truth <= diag::quantile(v, 1.0 - 0.5 * alpha);
}

template <typename Fn>
Vector concat(const std::vector<Matrix>& units, Fn flatten) {
  std::vector<Vector> parts;
  Index total = 0;
  for (const auto& u : units) {
    parts.push_back(flatten(u));
    total += parts.back().size();
  }
  Vector out(total);
  Index pos = 0;
  for (const auto& p : parts) {
    out.segment(pos, p.size()) = p;
    pos += p.size();
  }
  return out;
}

Rate coverage_of(const Matrix& draws, const Vector& truth, double level) {
  Rate r;
  for (Index c = 0; c < draws.cols(); ++c) {
    r.hits += covers(draws, c, truth[c], level) ? 1 : 0;
    ++r.total;
  }
  return r;
}

gibbs::RunOptions bench_options(std::uint64_t seed, bool dic) {
  gibbs::RunOptions opt;
  opt.seed = seed;
  opt.threads = 1;
  opt.record_plugin = dic;
  opt.record_fitted = dic;
  return opt;
}

sim::SimResult simulate_replicate(const sim::SimScenario& sc, std::uint64_t seed, int rep) {
  return sim::simulate_hierarchy(sc, replicate_seed(seed, rep, 0));
}

template <typename Body>
std::vector<ReplicateFailure> run_replicates(int replicates, int workers, Body body,
                                             const std::function<void(int)>& on_done) {
  std::vector<std::string> errors(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t k) {
    try {
      body(static_cast<int>(k));
    } catch (const std::exception& e) {
      errors[k] = e.what();
      if (errors[k].empty()) errors[k] = "unknown failure";
    }
    if (on_done) on_done(static_cast<int>(k));
  });
  std::vector<ReplicateFailure> out;
  for (int k = 0; k < replicates; ++k) {
    if (!errors[k].empty()) out.push_back({k, errors[k]});
  }
  return out;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, int rep, int purpose) {
  stats::RngStream rng(seed, stats::StreamTag::kReplicate,
                       static_cast<std::uint32_t>(rep),
                       static_cast<std::uint32_t>(purpose));
  return rng();
}

std::vector<Vector> group_signs(const model::ChainState& estimate,
                                const model::ChainState& truth) {
  std::vector<Vector> out;
  for (std::size_t r = 0; r < truth.theta_grp.size(); ++r) {
    const Index Q = truth.theta_grp[r].cols();
    Vector s = Vector::Ones(Q);
    for (Index q = 0; q < Q; ++q) {
      if (column_cosine(truth.theta_grp[r], estimate.theta_grp[r], q) < 0.0) s[q] = -1.0;
    }
    out.push_back(s);
  }
  return out;
}

void align_draws(gibbs::KeptDraws& d, const std::vector<Vector>& signs,
                 const model::HierLayout& layout, const model::ModelSpec& spec,
                 Index P) {
  const Index Q = spec.Q;
  std::vector<Vector> a_grp, t_grp, a_sub, t_sub;
  for (const auto& s : signs) {
    a_grp.push_back(dynamics_sign_pattern(s, Q, spec.m));
    t_grp.push_back(loading_sign_pattern(s, P, Q));
  }
  for (int u = 0; u < layout.total_subjects(); ++u) {
    const int r = layout.subject(u).r;
    a_sub.push_back(a_grp[r]);
    t_sub.push_back(t_grp[r]);
  }
  scale_blocks(d.a_grp, spec.la(), a_grp);
  scale_blocks(d.theta_grp, spec.ltheta(P), t_grp);
  scale_blocks(d.a_sub, spec.la(), a_sub);
  scale_blocks(d.theta_sub, spec.ltheta(P), t_sub);
}

CoverageResult evaluate_coverage(gibbs::ChainOutput out, const sim::SimResult& sim,
                                 const model::ModelSpec& spec, double level) {
  const auto& layout = sim.data.layout;
  const Index P = sim.data.P;
  const auto& truth = sim.truth;
  const auto signs = group_signs(out.posterior_mean(), truth);
  align_draws(out.draws, signs, layout, spec, P);
  const auto& d = out.draws;

  auto vec_fn = [](const Matrix& x) { return stats::vec(x); };
  auto low_fn = [](const Matrix& x) { return stats::low(x); };
  const Vector a_grp = concat(truth.a_grp, vec_fn);
  const Vector t_grp = concat(truth.theta_grp, low_fn);

  CoverageResult res;
  res.a_grp = coverage_of(d.a_grp, a_grp, level);
  res.theta_grp = coverage_of(d.theta_grp, t_grp, level);
  res.a_sub = coverage_of(d.a_sub, concat(truth.a_sub, vec_fn), level);
  res.theta_sub = coverage_of(d.theta_sub, concat(truth.theta_sub, low_fn), level);
  res.ree_a_grp = sim::relative_estimation_error(a_grp, d.a_grp.colwise().mean().transpose());
  res.ree_theta_grp =
      sim::relative_estimation_error(t_grp, d.theta_grp.colwise().mean().transpose());

  if (layout.groups() >= 2) {
    const Index la = spec.la();
    const auto contrast =
        diag::group_contrast(d.a_grp.leftCols(2 * la), la, {1.0, -1.0},
                             diag::Interval::kQuantile, false, level);
    const Vector diff = stats::vec(truth.a_grp[0] - truth.a_grp[1]);
    for (Index e = 0; e < la; ++e) {
      const bool flagged = contrast.flagged[static_cast<std::size_t>(e)];
      Rate& target = std::abs(diff[e]) > 1e-12 ? res.diag_detected : res.offdiag_false;
      target.hits += flagged ? 1 : 0;
      ++target.total;
    }
  }
  return res;
}

SignRateCounter::SignRateCounter(const model::ChainState& truth,
                                 const model::HierLayout& layout)
    : truth_(&truth), layout_(&layout) {
  const auto Q = static_cast<std::size_t>(truth.theta_grp.at(0).cols());
  const auto R = static_cast<std::size_t>(layout.groups());
  seg_.assign(R, std::vector<std::array<long, 3>>(Q, {0, 0, 0}));
  sub_ = seg_;
}

void SignRateCounter::observe(const model::ChainState& draw) {
  auto count = [](std::array<long, 3>& c, double cos) {
    if (cos >= 0.0) ++c[0];
    if (cos <= 0.0) ++c[1];
    ++c[2];
  };
  const Index Q = truth_->theta_grp[0].cols();
  for (int s = 0; s < layout_->total_segments(); ++s) {
    const int r = layout_->segment(s).r;
    for (Index q = 0; q < Q; ++q) {
      count(seg_[r][q], column_cosine(truth_->theta_seg[s], draw.theta_seg[s], q));
    }
  }
  for (int u = 0; u < layout_->total_subjects(); ++u) {
    const int r = layout_->subject(u).r;
    for (Index q = 0; q < Q; ++q) {
      count(sub_[r][q], column_cosine(truth_->theta_sub[u], draw.theta_sub[u], q));
    }
  }
}

Rate SignRateCounter::rate(const std::vector<std::vector<std::array<long, 3>>>& counts,
                           const std::vector<Vector>& signs) const {
  Rate out;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (std::size_t q = 0; q < counts[r].size(); ++q) {
      const auto& c = counts[r][q];
      out.hits += signs[r][static_cast<Index>(q)] > 0 ? c[0] : c[1];
      out.total += c[2];
    }
  }
  return out;
}

Rate SignRateCounter::segment_rate(const std::vector<Vector>& signs) const {
  return rate(seg_, signs);
}

Rate SignRateCounter::subject_rate(const std::vector<Vector>& signs) const {
  return rate(sub_, signs);
}

double mean_estimation_error(const model::ChainState& mean,
                             const model::ChainState& truth,
                             const std::vector<Vector>& signs,
                             const model::HierLayout& layout) {
  double total = 0.0;
  for (int s = 0; s < layout.total_segments(); ++s) {
    const auto& sg = signs[layout.segment(s).r];
    total += (truth.theta_seg[s] - mean.theta_seg[s] * sg.asDiagonal()).norm();
  }
  return total / layout.total_segments();
}

CoverageReport run_coverage_study(const CoverageStudy& study, std::uint64_t seed,
                                  int workers, const std::function<void(int)>& on_done) {
  CoverageReport rep;
  rep.full.resize(study.replicates);
  if (study.include_fixed_all) rep.fixed_all.resize(study.replicates);
  const auto& sc = study.scenario;
  rep.failures = run_replicates(study.replicates, workers, [&](int k) {
    const auto sim = simulate_replicate(sc, seed, k);
    const auto hyper = model::default_hyperparams(sc.P, sc.Q, sc.m);
    const model::ModelSpec full{sc.Q, sc.m, model::FitMode::kFull};
    const auto opt = bench_options(replicate_seed(seed, k, 1), false);
    rep.full[k] = evaluate_coverage(
        gibbs::run_chain(sim.data, full, hyper, study.schedule, opt), sim, full,
        study.level);
    if (study.include_fixed_all) {
      const model::ModelSpec fixed{sc.Q, sc.m, model::FitMode::kFixedAll};
      rep.fixed_all[k] = evaluate_coverage(
          gibbs::run_chain(sim.data, fixed, hyper, study.schedule, opt), sim, fixed,
          study.level);
    }
  }, on_done);
  return rep;
}

std::vector<SignArm> sign_arms() {
  return {{"no-treatment", false, false},
          {"initialize-only", true, false},
          {"tracking-only", false, true},
          {"two-stage", true, true}};
}

SignReport run_sign_study(const SignStudy& study, std::uint64_t seed, int workers,
                          const std::function<void(int)>& on_done) {
  SignReport rep;
  rep.arms = sign_arms();
  rep.results.assign(study.replicates, std::vector<SignArmResult>(rep.arms.size()));
  const auto& sc = study.scenario;
  rep.failures = run_replicates(study.replicates, workers, [&](int k) {
    const auto sim = simulate_replicate(sc, seed, k);
    const auto hyper = model::default_hyperparams(sc.P, sc.Q, sc.m);
    const model::ModelSpec spec{sc.Q, sc.m, model::FitMode::kFull};
    for (std::size_t a = 0; a < rep.arms.size(); ++a) {
      auto schedule = study.schedule;
      if (!rep.arms[a].initialize) schedule.n_init_iter = 0;
      schedule.sign_tracking = rep.arms[a].tracking;
      SignRateCounter counter(sim.truth, sim.data.layout);
      auto opt = bench_options(replicate_seed(seed, k, 1), false);
      opt.on_kept = [&](int, const model::ChainState& st) { counter.observe(st); };
      const auto out = gibbs::run_chain(sim.data, spec, hyper, schedule, opt);
      const auto mean = out.posterior_mean();
      const auto signs = group_signs(mean, sim.truth);
      auto& res = rep.results[k][a];
      res.csir_segment = counter.segment_rate(signs);
      res.csir_subject = counter.subject_rate(signs);
      res.mee = mean_estimation_error(mean, sim.truth, signs, sim.data.layout);
    }
  }, on_done);
  return rep;
}

DicEntry dic_entry(const gibbs::ChainOutput& out, const model::ModelSpec& spec) {
  if (!out.has_conditional_at_mean) {
    throw ValidationError("dic_entry: fitted values were not recorded");
  }
  DicEntry e;
  e.Q = spec.Q;
  e.m = spec.m;
  e.cdic = diag::compute_cdic(out.trace.complete, out.trace.plugin);
  const auto v = diag::compute_dic_variants(out.trace.conditional, out.conditional_at_mean);
  e.dic1 = v.dic1;
  e.dic2 = v.dic2;
  e.dic3 = v.dic3;
  e.p_d = v.p_d;
  e.p_v = v.p_v;
  return e;
}

DicReport run_dic_study(const DicStudy& study, std::uint64_t seed, int workers,
                        const std::function<void(int)>& on_done) {
  DicReport rep;
  rep.results.resize(study.replicates);
  rep.failures = run_replicates(study.replicates, workers, [&](int k) {
    const auto sim = simulate_replicate(study.scenario, seed, k);
    for (const Index q : study.q_values) {
      for (const Index m : study.m_values) {
        const model::ModelSpec spec{q, m, model::FitMode::kFull};
        const auto hyper = model::default_hyperparams(sim.data.P, q, m);
        const auto out = gibbs::run_chain(sim.data, spec, hyper, study.schedule,
                                          bench_options(replicate_seed(seed, k, 1), true));
        rep.results[k].push_back(dic_entry(out, spec));
      }
    }
  }, on_done);
  return rep;
}

PerfResult run_perf(const sim::SimScenario& sc, int iterations, std::uint64_t seed,
                    int threads) {
  const auto sim = sim::simulate_hierarchy(sc, seed, threads);
  const model::ModelSpec spec{sc.Q, sc.m, model::FitMode::kFull};
  const auto hyper = model::default_hyperparams(sc.P, sc.Q, sc.m);
  const gibbs::GibbsSampler sampler(sim.data, spec, hyper, {}, seed, threads);
  auto st = ident::initial_state(sim.data, spec, hyper, sc.theta_group.at(0));
  sampler.prime(st);
  sampler.sweep(st, 1);
  const auto start = std::chrono::steady_clock::now();
  for (int it = 2; it < iterations + 2; ++it) sampler.sweep(st, it);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {seconds / iterations, iterations, threads};
}

}  // namespace ressm::bench
