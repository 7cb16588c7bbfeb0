#include "ressm/gibbs/chain.hpp"

#include "ressm/core/error.hpp"
#include "ressm/diag/loglik.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace ressm::gibbs {
namespace {

Matrix covariance(const Matrix& precision) {
  return stats::factorize_spd(precision, "variance component")
      .solve(Matrix::Identity(precision.rows(), precision.cols()));
}

template <typename Fn>
Vector concat_units(const std::vector<Matrix>& units, Fn flatten) {
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

void append_row(Matrix& m, int row, const Vector& v) {
  if (m.cols() != v.size()) m.resize(m.rows(), v.size());
  m.row(row) = v.transpose();
}

void grow(Matrix& m, int rows) {
  m.conservativeResize(rows, m.cols());
}

struct Covariances {
  std::vector<Matrix> v, gamma, u, psi;
  Matrix a, theta;
};

Covariances covariances_of(const model::ChainState& st) {
  Covariances c;
  for (const auto& p : st.prec_v) c.v.push_back(covariance(p));
  for (const auto& p : st.prec_gamma) c.gamma.push_back(covariance(p));
  for (const auto& p : st.prec_u) c.u.push_back(covariance(p));
  for (const auto& p : st.prec_psi) c.psi.push_back(covariance(p));
  c.a = covariance(st.prec_a);
  c.theta = covariance(st.prec_theta);
  return c;
}

void add_all(std::vector<Matrix>& acc, const std::vector<Matrix>& x) {
  if (acc.empty()) {
    acc = x;
    return;
  }
  for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += x[t];
}

void add_one(Matrix& acc, const Matrix& x) {
  if (acc.size() == 0) {
    acc = x;
  } else {
    acc += x;
  }
}

void record(ChainOutput& out, const model::HierDataset& data,
            const model::ModelSpec& spec, const model::Hyperparams& hyper,
            const RunOptions& opt, const model::MCMCSchedule& schedule,
            int iteration) {
  const auto& st = out.state;
  auto& d = out.draws;
  const int row = d.rows();
  if (row == 0) {
    const int capacity = std::max(1, schedule.kept_count());
    for (Matrix* m : {&d.a_pop, &d.a_grp, &d.a_sub, &d.theta_pop, &d.theta_grp,
                      &d.theta_sub, &d.cov_diag, &d.sigma2}) {
      m->resize(capacity, 0);
    }
  }
  if (row >= d.a_pop.rows()) {
    for (Matrix* m : {&d.a_pop, &d.a_grp, &d.a_sub, &d.theta_pop, &d.theta_grp,
                      &d.theta_sub, &d.cov_diag, &d.sigma2}) {
      grow(*m, 2 * row);
    }
  }
  d.iterations.push_back(iteration);
  auto vec_fn = [](const Matrix& x) { return stats::vec(x); };
  auto low_fn = [](const Matrix& x) { return stats::low(x); };
  append_row(d.a_pop, row, stats::vec(st.a_pop));
  append_row(d.a_grp, row, concat_units(st.a_grp, vec_fn));
  append_row(d.a_sub, row, concat_units(st.a_sub, vec_fn));
  append_row(d.theta_pop, row, stats::low(st.theta_pop));
  append_row(d.theta_grp, row, concat_units(st.theta_grp, low_fn));
  append_row(d.theta_sub, row, concat_units(st.theta_sub, low_fn));
  append_row(d.sigma2, row,
             Eigen::Map<const Vector>(st.sigma2.data(),
                                      static_cast<Index>(st.sigma2.size())));

  const auto cov = covariances_of(st);
  auto diag_fn = [](const Matrix& x) -> Vector { return x.diagonal(); };
  std::vector<Matrix> all;
  for (const auto* group : {&cov.v, &cov.gamma}) {
    all.insert(all.end(), group->begin(), group->end());
  }
  all.push_back(cov.a);
  for (const auto* group : {&cov.u, &cov.psi}) {
    all.insert(all.end(), group->begin(), group->end());
  }
  all.push_back(cov.theta);
  append_row(d.cov_diag, row, concat_units(all, diag_fn));

  auto& sums = out.sums;
  if (sums.count == 0) {
    sums.state = st;
  } else {
    model::add_to(sums.state, st);
  }
  add_all(sums.cov_v, cov.v);
  add_all(sums.cov_gamma, cov.gamma);
  add_all(sums.cov_u, cov.u);
  add_all(sums.cov_psi, cov.psi);
  add_one(sums.cov_a, cov.a);
  add_one(sums.cov_theta, cov.theta);
  if (opt.record_fitted) {
    if (sums.fitted.empty()) sums.fitted.resize(st.M.size());
    for (std::size_t s = 0; s < st.M.size(); ++s) {
      add_one(sums.fitted[s], st.theta_seg[s] * st.M[s]);
    }
  }
  ++sums.count;

  const double complete =
      diag::complete_loglik(data, st, hyper.initial_state_precision, opt.threads);
  if (!std::isfinite(complete)) {
    throw NumericalError("non-finite complete log-likelihood at iteration " +
                         std::to_string(iteration));
  }
  out.trace.complete.push_back(complete);
  out.trace.conditional.push_back(diag::conditional_loglik(data, st, opt.threads));
  if (opt.record_plugin) {
    out.trace.plugin.push_back(
        diag::plugin_loglik(data, st, spec, hyper, opt.threads));
  }
}

void finish(ChainOutput& out, const model::HierDataset& data) {
  auto& d = out.draws;
  const int rows = d.rows();
  for (Matrix* m : {&d.a_pop, &d.a_grp, &d.a_sub, &d.theta_pop, &d.theta_grp,
                    &d.theta_sub, &d.cov_diag, &d.sigma2}) {
    grow(*m, rows);
  }
  const auto& sums = out.sums;
  if (sums.count == 0 || sums.fitted.empty()) return;
  const double inv = 1.0 / sums.count;
  double total = 0.0;
  for (int s = 0; s < data.layout.total_segments(); ++s) {
    total += diag::sensor_loglik(data.Y[s], sums.fitted[s] * inv,
                                 sums.state.sigma2[s] * inv);
  }
  out.conditional_at_mean = total;
  out.has_conditional_at_mean = true;
}

}  // namespace

model::ChainState ChainOutput::posterior_mean() const {
  if (sums.count == 0) throw ValidationError("posterior_mean: no kept draws");
  return model::scaled(sums.state, 1.0 / sums.count);
}

std::vector<Matrix> ChainOutput::covariance_means() const {
  if (sums.count == 0) throw ValidationError("covariance_means: no kept draws");
  const double inv = 1.0 / sums.count;
  std::vector<Matrix> out;
  for (const auto* group : {&sums.cov_v, &sums.cov_gamma}) {
    for (const auto& m : *group) out.push_back(m * inv);
  }
  out.push_back(sums.cov_a * inv);
  for (const auto* group : {&sums.cov_u, &sums.cov_psi}) {
    for (const auto& m : *group) out.push_back(m * inv);
  }
  out.push_back(sums.cov_theta * inv);
  return out;
}

ChainOutput run_chain(const model::HierDataset& data,
                      const model::ModelSpec& spec,
                      const model::Hyperparams& hyper,
                      const model::MCMCSchedule& schedule,
                      const RunOptions& opt, const ChainOutput* resume) {
  model::throw_if_invalid(model::validate(data, spec), "invalid dataset");
  model::throw_if_invalid(model::validate(hyper, data.P, spec),
                          "invalid hyperparameters");
  model::throw_if_invalid(model::validate(schedule), "invalid schedule");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };
  auto report = [&](int it, int total, std::string_view phase) {
    if (opt.on_progress) opt.on_progress({it, total, phase, elapsed()});
  };

  ChainOutput out;
  if (resume != nullptr) {
    out = *resume;
  } else {
    out.stage1 = ident::run_initialization(
        data, spec, hyper, schedule.n_init_iter, opt.seed, opt.threads,
        [&](int it) { report(it, schedule.n_init_iter, "initialization"); });
    out.state = ident::initial_state(data, spec, hyper, out.stage1.theta0_mean);
  }

  const GibbsSampler sampler(data, spec, hyper, opt.plan, opt.seed, opt.threads);
  if (resume == nullptr) sampler.prime(out.state);

  for (int it = out.iterations_done + 1; it <= schedule.n_iter; ++it) {
    sampler.sweep(out.state, it);
    if (schedule.checks_signs(it)) {
      ident::apply_sign_tracking(out.state, data.layout, schedule.rho0, it,
                                 out.audit);
    }
    if (schedule.keeps(it)) {
      record(out, data, spec, hyper, opt, schedule, it);
      if (opt.on_kept) opt.on_kept(it, out.state);
    }
    out.iterations_done = it;
    if (opt.checkpoint_every > 0 && opt.on_checkpoint &&
        it % opt.checkpoint_every == 0 && it < schedule.n_iter) {
      opt.on_checkpoint(out);
    }
    report(it, schedule.n_iter, it <= schedule.n_burnin ? "burn-in" : "sampling");
  }
  finish(out, data);
  return out;
}

}  // namespace ressm::gibbs
