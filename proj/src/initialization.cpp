#include "ressm/ident/initialization.hpp"

#include "ressm/diag/loglik.hpp"
#include "ressm/gibbs/sampler.hpp"

namespace ressm::ident {

model::ChainState initial_state(const model::HierDataset& data,
                                const model::ModelSpec& spec,
                                const model::Hyperparams& hyper,
                                const Matrix& theta) {
  auto st = model::make_state(data.layout, data.P, data.K, spec);
  const Index la = spec.la();
  const Index lt = spec.ltheta(data.P);
  auto prior_precision = [](double kappa, Index dim) -> Matrix {
    return Matrix::Identity(dim, dim) / kappa;
  };
  for (auto& p : st.prec_v) p = prior_precision(hyper.kappa_v, la);
  for (auto& p : st.prec_gamma) p = prior_precision(hyper.kappa_gamma, la);
  for (auto& p : st.prec_u) p = prior_precision(hyper.kappa_u, lt);
  for (auto& p : st.prec_psi) p = prior_precision(hyper.kappa_psi, lt);
  st.prec_a = prior_precision(hyper.kappa_a, la);
  st.prec_theta = prior_precision(hyper.kappa_theta, lt);

  st.theta_pop = theta;
  for (auto& t : st.theta_grp) t = theta;
  for (auto& t : st.theta_sub) t = theta;
  for (auto& t : st.theta_seg) t = theta;

  for (int s = 0; s < data.layout.total_segments(); ++s) {
    const Matrix& y = data.Y[s];
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() /
                       static_cast<double>(std::max<Index>(1, y.size() - 1));
    st.sigma2[s] = var > 0.0 ? var : 1.0;
  }
  return st;
}

InitializationResult run_initialization(
    const model::HierDataset& data, const model::ModelSpec& spec,
    const model::Hyperparams& hyper, int iterations, std::uint64_t seed,
    int threads, const std::function<void(int)>& on_iteration) {
  InitializationResult out;
  out.theta0_mean = Matrix::Zero(data.P, spec.Q);
  if (iterations <= 0) return out;

  gibbs::SweepPlan plan;
  plan.shared_loading = true;
  const gibbs::GibbsSampler sampler(data, spec, hyper, plan, seed, threads);
  auto st = initial_state(data, spec, hyper, out.theta0_mean);
  sampler.prime(st);

  const int keep_from = iterations / 2 + 1;
  int kept = 0;
  for (int it = 1; it <= iterations; ++it) {
    sampler.sweep(st, it);
    out.loglik.push_back(diag::complete_loglik(
        data, st, hyper.initial_state_precision, threads));
    if (it >= keep_from) {
      out.theta0_mean += st.theta_pop;
      ++kept;
    }
    if (on_iteration) on_iteration(it);
  }
  out.theta0_mean /= static_cast<double>(kept);
  out.iterations = iterations;
  return out;
}

}  // namespace ressm::ident
