#include "ressm/diag/loglik.hpp"

#include "ressm/core/error.hpp"
#include "ressm/core/parallel.hpp"
#include "ressm/gibbs/conditionals.hpp"
#include "ressm/gibbs/sampler.hpp"

#include <cmath>
#include <numbers>

namespace ressm::diag {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

template <typename Fn>
double sum_segments(const model::HierDataset& data, int threads, Fn fn) {
  std::vector<double> parts(static_cast<std::size_t>(data.layout.total_segments()));
  parallel_for(parts.size(), threads,
               [&](std::size_t s) { parts[s] = fn(static_cast<int>(s)); });
  double total = 0.0;
  for (const double v : parts) total += v;
  return total;
}

}  // namespace

double sensor_loglik(const Matrix& y, const Matrix& fitted, double sigma2) {
  if (!(sigma2 > 0.0)) throw ValidationError("sensor_loglik: sigma^2 <= 0");
  const double n = static_cast<double>(y.size());
  return -0.5 * n * (kLog2Pi + std::log(sigma2)) -
         0.5 * (y - fitted).squaredNorm() / sigma2;
}

double state_loglik(const Matrix& M, const Matrix& a, double init_precision) {
  const Index q = a.rows();
  const Index m = a.cols() / q;
  const Index K = M.cols();
  Matrix resid = M.rightCols(K - m);
  for (Index h = 1; h <= m; ++h) {
    resid.noalias() -= a.middleCols((h - 1) * q, q) * M.middleCols(m - h, K - m);
  }
  double out = -0.5 * static_cast<double>(resid.size()) * kLog2Pi -
               0.5 * resid.squaredNorm();
  if (init_precision > 0.0) {
    const auto head = M.leftCols(m);
    out += 0.5 * static_cast<double>(head.size()) *
               (std::log(init_precision) - kLog2Pi) -
           0.5 * init_precision * head.squaredNorm();
  }
  return out;
}

double segment_complete_loglik(const Matrix& y, const Matrix& M,
                               const Matrix& theta, const Matrix& a,
                               double sigma2, double init_precision) {
  return sensor_loglik(y, theta * M, sigma2) + state_loglik(M, a, init_precision);
}

double complete_loglik(const model::HierDataset& data,
                       const model::ChainState& st, double init_precision,
                       int threads) {
  return sum_segments(data, threads, [&](int s) {
    return segment_complete_loglik(data.Y[s], st.M[s], st.theta_seg[s],
                                   st.a_seg[s], st.sigma2[s], init_precision);
  });
}

double conditional_loglik(const model::HierDataset& data,
                          const model::ChainState& st, int threads) {
  return sum_segments(data, threads, [&](int s) {
    return sensor_loglik(data.Y[s], st.theta_seg[s] * st.M[s], st.sigma2[s]);
  });
}

PluginParameters plugin_parameters(const model::HierDataset& data,
                                   const model::ChainState& st,
                                   const model::ModelSpec& spec,
                                   const model::Hyperparams& hyper,
                                   int threads) {
  const auto& layout = data.layout;
  const auto n = static_cast<std::size_t>(layout.total_segments());
  PluginParameters out;
  out.theta.resize(n);
  out.a.resize(n);
  out.sigma2.resize(n);

  std::vector<Matrix> group_theta(static_cast<std::size_t>(layout.groups()));
  std::vector<Matrix> group_a(static_cast<std::size_t>(layout.groups()));
  for (int r = 0; r < layout.groups(); ++r) {
    const int first = layout.subject(layout.group_first_subject(r)).first_segment;
    const int count = layout.group_segment_count(r);
    if (!spec.loadings_random()) {
      const auto pooled = gibbs::pooled_loading_stats(data, st, first, count, threads);
      group_theta[r] = stats::unlow(
          gibbs::loading_conditional(pooled, st.prec_theta, stats::low(st.theta_pop))
              .mean(),
          data.P, spec.Q);
    }
    if (!spec.dynamics_random()) {
      const auto pooled = gibbs::pooled_dynamics_stats(st, spec.m, first, count, threads);
      group_a[r] = stats::unvec(
          gibbs::dynamics_conditional(pooled, st.prec_a, stats::vec(st.a_pop)).mean(),
          spec.Q, spec.m * spec.Q);
    }
  }

  parallel_for(n, threads, [&](std::size_t unit) {
    const int s = static_cast<int>(unit);
    const auto& ref = layout.segment(s);
    if (spec.loadings_random()) {
      out.theta[s] = stats::unlow(
          gibbs::loading_conditional(
              gibbs::loading_stats(data.Y[s], st.M[s], st.sigma2[s]),
              st.prec_u[ref.r], stats::low(st.theta_sub[ref.subject]))
              .mean(),
          data.P, spec.Q);
    } else {
      out.theta[s] = group_theta[ref.r];
    }
    if (spec.dynamics_random()) {
      out.a[s] = stats::unvec(
          gibbs::dynamics_conditional(gibbs::dynamics_stats(st.M[s], spec.m),
                                      st.prec_v[ref.r],
                                      stats::vec(st.a_sub[ref.subject]))
              .mean(),
          spec.Q, spec.m * spec.Q);
    } else {
      out.a[s] = group_a[ref.r];
    }
    out.sigma2[s] = gibbs::noise_conditional(data.Y[s], st.M[s], st.theta_seg[s],
                                             hyper.a0, hyper.b0)
                        .mean();
  });
  return out;
}

double plugin_loglik(const model::HierDataset& data,
                     const model::ChainState& st, const model::ModelSpec& spec,
                     const model::Hyperparams& hyper, int threads) {
  const auto plug = plugin_parameters(data, st, spec, hyper, threads);
  return sum_segments(data, threads, [&](int s) {
    return segment_complete_loglik(data.Y[s], st.M[s], plug.theta[s], plug.a[s],
                                   plug.sigma2[s], hyper.initial_state_precision);
  });
}

}  // namespace ressm::diag
