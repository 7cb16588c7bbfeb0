#include "ressm/gibbs/sampler.hpp"

#include "ressm/core/error.hpp"
#include "ressm/core/parallel.hpp"

#include <Eigen/QR>

#include <atomic>
#include <string>

namespace ressm::gibbs {

using model::ChainState;
using stats::StreamTag;

namespace {

// Variance-component stream units: component * kUnitStride + group.
constexpr std::uint32_t kUnitStride = 1u << 16;
enum VarianceUnit : std::uint32_t { kV = 0, kGamma, kA, kU, kPsi, kTheta };

bool full_column_rank(const Matrix& theta) {
  Eigen::ColPivHouseholderQR<Matrix> qr(theta);
  qr.setThreshold(1e-10);
  return qr.rank() == theta.cols();
}

// Residual scatter sum (x_c - x_p)(x_c - x_p)^T over the listed pairs.
template <typename ChildFn, typename ParentFn>
Matrix scatter(int count, Index dim, ChildFn child, ParentFn parent) {
  Matrix d(dim, count);
  for (int t = 0; t < count; ++t) d.col(t) = child(t) - parent(t);
  Matrix s = Matrix::Zero(dim, dim);
  s.selfadjointView<Eigen::Lower>().rankUpdate(d);
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

Matrix draw_wishart(const WishartPosterior& w, stats::RngStream& rng) {
  return stats::sample_wishart_inverse_scale(w.dof, w.inverse_scale, rng);
}

std::string segment_context(const model::HierLayout& layout, int s,
                            int iteration) {
  const auto& ref = layout.segment(s);
  return "iteration " + std::to_string(iteration) + ", segment (" +
         std::to_string(ref.r) + "," + std::to_string(ref.i) + "," +
         std::to_string(ref.j) + ")";
}

}  // namespace

LoadingStats pooled_loading_stats(const model::HierDataset& data,
                                  const ChainState& state, int first,
                                  int count, int threads) {
  std::vector<LoadingStats> parts(static_cast<std::size_t>(count));
  parallel_for(parts.size(), threads, [&](std::size_t t) {
    const int s = first + static_cast<int>(t);
    parts[t] = loading_stats(data.Y[s], state.M[s], state.sigma2[s]);
  });
  LoadingStats total = parts.front();
  for (std::size_t t = 1; t < parts.size(); ++t) total += parts[t];
  return total;
}

DynamicsStats pooled_dynamics_stats(const ChainState& state, Index m,
                                    int first, int count, int threads) {
  std::vector<DynamicsStats> parts(static_cast<std::size_t>(count));
  parallel_for(parts.size(), threads, [&](std::size_t t) {
    parts[t] = dynamics_stats(state.M[first + static_cast<int>(t)], m);
  });
  DynamicsStats total = parts.front();
  for (std::size_t t = 1; t < parts.size(); ++t) total += parts[t];
  return total;
}

GibbsSampler::GibbsSampler(const model::HierDataset& data,
                           model::ModelSpec spec, model::Hyperparams hyper,
                           SweepPlan plan, std::uint64_t seed, int threads)
    : data_(&data),
      spec_(spec),
      hyper_(hyper),
      plan_(plan),
      seed_(seed),
      threads_(std::max(1, threads)) {
  if (data.layout.groups() >= static_cast<int>(kUnitStride)) {
    throw ValidationError("too many groups");
  }
}

stats::RngStream GibbsSampler::stream(StreamTag tag, std::uint32_t unit,
                                      int iteration) const {
  return stats::RngStream(seed_, stats::stage_tag(tag, plan_.shared_loading),
                          unit, static_cast<std::uint32_t>(iteration));
}

void GibbsSampler::prime(ChainState& st) const {
  const auto& layout = data_->layout;
  std::atomic<bool> deficient{false};
  parallel_for(static_cast<std::size_t>(layout.total_segments()), threads_,
               [&](std::size_t unit) {
    const int s = static_cast<int>(unit);
    const Matrix& theta = st.theta_seg[s];
    const bool ok = full_column_rank(theta);
    if (!ok) deficient = true;
    if (!st.M[s].isZero(0.0)) return;
    if (ok) {
      Matrix gram = theta.transpose() * theta;
      gram.diagonal().array() += st.sigma2[s];
      st.M[s] = stats::factorize_spd(gram, "ridge projection")
                    .solve(theta.transpose() * data_->Y[s]);
    } else {
      auto rng = stream(StreamTag::kInit, static_cast<std::uint32_t>(s), 0);
      for (Index k = 0; k < st.M[s].cols(); ++k) {
        for (Index q = 0; q < st.M[s].rows(); ++q) st.M[s](q, k) = rng.normal();
      }
    }
  });
  if (deficient) update_segment_loadings_only(st, 0);
}

void GibbsSampler::update_segment_loadings_only(ChainState& st,
                                                int iteration) const {
  const auto& layout = data_->layout;
  if (plan_.shared_loading) {
    update_shared_loading(st, iteration);
  } else if (spec_.loadings_random()) {
    parallel_for(static_cast<std::size_t>(layout.total_segments()), threads_,
                 [&](std::size_t unit) {
      const int s = static_cast<int>(unit);
      const auto& ref = layout.segment(s);
      auto rng = stream(StreamTag::kSegment, static_cast<std::uint32_t>(s),
                        iteration);
      const auto g = loading_conditional(
          loading_stats(data_->Y[s], st.M[s], st.sigma2[s]),
          st.prec_u[ref.r], stats::low(st.theta_sub[ref.subject]));
      st.theta_seg[s] = stats::unlow(
          stats::sample_canonical_gaussian(g, rng, "segment loading"),
          data_->P, spec_.Q);
    });
  } else {
    for (int r = 0; r < layout.groups(); ++r) update_pooled_loading(st, r, iteration);
    model::enforce_mode(st, layout, spec_);
  }
}

void GibbsSampler::sweep(ChainState& st, int iteration) const {
  update_segments(st, iteration);
  update_subjects(st, iteration);
  update_groups(st, iteration);
  update_population(st, iteration);
  update_variance_components(st, iteration);
}

void GibbsSampler::update_segments(ChainState& st, int iteration) const {
  parallel_for(static_cast<std::size_t>(data_->layout.total_segments()),
               threads_, [&](std::size_t unit) {
    update_segment(st, static_cast<int>(unit), iteration);
  });
}

void GibbsSampler::update_segment(ChainState& st, int s, int iteration) const {
  const auto& layout = data_->layout;
  const auto& ref = layout.segment(s);
  const Matrix& y = data_->Y[s];
  auto rng = stream(StreamTag::kSegment, static_cast<std::uint32_t>(s), iteration);
  try {
    update_latent_states(y, st.M[s], st.theta_seg[s], st.a_seg[s],
                         st.sigma2[s], hyper_.initial_state_precision, rng);
    for (const auto step : plan_.segment_order) {
      switch (step) {
        case SegmentUpdate::kDynamics: {
          if (!spec_.dynamics_random()) break;
          const auto g = dynamics_conditional(dynamics_stats(st.M[s], spec_.m),
                                              st.prec_v[ref.r],
                                              stats::vec(st.a_sub[ref.subject]));
          st.a_seg[s] = stats::unvec(
              stats::sample_canonical_gaussian(g, rng, "segment dynamics"),
              spec_.Q, spec_.m * spec_.Q);
          break;
        }
        case SegmentUpdate::kLoading: {
          if (!spec_.loadings_random() || plan_.shared_loading) break;
          const auto g = loading_conditional(
              loading_stats(y, st.M[s], st.sigma2[s]), st.prec_u[ref.r],
              stats::low(st.theta_sub[ref.subject]));
          st.theta_seg[s] = stats::unlow(
              stats::sample_canonical_gaussian(g, rng, "segment loading"),
              data_->P, spec_.Q);
          break;
        }
        case SegmentUpdate::kNoise: {
          const auto ig = noise_conditional(y, st.M[s], st.theta_seg[s],
                                            hyper_.a0, hyper_.b0);
          st.sigma2[s] = stats::sample_inverse_gamma(ig.shape, ig.rate, rng);
          break;
        }
      }
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at " +
                         segment_context(layout, s, iteration));
  }
}

void GibbsSampler::update_subjects(ChainState& st, int iteration) const {
  const auto& layout = data_->layout;
  const bool loadings = spec_.loadings_random() && !plan_.shared_loading;
  if (!spec_.dynamics_random() && !loadings) return;
  parallel_for(static_cast<std::size_t>(layout.total_subjects()), threads_,
               [&](std::size_t unit) {
    const int u = static_cast<int>(unit);
    const auto& sub = layout.subject(u);
    auto rng = stream(StreamTag::kSubject, static_cast<std::uint32_t>(u), iteration);
    const int first = sub.first_segment;
    const int count = sub.segment_count;
    if (spec_.dynamics_random()) {
      Vector sum = Vector::Zero(spec_.la());
      for (int s = first; s < first + count; ++s) sum += stats::vec(st.a_seg[s]);
      const auto g = parent_conditional(st.prec_gamma[sub.r],
                                        stats::vec(st.a_grp[sub.r]),
                                        st.prec_v[sub.r], sum, count);
      st.a_sub[u] = stats::unvec(
          stats::sample_canonical_gaussian(g, rng, "subject dynamics"),
          spec_.Q, spec_.m * spec_.Q);
    }
    if (loadings) {
      Vector sum = Vector::Zero(spec_.ltheta(data_->P));
      for (int s = first; s < first + count; ++s) sum += stats::low(st.theta_seg[s]);
      const auto g = parent_conditional(st.prec_psi[sub.r],
                                        stats::low(st.theta_grp[sub.r]),
                                        st.prec_u[sub.r], sum, count);
      st.theta_sub[u] = stats::unlow(
          stats::sample_canonical_gaussian(g, rng, "subject loading"),
          data_->P, spec_.Q);
    }
  });
}

void GibbsSampler::update_pooled_loading(ChainState& st, int r,
                                         int iteration) const {
  const auto& layout = data_->layout;
  const int first = layout.subject(layout.group_first_subject(r)).first_segment;
  const auto pooled = pooled_loading_stats(*data_, st, first,
                                           layout.group_segment_count(r), threads_);
  auto rng = stream(StreamTag::kGroup, static_cast<std::uint32_t>(2 * r + 1),
                    iteration);
  const auto g = loading_conditional(pooled, st.prec_theta,
                                     stats::low(st.theta_pop));
  st.theta_grp[r] = stats::unlow(
      stats::sample_canonical_gaussian(g, rng, "group loading"), data_->P,
      spec_.Q);
}

void GibbsSampler::update_pooled_dynamics(ChainState& st, int r,
                                          int iteration) const {
  const auto& layout = data_->layout;
  const int first = layout.subject(layout.group_first_subject(r)).first_segment;
  const auto pooled = pooled_dynamics_stats(st, spec_.m, first,
                                            layout.group_segment_count(r), threads_);
  auto rng = stream(StreamTag::kGroup, static_cast<std::uint32_t>(2 * r), iteration);
  const auto g = dynamics_conditional(pooled, st.prec_a, stats::vec(st.a_pop));
  st.a_grp[r] = stats::unvec(
      stats::sample_canonical_gaussian(g, rng, "group dynamics"), spec_.Q,
      spec_.m * spec_.Q);
}

void GibbsSampler::update_groups(ChainState& st, int iteration) const {
  const auto& layout = data_->layout;
  for (int r = 0; r < layout.groups(); ++r) {
    const int first = layout.group_first_subject(r);
    const int n_r = layout.subjects(r);
    if (spec_.dynamics_random()) {
      auto rng = stream(StreamTag::kGroup, static_cast<std::uint32_t>(2 * r),
                        iteration);
      Vector sum = Vector::Zero(spec_.la());
      for (int u = first; u < first + n_r; ++u) sum += stats::vec(st.a_sub[u]);
      const auto g = parent_conditional(st.prec_a, stats::vec(st.a_pop),
                                        st.prec_gamma[r], sum, n_r);
      st.a_grp[r] = stats::unvec(
          stats::sample_canonical_gaussian(g, rng, "group dynamics"), spec_.Q,
          spec_.m * spec_.Q);
    } else {
      update_pooled_dynamics(st, r, iteration);
    }
    if (plan_.shared_loading) continue;
    if (spec_.loadings_random()) {
      auto rng = stream(StreamTag::kGroup, static_cast<std::uint32_t>(2 * r + 1),
                        iteration);
      Vector sum = Vector::Zero(spec_.ltheta(data_->P));
      for (int u = first; u < first + n_r; ++u) sum += stats::low(st.theta_sub[u]);
      const auto g = parent_conditional(st.prec_theta, stats::low(st.theta_pop),
                                        st.prec_psi[r], sum, n_r);
      st.theta_grp[r] = stats::unlow(
          stats::sample_canonical_gaussian(g, rng, "group loading"), data_->P,
          spec_.Q);
    } else {
      update_pooled_loading(st, r, iteration);
    }
  }
  if (spec_.mode != model::FitMode::kFull) model::enforce_mode(st, layout, spec_);
}

void GibbsSampler::update_shared_loading(ChainState& st, int iteration) const {
  const auto& layout = data_->layout;
  const Index lt = spec_.ltheta(data_->P);
  const auto pooled =
      pooled_loading_stats(*data_, st, 0, layout.total_segments(), threads_);
  auto rng = stream(StreamTag::kPopulation, 1, iteration);
  const Matrix prior = hyper_.population_precision * Matrix::Identity(lt, lt);
  const auto g = loading_conditional(pooled, prior, Vector::Zero(lt));
  const Matrix theta0 = stats::unlow(
      stats::sample_canonical_gaussian(g, rng, "shared loading"), data_->P,
      spec_.Q);
  st.theta_pop = theta0;
  for (auto& t : st.theta_grp) t = theta0;
  for (auto& t : st.theta_sub) t = theta0;
  for (auto& t : st.theta_seg) t = theta0;
}

void GibbsSampler::update_population(ChainState& st, int iteration) const {
  const int groups = data_->layout.groups();
  {
    auto rng = stream(StreamTag::kPopulation, 0, iteration);
    Vector sum = Vector::Zero(spec_.la());
    for (const auto& a : st.a_grp) sum += stats::vec(a);
    const auto g = population_conditional(st.prec_a, sum, groups,
                                          hyper_.population_precision);
    st.a_pop = stats::unvec(
        stats::sample_canonical_gaussian(g, rng, "population dynamics"),
        spec_.Q, spec_.m * spec_.Q);
  }
  if (plan_.shared_loading) {
    update_shared_loading(st, iteration);
    return;
  }
  auto rng = stream(StreamTag::kPopulation, 1, iteration);
  Vector sum = Vector::Zero(spec_.ltheta(data_->P));
  for (const auto& t : st.theta_grp) sum += stats::low(t);
  const auto g = population_conditional(st.prec_theta, sum, groups,
                                        hyper_.population_precision);
  st.theta_pop = stats::unlow(
      stats::sample_canonical_gaussian(g, rng, "population loading"), data_->P,
      spec_.Q);
}

void GibbsSampler::update_variance_components(ChainState& st,
                                              int iteration) const {
  const auto& layout = data_->layout;
  const auto& h = hyper_;
  const Index la = spec_.la();
  const Index lt = spec_.ltheta(data_->P);
  const bool loadings = spec_.loadings_random() && !plan_.shared_loading;
  auto rng_for = [&](std::uint32_t component, int r) {
    return stream(StreamTag::kVariance,
                  component * kUnitStride + static_cast<std::uint32_t>(r),
                  iteration);
  };

  for (int r = 0; r < layout.groups(); ++r) {
    const int first_sub = layout.group_first_subject(r);
    const int n_r = layout.subjects(r);
    const int first_seg = layout.subject(first_sub).first_segment;
    const int n_seg = layout.group_segment_count(r);
    auto seg_parent = [&](int t) { return layout.segment(first_seg + t).subject; };
    if (spec_.dynamics_random()) {
      auto rng = rng_for(kV, r);
      const Matrix s = scatter(
          n_seg, la, [&](int t) { return stats::vec(st.a_seg[first_seg + t]); },
          [&](int t) { return stats::vec(st.a_sub[seg_parent(t)]); });
      st.prec_v[r] = draw_wishart(wishart_conditional(h.nu_v, h.kappa_v, s, n_seg), rng);
      auto rng2 = rng_for(kGamma, r);
      const Matrix s2 = scatter(
          n_r, la, [&](int t) { return stats::vec(st.a_sub[first_sub + t]); },
          [&](int) { return stats::vec(st.a_grp[r]); });
      st.prec_gamma[r] =
          draw_wishart(wishart_conditional(h.nu_gamma, h.kappa_gamma, s2, n_r), rng2);
    }
    if (loadings) {
      auto rng = rng_for(kU, r);
      const Matrix s = scatter(
          n_seg, lt, [&](int t) { return stats::low(st.theta_seg[first_seg + t]); },
          [&](int t) { return stats::low(st.theta_sub[seg_parent(t)]); });
      st.prec_u[r] = draw_wishart(wishart_conditional(h.nu_u, h.kappa_u, s, n_seg), rng);
      auto rng2 = rng_for(kPsi, r);
      const Matrix s2 = scatter(
          n_r, lt, [&](int t) { return stats::low(st.theta_sub[first_sub + t]); },
          [&](int) { return stats::low(st.theta_grp[r]); });
      st.prec_psi[r] =
          draw_wishart(wishart_conditional(h.nu_psi, h.kappa_psi, s2, n_r), rng2);
    }
  }
  const int groups = layout.groups();
  {
    auto rng = rng_for(kA, 0);
    const Matrix s = scatter(
        groups, la, [&](int r) { return stats::vec(st.a_grp[r]); },
        [&](int) { return stats::vec(st.a_pop); });
    st.prec_a = draw_wishart(wishart_conditional(h.nu_a, h.kappa_a, s, groups), rng);
  }
  if (!plan_.shared_loading) {
    auto rng = rng_for(kTheta, 0);
    const Matrix s = scatter(
        groups, lt, [&](int r) { return stats::low(st.theta_grp[r]); },
        [&](int) { return stats::low(st.theta_pop); });
    st.prec_theta =
        draw_wishart(wishart_conditional(h.nu_theta, h.kappa_theta, s, groups), rng);
  }
}

}  // namespace ressm::gibbs
