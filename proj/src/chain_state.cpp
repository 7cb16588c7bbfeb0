#include "ressm/model/chain_state.hpp"

#include <cstring>

namespace ressm::model {

ChainState make_state(const HierLayout& layout, Index P, Index K,
                      const ModelSpec& spec) {
  const Index q = spec.Q;
  const Index la = spec.la();
  const Index lt = spec.ltheta(P);
  const auto segs = static_cast<std::size_t>(layout.total_segments());
  const auto subs = static_cast<std::size_t>(layout.total_subjects());
  const auto grps = static_cast<std::size_t>(layout.groups());
  const Matrix a0 = Matrix::Zero(q, spec.m * q);
  const Matrix t0 = Matrix::Zero(P, q);

  ChainState s;
  s.M.assign(segs, Matrix::Zero(q, K));
  s.a_seg.assign(segs, a0);
  s.a_sub.assign(subs, a0);
  s.a_grp.assign(grps, a0);
  s.a_pop = a0;
  s.theta_seg.assign(segs, t0);
  s.theta_sub.assign(subs, t0);
  s.theta_grp.assign(grps, t0);
  s.theta_pop = t0;
  s.prec_v.assign(grps, Matrix::Identity(la, la));
  s.prec_gamma.assign(grps, Matrix::Identity(la, la));
  s.prec_a = Matrix::Identity(la, la);
  s.prec_u.assign(grps, Matrix::Identity(lt, lt));
  s.prec_psi.assign(grps, Matrix::Identity(lt, lt));
  s.prec_theta = Matrix::Identity(lt, lt);
  s.sigma2.assign(segs, 1.0);
  return s;
}

namespace {

template <typename StateA, typename Fn>
void zip_fields(StateA& a, const ChainState& b, Fn fn) {
  auto each = [&](auto& x, const std::vector<Matrix>& y) {
    for (std::size_t t = 0; t < x.size(); ++t) fn(x[t], y[t]);
  };
  each(a.M, b.M);
  each(a.a_seg, b.a_seg);
  each(a.a_sub, b.a_sub);
  each(a.a_grp, b.a_grp);
  fn(a.a_pop, b.a_pop);
  each(a.theta_seg, b.theta_seg);
  each(a.theta_sub, b.theta_sub);
  each(a.theta_grp, b.theta_grp);
  fn(a.theta_pop, b.theta_pop);
  each(a.prec_v, b.prec_v);
  each(a.prec_gamma, b.prec_gamma);
  fn(a.prec_a, b.prec_a);
  each(a.prec_u, b.prec_u);
  each(a.prec_psi, b.prec_psi);
  fn(a.prec_theta, b.prec_theta);
}

}  // namespace

bool identical(const ChainState& a, const ChainState& b) {
  if (a.M.size() != b.M.size() || a.a_sub.size() != b.a_sub.size() ||
      a.a_grp.size() != b.a_grp.size() || a.sigma2 != b.sigma2) {
    return false;
  }
  bool same = true;
  zip_fields(a, b, [&same](const Matrix& x, const Matrix& y) {
    same = same && x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  });
  return same;
}

void add_to(ChainState& acc, const ChainState& x) {
  zip_fields(acc, x, [](Matrix& a, const Matrix& b) { a += b; });
  for (std::size_t t = 0; t < acc.sigma2.size(); ++t) acc.sigma2[t] += x.sigma2[t];
}

ChainState scaled(const ChainState& x, double factor) {
  ChainState out = x;
  zip_fields(out, x, [factor](Matrix& a, const Matrix&) { a *= factor; });
  for (double& v : out.sigma2) v *= factor;
  return out;
}

void enforce_mode(ChainState& state, const HierLayout& layout,
                  const ModelSpec& spec) {
  for (int u = 0; u < layout.total_subjects(); ++u) {
    const auto& sub = layout.subject(u);
    for (int s = sub.first_segment; s < sub.first_segment + sub.segment_count;
         ++s) {
      if (!spec.loadings_random()) state.theta_seg[s] = state.theta_grp[sub.r];
      if (!spec.dynamics_random()) state.a_seg[s] = state.a_grp[sub.r];
    }
    if (!spec.loadings_random()) state.theta_sub[u] = state.theta_grp[sub.r];
    if (!spec.dynamics_random()) state.a_sub[u] = state.a_grp[sub.r];
  }
}

}  // namespace ressm::model
