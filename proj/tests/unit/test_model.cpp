#include "doctest.h"

#include "ressm/core/error.hpp"
#include "ressm/gibbs/conditionals.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <limits>

using namespace ressm;
using model::HierLayout;

namespace {

bool mentions(const std::vector<std::string>& list, const std::string& text) {
  return std::any_of(list.begin(), list.end(), [&](const std::string& s) {
    return s.find(text) != std::string::npos;
  });
}

model::HierDataset dataset(Index P, Index K, const HierLayout& layout) {
  model::HierDataset ds;
  ds.layout = layout;
  ds.P = P;
  ds.K = K;
  ds.Y.assign(static_cast<std::size_t>(layout.total_segments()), Matrix::Zero(P, K));
  return ds;
}

}  // namespace

TEST_CASE("layout indexes units in lexicographic order") {
  const HierLayout layout({{2, 3}, {1}});
  CHECK(layout.groups() == 2);
  CHECK(layout.total_subjects() == 3);
  CHECK(layout.total_segments() == 6);
  CHECK(layout.segment_index(0, 1, 2) == 4);
  CHECK(layout.segment_index(1, 0, 0) == 5);
  CHECK(layout.subject_index(1, 0) == 2);
  CHECK(layout.group_segment_count(0) == 5);
  const auto& ref = layout.segment(3);
  CHECK(ref.r == 0);
  CHECK(ref.i == 1);
  CHECK(ref.j == 1);
  CHECK(ref.subject == 1);
  CHECK(HierLayout::balanced(2, 3, 4).total_segments() == 24);
  CHECK_THROWS_AS(HierLayout({{2, 0}}), ValidationError);
  CHECK_THROWS_AS(HierLayout(std::vector<std::vector<int>>{}), ValidationError);
}

TEST_CASE("dataset validation") {
  model::ModelSpec spec;
  spec.Q = 2;
  spec.m = 2;
  auto ds = dataset(8, 250, HierLayout::balanced(2, 2, 2));
  CHECK(model::validate(ds, spec).empty());

  model::ModelSpec square = spec;
  square.Q = 8;
  CHECK(mentions(model::validate(ds, square), "latent dimension must be < channels"));

  ds.Y[ds.layout.segment_index(1, 0, 1)](3, 17) = std::numeric_limits<double>::quiet_NaN();
  CHECK(mentions(model::validate(ds, spec), "(1,0,1,17,3)"));

  auto short_ds = dataset(8, 250, HierLayout::balanced(1, 1, 2));
  short_ds.Y[1] = Matrix::Zero(8, 100);
  CHECK(mentions(model::validate(short_ds, spec), "segment (0,0,1)"));
  CHECK_THROWS_AS(model::throw_if_invalid(model::validate(short_ds, spec), "dataset"),
                  ValidationError);
}

TEST_CASE("default hyperparameters") {
  const auto h = model::default_hyperparams(54, 5, 1);
  model::ModelSpec spec;
  spec.Q = 5;
  spec.m = 1;
  CHECK(spec.la() == 25);
  CHECK(spec.ltheta(54) == 260);
  CHECK(h.nu_a == 28);
  CHECK(h.nu_theta == 263);
  CHECK(h.nu_v == 25);
  CHECK(h.nu_u == 260);
  CHECK(h.kappa_a == 100);
  CHECK(h.kappa_theta == 100);
  CHECK(h.kappa_u == 1e-3);
  CHECK(h.kappa_v == 1e-3);
  CHECK(h.kappa_psi == 1e-3);
  CHECK(h.kappa_gamma == 1e-3);
  CHECK(model::validate(h, 54, spec).empty());

  model::ModelSpec s2;
  s2.Q = 2;
  s2.m = 2;
  CHECK(s2.la() == 8);
  CHECK(s2.ltheta(20) == 39);

  auto bad = h;
  bad.nu_a = 10;
  bad.kappa_v = 0.0;
  const auto v = model::validate(bad, 54, spec);
  CHECK(mentions(v, "nu_a"));
  CHECK(mentions(v, "kappa_v"));
}

TEST_CASE("schedules") {
  const auto s = model::default_schedule();
  CHECK(s.n_iter == 7500);
  CHECK(s.n_burnin == 2500);
  CHECK(s.thin == 10);
  CHECK(s.kept_count() == 500);
  CHECK(model::validate(s).empty());
  CHECK_FALSE(s.keeps(2500));
  CHECK(s.keeps(2510));
  CHECK_FALSE(s.keeps(2511));
  int kept = 0;
  for (int it = 1; it <= s.n_iter; ++it) kept += s.keeps(it) ? 1 : 0;
  CHECK(kept == s.kept_count());
  CHECK(s.checks_signs(1250));
  CHECK_FALSE(s.checks_signs(1255));
  CHECK_FALSE(s.checks_signs(2510));

  const auto small = model::default_schedule(0.2);
  CHECK(small.n_iter == 1500);
  CHECK(small.n_burnin == 500);
  CHECK(small.thin == 2);
  CHECK(model::validate(small).empty());

  auto bad = s;
  bad.sign_check_end = 3000;
  bad.rho0 = 0.5;
  CHECK(mentions(model::validate(bad), "sign window"));
  CHECK(mentions(model::validate(bad), "rho0"));

  model::MCMCSchedule one;
  one.n_iter = 1;
  one.n_burnin = 0;
  one.thin = 1;
  one.n_init_iter = 0;
  one.sign_check_start = 0;
  one.sign_check_end = 0;
  CHECK(model::validate(one).empty());
  CHECK(one.kept_count() == 1);
}

TEST_CASE("fit modes") {
  for (auto mode : {model::FitMode::kFull, model::FitMode::kFixedLoading,
                    model::FitMode::kFixedAll}) {
    CHECK(model::fit_mode_from_string(model::to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(model::fit_mode_from_string("partial"), ValidationError);
}

TEST_CASE("chain state helpers") {
  const HierLayout layout({{2, 1}, {1}});
  model::ModelSpec spec;
  spec.Q = 2;
  spec.m = 2;
  auto st = model::make_state(layout, 4, 10, spec);
  CHECK(st.M.size() == 4);
  CHECK(st.a_sub.size() == 3);
  CHECK(st.a_grp.size() == 2);
  CHECK(st.a_pop.rows() == 2);
  CHECK(st.a_pop.cols() == 4);
  CHECK(st.prec_u[0].rows() == spec.ltheta(4));
  CHECK(st.prec_v[1].rows() == 8);

  auto other = st;
  CHECK(model::identical(st, other));
  other.theta_seg[2](3, 1) = 1e-300;
  CHECK_FALSE(model::identical(st, other));

  auto acc = model::scaled(st, 0.0);
  model::add_to(acc, st);
  model::add_to(acc, st);
  const auto half = model::scaled(acc, 0.5);
  CHECK(model::identical(half, st));

  ressm::stats::RngStream rng(1, ressm::stats::StreamTag::kTest, 0, 0);
  for (int r = 0; r < 2; ++r) {
    st.theta_grp[r] = oracle::random_lower(4, 2, rng);
    st.a_grp[r] = oracle::random_matrix(2, 4, rng);
  }
  auto fixed = st;
  model::ModelSpec fl = spec;
  fl.mode = model::FitMode::kFixedLoading;
  model::enforce_mode(fixed, layout, fl);
  CHECK(fixed.theta_seg[2] == st.theta_grp[0]);
  CHECK(fixed.theta_sub[2] == st.theta_grp[1]);
  CHECK(fixed.a_seg[2] == st.a_seg[2]);
  model::ModelSpec fa = spec;
  fa.mode = model::FitMode::kFixedAll;
  model::enforce_mode(fixed, layout, fa);
  CHECK(fixed.a_seg[3] == st.a_grp[1]);
  CHECK(fixed.a_sub[0] == st.a_grp[0]);
}

TEST_CASE("conjugate Wishart posterior mean with nu = dimension") {
  ressm::stats::RngStream rng(2, ressm::stats::StreamTag::kTest, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 3;
    const int n = 5 + trial;
    const double kappa = 0.01 * (1 + trial);
    Matrix scatter = Matrix::Zero(p, p);
    for (int i = 0; i < n; ++i) {
      const Vector r = oracle::random_matrix(p, 1, rng);
      scatter += r * r.transpose();
    }
    const auto post = gibbs::wishart_conditional(static_cast<double>(p), kappa, scatter, n);
    const Matrix cov_mean = post.inverse_scale / (post.dof - static_cast<double>(p) - 1.0);
    const Matrix expected =
        scatter / (n - 1.0) + kappa / (n - 1.0) * Matrix::Identity(p, p);
    CHECK((cov_mean - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::LLT<Matrix>(cov_mean).info() == Eigen::Success);
  }
}
