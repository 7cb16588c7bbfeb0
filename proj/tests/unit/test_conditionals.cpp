#include "doctest.h"

#include "ressm/core/distributions.hpp"
#include "ressm/gibbs/conditionals.hpp"
#include "support/conditional_suite.hpp"

using namespace ressm;
using stats::RngStream;
using stats::StreamTag;

TEST_CASE("every full conditional matches its dense oracle") {
  const auto checks = oracle::run_conditional_suite(1, 3);
  CHECK(checks.size() > 100);
  for (const auto& c : checks) {
    INFO(c.name);
    CHECK(c.mean_error < 1e-8);
    CHECK(c.precision_error < 1e-8);
  }
}

TEST_CASE("latent conditional with zero dynamics is a ridge projection") {
  RngStream rng(2, StreamTag::kTest, 0, 0);
  const Matrix theta = oracle::random_lower(4, 2, rng);
  const Matrix M = oracle::random_matrix(2, 6, rng);
  const Matrix y = oracle::random_matrix(4, 6, rng);
  const double sigma2 = 0.5;
  const Matrix a = Matrix::Zero(2, 2);
  const Index k = 3;
  const auto g = gibbs::latent_conditional(y, M, theta, a, sigma2, k, 0.0);
  const Matrix prec = theta.transpose() * theta / sigma2 + Matrix::Identity(2, 2);
  CHECK((g.precision - prec).cwiseAbs().maxCoeff() < 1e-12);
  const Vector mean = prec.inverse() * theta.transpose() * y.col(k) / sigma2;
  CHECK((g.mean() - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("latent conditional with huge noise follows the dynamics") {
  RngStream rng(3, StreamTag::kTest, 0, 0);
  const Index Q = 2, K = 8, m = 1;
  const Matrix theta = oracle::random_lower(3, Q, rng);
  const Matrix a = 0.5 * oracle::random_matrix(Q, m * Q, rng);
  const Matrix M = oracle::random_matrix(Q, K, rng);
  const Matrix y = oracle::random_matrix(3, K, rng);
  const Index k = 4;
  const auto g = gibbs::latent_conditional(y, M, theta, a, 1e12, k, 0.0);
  // Smoother mean from the two MVAR residuals touching M_k.
  const Matrix prec = Matrix::Identity(Q, Q) + a.transpose() * a;
  const Vector mean = prec.inverse() * (a * M.col(k - 1) + a.transpose() * M.col(k + 1));
  CHECK((g.mean() - mean).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dynamics conditional limits") {
  RngStream rng(4, StreamTag::kTest, 0, 0);
  const Index Q = 2, m = 2, K = 40;
  const Matrix M = oracle::random_matrix(Q, K, rng);
  const auto st = gibbs::dynamics_stats(M, m);
  const Vector parent = oracle::random_matrix(m * Q * Q, 1, rng);

  const auto tight = gibbs::dynamics_conditional(
      st, 1e8 * Matrix::Identity(m * Q * Q, m * Q * Q), parent);
  CHECK((tight.mean() - parent).cwiseAbs().maxCoeff() < 1e-3);

  const auto flat = gibbs::dynamics_conditional(
      st, 1e-12 * Matrix::Identity(m * Q * Q, m * Q * Q), parent);
  Matrix z(m * Q, K - m), target(Q, K - m);
  for (Index s = m; s < K; ++s) {
    for (Index l = 1; l <= m; ++l) z.block((l - 1) * Q, s - m, Q, 1) = M.col(s - l);
    target.col(s - m) = M.col(s);
  }
  const Matrix ls = target * z.transpose() * (z * z.transpose()).inverse();
  CHECK((flat.mean() - stats::vec(ls)).cwiseAbs().maxCoeff() < 1e-8);

  Matrix m1 = oracle::random_matrix(1, 20, rng);
  const auto one = gibbs::dynamics_conditional(gibbs::dynamics_stats(m1, 1),
                                               Matrix::Constant(1, 1, 2.0),
                                               Vector::Constant(1, 0.3));
  double sxx = 0, sxy = 0;
  for (Index s = 1; s < 20; ++s) {
    sxx += m1(0, s - 1) * m1(0, s - 1);
    sxy += m1(0, s - 1) * m1(0, s);
  }
  CHECK(one.precision(0, 0) == doctest::Approx(sxx + 2.0).epsilon(1e-12));
  CHECK(one.mean()[0] == doctest::Approx((sxy + 0.6) / (sxx + 2.0)).epsilon(1e-12));
}

TEST_CASE("loading conditional limits") {
  RngStream rng(5, StreamTag::kTest, 0, 0);
  const Index P = 4, K = 30;
  const Matrix M = oracle::random_matrix(1, K, rng);
  const Matrix y = oracle::random_matrix(P, K, rng);
  const double sigma2 = 0.4, prior = 1.5, prior_mean = -0.2;
  const auto g = gibbs::loading_conditional(gibbs::loading_stats(y, M, sigma2),
                                            prior * Matrix::Identity(P, P),
                                            Vector::Constant(P, prior_mean));
  const double smm = M.squaredNorm();
  for (Index p = 0; p < P; ++p) {
    const double sym = y.row(p).dot(M.row(0));
    const double post_prec = smm / sigma2 + prior;
    CHECK(g.precision(p, p) == doctest::Approx(post_prec).epsilon(1e-12));
    CHECK(g.mean()[p] ==
          doctest::Approx((sym / sigma2 + prior * prior_mean) / post_prec).epsilon(1e-12));
  }
  const Vector parent = oracle::random_matrix(P, 1, rng);
  const auto tight = gibbs::loading_conditional(gibbs::loading_stats(y, M, sigma2),
                                                1e10 * Matrix::Identity(P, P), parent);
  CHECK((tight.mean() - parent).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("parent conditional examples") {
  RngStream rng(6, StreamTag::kTest, 0, 0);
  const Matrix G = oracle::random_spd(3, rng), C = oracle::random_spd(3, rng);
  const Vector g = oracle::random_matrix(3, 1, rng), c = oracle::random_matrix(3, 1, rng);
  const auto one = gibbs::parent_conditional(G, g, C, c, 1);
  CHECK((one.precision - (G + C)).cwiseAbs().maxCoeff() < 1e-14);

  const double gp = 2.0, cp = 3.0;
  const int n = 4;
  const auto equal = gibbs::parent_conditional(Matrix::Constant(1, 1, gp), Vector::Constant(1, 1.0),
                                               Matrix::Constant(1, 1, cp),
                                               Vector::Constant(1, n * 5.0), n);
  const double expect = (gp * 1.0 + n * cp * 5.0) / (gp + n * cp);
  CHECK(equal.mean()[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(equal.mean()[0] > 1.0);
  CHECK(equal.mean()[0] < 5.0);

  const auto pop = gibbs::population_conditional(C, c, 1, 0.0);
  CHECK((pop.mean() - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((pop.precision - C).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("variance component and noise examples") {
  const auto w = gibbs::wishart_conditional(5.0, 0.1, Matrix::Zero(2, 2), 7);
  CHECK(w.dof == 12.0);
  CHECK((w.inverse_scale - 0.1 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  RngStream rng(7, StreamTag::kTest, 0, 0);
  const Matrix S = oracle::random_spd(2, rng);
  const auto post = gibbs::wishart_conditional(4.0, 0.5, S, 10);
  const Matrix want_cov_mean = (0.5 * Matrix::Identity(2, 2) + S) / (4.0 + 10 - 2 - 1);
  Matrix sum = Matrix::Zero(2, 2);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    sum += stats::sample_wishart_inverse_scale(post.dof, post.inverse_scale, rng).inverse();
  }
  CHECK(((sum / draws) - want_cov_mean).cwiseAbs().maxCoeff() <
        0.03 * want_cov_mean.cwiseAbs().maxCoeff());

  const Matrix theta = oracle::random_lower(3, 1, rng);
  const Matrix M = oracle::random_matrix(1, 10, rng);
  const auto zero = gibbs::noise_conditional(theta * M, M, theta, 0.01, 0.02);
  CHECK(zero.shape == doctest::Approx(0.01 + 15.0));
  CHECK(zero.rate == doctest::Approx(0.02).epsilon(1e-12));

  const Index P = 8, K = 2000;
  const Matrix big_m = oracle::random_matrix(1, K, rng);
  const Matrix big_theta = oracle::random_lower(P, 1, rng);
  const Matrix y = big_theta * big_m + 0.4 * oracle::random_matrix(P, K, rng);
  const auto ig = gibbs::noise_conditional(y, big_m, big_theta, 0.01, 0.01);
  const double mom = (y - big_theta * big_m).squaredNorm() / (P * K);
  CHECK(ig.mean() == doctest::Approx(mom).epsilon(0.01));
  const auto ig10 = gibbs::noise_conditional(y, big_m, big_theta, 0.1, 0.1);
  CHECK(std::abs(ig10.mean() - ig.mean()) / ig.mean() < 0.01);
}

TEST_CASE("latent window and precision") {
  const auto first = gibbs::latent_window(0, 2, 10);
  CHECK(first.lo == 2);
  CHECK(first.hi == 2);
  const auto last = gibbs::latent_window(9, 2, 10);
  CHECK(last.lo == 0);
  CHECK(last.hi == 0);
  const auto mid = gibbs::latent_window(5, 2, 10);
  CHECK(mid.lo == 0);
  CHECK(mid.hi == 2);
  const auto second = gibbs::latent_window(1, 2, 10);
  CHECK(second.lo == 1);
  CHECK(second.hi == 2);
}
