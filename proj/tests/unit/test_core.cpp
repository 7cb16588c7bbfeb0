#include "doctest.h"

#include "ressm/core/companion.hpp"
#include "ressm/core/distributions.hpp"
#include "ressm/core/error.hpp"
#include "ressm/core/linalg.hpp"
#include "ressm/core/parallel.hpp"
#include "ressm/core/random.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace ressm;
using stats::RngStream;
using stats::StreamTag;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) x(r, c++) = v;
    ++r;
  }
  return x;
}

Vector vecof(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("vec stacks columns") {
  CHECK(stats::vec(mat({{1, 3}, {2, 4}})) == vecof({1, 2, 3, 4}));
  CHECK(stats::vec(Matrix::Zero(2, 2)) == vecof({0, 0, 0, 0}));
  CHECK(stats::vec(Matrix::Identity(2, 2)) == vecof({1, 0, 0, 1}));
}

TEST_CASE("low drops the strict upper triangle") {
  const Matrix x = mat({{1, 0}, {2, 4}, {3, 5}});
  CHECK(stats::low(x) == vecof({1, 2, 3, 4, 5}));
  CHECK(stats::low(Matrix::Identity(2, 2)) == vecof({1, 0, 1}));
  CHECK(stats::unlow(vecof({1, 2, 3, 4, 5}), 3, 2) == x);
  CHECK(stats::low_length(54, 5) == 260);
  CHECK_THROWS_AS(stats::low(Matrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("vec and low round trips on random matrices") {
  RngStream rng(11, StreamTag::kTest, 0, 0);
  for (int t = 0; t < 1000; ++t) {
    const Index P = 1 + static_cast<Index>(rng() % 7);
    const Index Q = 1 + static_cast<Index>(rng() % P);
    const Matrix x = oracle::random_matrix(P, Q, rng);
    REQUIRE(stats::unvec(stats::vec(x), P, Q) == x);
    const Vector l = stats::low(x);
    REQUIRE(l.size() == (2 * P - Q + 1) * Q / 2);
    Matrix lower = x;
    stats::zero_upper(lower);
    REQUIRE(stats::unlow(l, P, Q) == lower);
    const stats::IndexMapF f(P, Q);
    const Vector v = stats::vec(x);
    for (Index k = 0; k < f.size(); ++k) REQUIRE(v[f.indices()[k]] == l[k]);
  }
}

TEST_CASE("factorize_spd adds jitter once then throws") {
  Matrix semi = Matrix::Zero(2, 2);
  semi(0, 0) = 1.0;
  const auto llt = stats::factorize_spd(semi, "semi");
  CHECK(llt.info() == Eigen::Success);
  Matrix neg = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(stats::factorize_spd(neg, "negative block"), NumericalError);
  try {
    stats::factorize_spd(neg, "negative block");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("negative block") != std::string::npos);
  }
}

TEST_CASE("philox4x32-10 known-answer vectors") {
  using stats::PhiloxCounter;
  using stats::PhiloxKey;
  CHECK(stats::philox4x32_10(PhiloxCounter{0, 0, 0, 0}, PhiloxKey{0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(stats::philox4x32_10(
            PhiloxCounter{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
            PhiloxKey{0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(stats::philox4x32_10(
            PhiloxCounter{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
            PhiloxKey{0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(5, StreamTag::kSegment, 3, 7);
  RngStream b(5, StreamTag::kSegment, 3, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
  std::set<std::uint64_t> firsts;
  for (std::uint32_t unit = 0; unit < 4; ++unit) {
    for (std::uint32_t it = 0; it < 4; ++it) {
      firsts.insert(RngStream(5, StreamTag::kSegment, unit, it)());
      firsts.insert(RngStream(5, StreamTag::kSubject, unit, it)());
      firsts.insert(RngStream(5, stats::stage_tag(StreamTag::kSegment, true), unit, it)());
    }
  }
  CHECK(firsts.size() == 48);
  CHECK(RngStream(6, StreamTag::kSegment, 3, 7)() != RngStream(5, StreamTag::kSegment, 3, 7)());
}

TEST_CASE("canonical gaussian moments") {
  SUBCASE("standard bivariate") {
    stats::CanonicalGaussian g{Vector::Zero(2), Matrix::Identity(2, 2)};
    RngStream rng(1, StreamTag::kTest, 0, 0);
    const int n = 100000;
    Vector mean = Vector::Zero(2);
    Matrix second = Matrix::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
      const Vector x = stats::sample_canonical_gaussian(g, rng);
      mean += x;
      second += x * x.transpose();
    }
    mean /= n;
    const Matrix cov = second / n - mean * mean.transpose();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
    CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);
  }
  SUBCASE("scalar") {
    stats::CanonicalGaussian g{vecof({8.0}), mat({{4.0}})};
    CHECK(g.mean()[0] == doctest::Approx(2.0));
    RngStream rng(2, StreamTag::kTest, 0, 0);
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double x = stats::sample_canonical_gaussian(g, rng)[0];
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    CHECK(m == doctest::Approx(2.0).epsilon(0.01));
    CHECK(s2 / n - m * m == doctest::Approx(0.25).epsilon(0.03));
  }
  SUBCASE("correlated, z-test against the 2x2 inverse") {
    const Matrix q = mat({{2, 1}, {1, 2}});
    stats::CanonicalGaussian g{vecof({3, 0}), q};
    const Matrix cov = mat({{2, -1}, {-1, 2}}) / 3.0;
    const Vector mu = cov * g.b;
    CHECK(mu[0] == doctest::Approx(2.0));
    CHECK(mu[1] == doctest::Approx(-1.0));
    RngStream rng(3, StreamTag::kTest, 0, 0);
    const int n = 100000;
    Vector mean = Vector::Zero(2);
    Matrix second = Matrix::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
      const Vector x = stats::sample_canonical_gaussian(g, rng);
      mean += x;
      second += x * x.transpose();
    }
    mean /= n;
    const Matrix emp = second / n - mean * mean.transpose();
    for (int k = 0; k < 2; ++k) {
      CHECK(std::abs(mean[k] - mu[k]) / std::sqrt(cov(k, k) / n) < 4.0);
    }
    CHECK((emp - cov).cwiseAbs().maxCoeff() < 0.02);
  }
}

TEST_CASE("wishart draws") {
  SUBCASE("one-dimensional is chi-square") {
    RngStream rng(4, StreamTag::kTest, 0, 0);
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = stats::sample_wishart(3.0, mat({{1.0}}), rng)(0, 0);
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    CHECK(m == doctest::Approx(3.0).epsilon(0.02));
    CHECK(s2 / n - m * m == doctest::Approx(6.0).epsilon(0.04));
  }
  SUBCASE("mean is dof times scale and draws are SPD") {
    RngStream rng(5, StreamTag::kTest, 0, 0);
    const int n = 100000;
    Matrix sum = Matrix::Zero(2, 2);
    bool spd = true;
    for (int i = 0; i < n; ++i) {
      const Matrix w = stats::sample_wishart(5.0, Matrix::Identity(2, 2), rng);
      spd = spd && Eigen::LLT<Matrix>(w).info() == Eigen::Success;
      sum += w;
    }
    CHECK(spd);
    const Matrix mean = sum / n;
    CHECK(mean(0, 0) == doctest::Approx(5.0).epsilon(0.03));
    CHECK(mean(1, 1) == doctest::Approx(5.0).epsilon(0.03));
    CHECK(std::abs(mean(0, 1)) < 0.15);
  }
  SUBCASE("conjugate update matches an independent posterior") {
    RngStream rng(6, StreamTag::kTest, 0, 0);
    const Matrix h = 2.0 * Matrix::Identity(2, 2);
    const double nu = 4.0;
    Matrix scatter = Matrix::Zero(2, 2);
    const int n = 6;
    for (int i = 0; i < n; ++i) {
      const Vector r = oracle::random_matrix(2, 1, rng);
      scatter += r * r.transpose();
    }
    const Matrix post_inv_scale = h + scatter;
    const double post_dof = nu + n;
    const Matrix expected = post_dof * post_inv_scale.inverse();
    const int draws = 100000;
    Matrix sum = Matrix::Zero(2, 2);
    for (int i = 0; i < draws; ++i) {
      sum += stats::sample_wishart_inverse_scale(post_dof, post_inv_scale, rng);
    }
    CHECK(((sum / draws) - expected).cwiseAbs().maxCoeff() <
          0.03 * expected.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("inverse gamma draws") {
  RngStream rng(7, StreamTag::kTest, 0, 0);
  const int n = 100000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += stats::sample_inverse_gamma(3.0, 4.0, rng);
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.02));

  std::vector<double> ours, ref;
  std::mt19937_64 gen(99);
  std::gamma_distribution<double> gamma(2.0, 1.0 / 2.0);
  for (int i = 0; i < 20000; ++i) {
    ours.push_back(stats::sample_inverse_gamma(2.0, 2.0, rng));
    ref.push_back(1.0 / gamma(gen));
  }
  const double crit = 1.63 * std::sqrt(2.0 / 20000.0);
  CHECK(ks_two_sample(ours, ref) < crit);
  double sum = 0;
  for (double v : ours) sum += v;
  CHECK(sum / 20000.0 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("companion matrix") {
  SUBCASE("order one is A itself") {
    const Matrix a = mat({{0.5, 0.1}, {-0.2, 0.3}});
    const stats::CompanionMatrix c(a);
    CHECK(c.matrix() == a);
    CHECK(c.block(1) == a);
  }
  SUBCASE("scalar AR(2) with quadratic-root oracle") {
    const stats::CompanionMatrix c(mat({{0.95, -0.55}}));
    CHECK(c.matrix() == mat({{0.95, -0.55}, {1.0, 0.0}}));
    const double disc = 0.95 * 0.95 - 4.0 * 0.55;
    REQUIRE(disc < 0.0);
    const double modulus = std::sqrt(0.55);
    CHECK(c.spectral_radius() == doctest::Approx(modulus).epsilon(1e-12));
    CHECK(c.spectral_radius() < 1.0);
  }
  SUBCASE("unit root") {
    CHECK(stats::CompanionMatrix(Matrix::Identity(3, 3)).spectral_radius() ==
          doctest::Approx(1.0));
  }
  SUBCASE("blocks round trip") {
    RngStream rng(8, StreamTag::kTest, 0, 0);
    const Matrix a = oracle::random_matrix(2, 6, rng);
    const stats::CompanionMatrix c(stats::split_lag_blocks(a, 3));
    CHECK(c.order() == 3);
    CHECK(c.latent_dim() == 2);
    for (Index h = 1; h <= 3; ++h) CHECK(c.block(h) == a.middleCols((h - 1) * 2, 2));
  }
  SUBCASE("companion trajectory equals the direct recursion") {
    RngStream rng(9, StreamTag::kTest, 0, 0);
    const Index Q = 2, m = 2, K = 200;
    const Matrix a = 0.3 * oracle::random_matrix(Q, m * Q, rng);
    const Matrix noise = oracle::random_matrix(Q, K, rng);
    Matrix direct = Matrix::Zero(Q, K);
    for (Index k = 0; k < K; ++k) {
      Vector x = noise.col(k);
      for (Index h = 1; h <= m; ++h) {
        if (k - h >= 0) x += a.middleCols((h - 1) * Q, Q) * direct.col(k - h);
      }
      direct.col(k) = x;
    }
    const stats::CompanionMatrix c(a);
    Vector z = Vector::Zero(m * Q);
    double worst = 0.0;
    for (Index k = 0; k < K; ++k) {
      Vector e = Vector::Zero(m * Q);
      e.head(Q) = noise.col(k);
      z = c.matrix() * z + e;
      worst = std::max(worst, (z.head(Q) - direct.col(k)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("parallel_for covers every unit and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [&](std::size_t i) {
                                 ++ran;
                                 if (i == 17) throw std::runtime_error("unit 17");
                               }),
                  std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL("no units"); });
}
