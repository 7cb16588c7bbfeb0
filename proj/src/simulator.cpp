#include "ressm/sim/simulator.hpp"

#include "ressm/core/companion.hpp"
#include "ressm/core/error.hpp"
#include "ressm/core/parallel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ressm::sim {
namespace {

Vector normal_vector(Index n, stats::RngStream& rng) {
  Vector z(n);
  for (Index t = 0; t < n; ++t) z[t] = rng.normal();
  return z;
}

void check_scenario(const SimScenario& sc) {
  const int groups = sc.layout.groups();
  const Index la = sc.m * sc.Q * sc.Q;
  if (static_cast<int>(sc.a_group.size()) != groups ||
      static_cast<int>(sc.theta_group.size()) != groups ||
      static_cast<int>(sc.noise_var.size()) != groups) {
    throw ValidationError("scenario: need one A, Theta and sigma^2 per group");
  }
  if (sc.a_seg_var.size() != la || sc.a_sub_var.size() != la) {
    throw ValidationError("scenario: variance tables must have length mQ^2");
  }
  if ((sc.a_seg_var.array() < 0).any() || (sc.a_sub_var.array() < 0).any() ||
      sc.sigma_u < 0 || sc.sigma_psi < 0) {
    throw ValidationError("scenario: dispersions must be >= 0");
  }
  for (int r = 0; r < groups; ++r) {
    if (sc.a_group[r].rows() != sc.Q || sc.a_group[r].cols() != sc.m * sc.Q) {
      throw ValidationError("scenario: A_r must be Q x mQ");
    }
    if (sc.theta_group[r].rows() != sc.P || sc.theta_group[r].cols() != sc.Q) {
      throw ValidationError("scenario: Theta_r must be P x Q");
    }
    if (!(sc.noise_var[r] > 0)) {
      throw ValidationError("scenario: sigma^2 must be positive");
    }
  }
  if (sc.Q >= sc.P || sc.K <= sc.m || sc.warmup < 0) {
    throw ValidationError("scenario: need Q < P, K > m and warmup >= 0");
  }
}

}  // namespace

Matrix synthetic_loading(Index P, Index Q) {
  Matrix theta = Matrix::Zero(P, Q);
  const double p_count = static_cast<double>(P);
  for (Index q = 0; q < Q; ++q) {
    for (Index p = q; p < P; ++p) {
      const double d = static_cast<double>(p - q);
      theta(p, q) = 0.5 *
                    std::cos(std::numbers::pi * static_cast<double>(q + 1) * d /
                             p_count) *
                    std::exp(-d / (2.0 * p_count));
    }
  }
  return theta;
}

Vector dynamics_variance_table(Index Q, Index m, double diag_lag1_sd,
                               double diag_later_sd, double off_diag_sd) {
  Matrix var = Matrix::Constant(Q, m * Q, off_diag_sd * off_diag_sd);
  for (Index h = 0; h < m; ++h) {
    const double sd = h == 0 ? diag_lag1_sd : diag_later_sd;
    for (Index q = 0; q < Q; ++q) var(q, h * Q + q) = sd * sd;
  }
  return stats::vec(var);
}

Matrix design_dynamics(Index Q, Index m, int group) {
  Matrix a = Matrix::Zero(Q, m * Q);
  for (Index q = 0; q < Q; ++q) {
    const double step = 0.05 * static_cast<double>(q);
    a(q, q) = group == 0 ? 0.95 - step : 1.0;
    if (m >= 2) a(q, Q + q) = group == 0 ? -0.55 + step : -0.6;
  }
  return a;
}

SimScenario reference_scenario(model::HierLayout layout, Index P, Index Q,
                               Index m, Index K) {
  SimScenario sc;
  sc.layout = std::move(layout);
  sc.P = P;
  sc.Q = Q;
  sc.m = m;
  sc.K = K;
  const Matrix theta0 = synthetic_loading(P, Q);
  for (int r = 0; r < sc.layout.groups(); ++r) {
    sc.a_group.push_back(design_dynamics(Q, m, r % 2));
    sc.theta_group.push_back(theta0);
    sc.noise_var.push_back(0.16);
  }
  sc.a_seg_var = dynamics_variance_table(Q, m, 0.08, 0.04, 0.03);
  sc.a_sub_var = dynamics_variance_table(Q, m, 0.10, 0.05, 0.03);
  return sc;
}

Matrix simulate_mvar(const Matrix& a, Index K, int warmup,
                     stats::RngStream& rng) {
  const Index q = a.rows();
  const Index m = a.cols() / q;
  const Index total = K + warmup;
  Matrix path = Matrix::Zero(q, total + m);  // first m columns: zero start
  for (Index t = m; t < total + m; ++t) {
    Vector next = normal_vector(q, rng);
    for (Index h = 1; h <= m; ++h) {
      next.noalias() += a.middleCols((h - 1) * q, q) * path.col(t - h);
    }
    path.col(t) = next;
  }
  if (!path.allFinite()) {
    throw NumericalError("simulate_mvar: trajectory diverged");
  }
  return path.rightCols(K);
}

SimResult simulate_hierarchy(const SimScenario& sc, std::uint64_t seed,
                             int threads) {
  check_scenario(sc);
  const auto& layout = sc.layout;
  model::ModelSpec spec{sc.Q, sc.m, model::FitMode::kFull};
  SimResult out;
  out.data.layout = layout;
  out.data.P = sc.P;
  out.data.K = sc.K;
  out.data.Y.assign(static_cast<std::size_t>(layout.total_segments()),
                    Matrix());
  out.truth = model::make_state(layout, sc.P, sc.K, spec);
  auto& truth = out.truth;

  truth.a_pop = Matrix::Zero(sc.Q, sc.m * sc.Q);
  truth.theta_pop = Matrix::Zero(sc.P, sc.Q);
  for (int r = 0; r < layout.groups(); ++r) {
    truth.a_grp[r] = sc.a_group[r];
    truth.theta_grp[r] = sc.theta_group[r];
    stats::zero_upper(truth.theta_grp[r]);
    truth.a_pop += sc.a_group[r] / layout.groups();
    truth.theta_pop += truth.theta_grp[r] / layout.groups();
  }

  const Vector seg_sd = sc.a_seg_var.cwiseSqrt();
  const Vector sub_sd = sc.a_sub_var.cwiseSqrt();
  const Index lt = stats::low_length(sc.P, sc.Q);
  const Index la = sc.a_seg_var.size();

  parallel_for(static_cast<std::size_t>(layout.total_subjects()), threads,
               [&](std::size_t unit) {
    const int u = static_cast<int>(unit);
    const auto& sub = layout.subject(u);
    stats::RngStream rng(seed, stats::StreamTag::kSimulator,
                         static_cast<std::uint32_t>(u), 0);
    const Vector a_sub =
        stats::vec(truth.a_grp[sub.r]) + sub_sd.cwiseProduct(normal_vector(la, rng));
    truth.a_sub[u] = stats::unvec(a_sub, sc.Q, sc.m * sc.Q);
    const Vector t_sub = stats::low(truth.theta_grp[sub.r]) +
                         sc.sigma_psi * normal_vector(lt, rng);
    truth.theta_sub[u] = stats::unlow(t_sub, sc.P, sc.Q);

    for (int s = sub.first_segment; s < sub.first_segment + sub.segment_count;
         ++s) {
      Matrix a_seg;
      for (int attempt = 0;; ++attempt) {
        a_seg = stats::unvec(a_sub + seg_sd.cwiseProduct(normal_vector(la, rng)),
                             sc.Q, sc.m * sc.Q);
        if (sc.policy == StationarityPolicy::kAllow ||
            stats::CompanionMatrix(a_seg).spectral_radius() < 1.0) {
          break;
        }
        if (attempt + 1 >= sc.max_retries) {
          const auto& ref = layout.segment(s);
          throw NumericalError(
              "simulate_hierarchy: no stationary A for segment (" +
              std::to_string(ref.r) + "," + std::to_string(ref.i) + "," +
              std::to_string(ref.j) + ") after " +
              std::to_string(sc.max_retries) + " draws");
        }
      }
      truth.a_seg[s] = a_seg;
      truth.theta_seg[s] = stats::unlow(
          t_sub + sc.sigma_u * normal_vector(lt, rng), sc.P, sc.Q);
      truth.M[s] = simulate_mvar(a_seg, sc.K, sc.warmup, rng);
      const double sd = std::sqrt(sc.noise_var[sub.r]);
      Matrix y = truth.theta_seg[s] * truth.M[s];
      for (Index k = 0; k < sc.K; ++k) {
        for (Index p = 0; p < sc.P; ++p) y(p, k) += sd * rng.normal();
      }
      out.data.Y[s] = std::move(y);
      truth.sigma2[s] = sc.noise_var[sub.r];
    }
  });
  return out;
}

double relative_estimation_error(const Vector& truth, const Vector& estimate) {
  const double norm = truth.norm();
  if (!(norm > 0.0)) {
    throw ValidationError("relative_estimation_error: truth has zero norm");
  }
  if (truth.size() != estimate.size()) {
    throw ValidationError("relative_estimation_error: length mismatch");
  }
  return (truth - estimate).norm() / norm;
}

}  // namespace ressm::sim
