#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/layout.hpp"

#include <string>
#include <vector>

namespace ressm::model {

enum class FitMode {
  kFull,          // random effects at every level
  kFixedLoading,  // Theta_rij = Theta_ri = Theta_r
  kFixedAll,      // additionally A_rij = A_ri = A_r
};

std::string to_string(FitMode mode);
FitMode fit_mode_from_string(const std::string& name);

struct ModelSpec {
  Index Q = 2;
  Index m = 1;
  FitMode mode = FitMode::kFull;

  /// Length of vec(A) for a Q x mQ dynamics matrix.
  Index la() const { return m * Q * Q; }
  /// Length of low(Theta) for a P x Q loading matrix.
  Index ltheta(Index P) const { return stats::low_length(P, Q); }
  bool loadings_random() const { return mode == FitMode::kFull; }
  bool dynamics_random() const { return mode != FitMode::kFixedAll; }
};

/// Wishart priors W(nu, (kappa I)^{-1}) on the six precision matrices and
/// IG(a0, b0) on every sigma^2_rij.
///   u: Theta_rij around Theta_ri     v: A_rij around A_ri
///   psi: Theta_ri around Theta_r     gamma: A_ri around A_r
///   theta: Theta_r around Theta      a: A_r around A
struct Hyperparams {
  double nu_u = 0, nu_v = 0, nu_psi = 0, nu_gamma = 0, nu_a = 0, nu_theta = 0;
  double kappa_u = 1e-3, kappa_v = 1e-3, kappa_psi = 1e-3, kappa_gamma = 1e-3;
  double kappa_a = 100, kappa_theta = 100;
  double a0 = 0.01;
  double b0 = 0.01;
  /// Population A and Theta: N(0, (precision I)^{-1}); zero is flat.
  double population_precision = 0.0;
  /// M(t_1..t_m): N(0, (precision I)^{-1}); zero is flat. A flat choice
  /// leaves those states unbounded while Theta and A are near zero, which
  /// traps a chain started from zero loadings.
  double initial_state_precision = 1.0;
};

Hyperparams default_hyperparams(Index P, Index Q, Index m,
                                double small_kappa = 1e-3);

struct MCMCSchedule {
  int n_iter = 7500;
  int n_burnin = 2500;
  int thin = 10;
  int n_init_iter = 2500;
  bool sign_tracking = true;
  int sign_check_start = 1250;
  int sign_check_end = 2500;
  int sign_check_every = 10;
  double rho0 = 0.0;

  /// Iterations are 1-based; draws after burn-in are kept every `thin`.
  bool keeps(int iteration) const {
    return iteration > n_burnin && (iteration - n_burnin) % thin == 0;
  }
  int kept_count() const { return (n_iter - n_burnin) / thin; }
  bool checks_signs(int iteration) const {
    return sign_tracking && iteration >= sign_check_start &&
           iteration <= sign_check_end &&
           iteration % sign_check_every == 0;
  }
};

/// 7500 / 2500 / thin 10 scaled by `scale`, with the sign window at
/// [burnin / 2, burnin] and stage 1 as long as the burn-in.
MCMCSchedule default_schedule(double scale = 1.0);

/// Human-readable violations; empty iff a fit may proceed.
std::vector<std::string> validate(const HierDataset& ds, const ModelSpec& spec);
std::vector<std::string> validate(const Hyperparams& h, Index P,
                                  const ModelSpec& spec);
std::vector<std::string> validate(const MCMCSchedule& s);

/// Throws ValidationError joining every violation when a list is non-empty.
void throw_if_invalid(const std::vector<std::string>& violations,
                      const std::string& what);

}  // namespace ressm::model
