#pragma once

#include <vector>

namespace ressm::diag {

/// Complete DIC from per-draw complete log-likelihoods log p(Y, M^l | Lambda^l)
/// and plug-in values log p(Y, M^l | Lambda-hat^l):
///   -4 mean(complete) + 2 mean(plugin).
double compute_cdic(const std::vector<double>& complete,
                    const std::vector<double>& plugin);

struct DicVariants {
  double deviance_at_mean;  // D(Lambda_1-bar) = -2 log p(Y | Lambda_1-bar)
  double p_d;               // mean deviance minus deviance at the mean
  double p_v;               // 2 Var[log p(Y | Lambda_1)]
  double dic1;              // D + 2 p_D
  double dic2;              // D + 3 p_D
  double dic3;              // D + 2 p_V
};

/// Observed-data variants from the conditional trace log p(Y | Lambda_1^l)
/// and the log-likelihood at the posterior mean of Lambda_1.
DicVariants compute_dic_variants(const std::vector<double>& conditional,
                                 double loglik_at_mean);

}  // namespace ressm::diag
