#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/chain_state.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"

#include <vector>

namespace ressm::diag {

/// Sensor term: sum_k log N(Y_k; fitted_k, sigma^2 I).
double sensor_loglik(const Matrix& y, const Matrix& fitted, double sigma2);

/// MVAR term: sum over k > m of log N(M_k; sum_h A_h M_{k-h}, I), plus
/// log N(M_k; 0, I / init_precision) for k <= m when init_precision > 0.
double state_loglik(const Matrix& M, const Matrix& a,
                    double init_precision = 0.0);

/// log p(Y_rij, M_rij | Theta, A, sigma^2) for one segment.
double segment_complete_loglik(const Matrix& y, const Matrix& M,
                               const Matrix& theta, const Matrix& a,
                               double sigma2, double init_precision = 0.0);

/// Complete-data log-likelihood summed over segments in layout order,
/// using the segment-level parameters of `state`.
double complete_loglik(const model::HierDataset& data,
                       const model::ChainState& state,
                       double init_precision = 0.0, int threads = 1);

/// log p(Y | Theta M, sigma^2) summed over segments.
double conditional_loglik(const model::HierDataset& data,
                          const model::ChainState& state, int threads = 1);

/// Segment-level plug-in values: conditional posterior means of A_rij and
/// Theta_rij given M and the parents and precisions in `state`, and the
/// inverse-gamma mean of sigma^2 given Theta_rij and M. Restricted modes
/// use the pooled group conditionals instead of the segment ones.
struct PluginParameters {
  std::vector<Matrix> theta;
  std::vector<Matrix> a;
  std::vector<double> sigma2;
};
PluginParameters plugin_parameters(const model::HierDataset& data,
                                   const model::ChainState& state,
                                   const model::ModelSpec& spec,
                                   const model::Hyperparams& hyper,
                                   int threads = 1);

/// log p(Y, M | plug-in parameters).
double plugin_loglik(const model::HierDataset& data,
                     const model::ChainState& state,
                     const model::ModelSpec& spec,
                     const model::Hyperparams& hyper, int threads = 1);

}  // namespace ressm::diag
