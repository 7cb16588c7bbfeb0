#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"

#include <vector>

namespace ressm::model {

/// Full parameter state of one chain. A matrices are Q x mQ concatenations
/// [A_1 ... A_m]; Theta matrices are P x Q with a zero strictly-upper
/// triangle. Variance components are held as precision matrices, which is
/// the form their Wishart full conditionals produce. Sigma_w = I is implied.
struct ChainState {
  std::vector<Matrix> M;  // per segment, Q x K

  std::vector<Matrix> a_seg;  // A_rij
  std::vector<Matrix> a_sub;  // A_ri
  std::vector<Matrix> a_grp;  // A_r
  Matrix a_pop;               // A

  std::vector<Matrix> theta_seg;
  std::vector<Matrix> theta_sub;
  std::vector<Matrix> theta_grp;
  Matrix theta_pop;

  std::vector<Matrix> prec_v;      // per group, L_a x L_a
  std::vector<Matrix> prec_gamma;  // per group, L_a x L_a
  Matrix prec_a;                   // L_a x L_a
  std::vector<Matrix> prec_u;      // per group, L_theta x L_theta
  std::vector<Matrix> prec_psi;    // per group, L_theta x L_theta
  Matrix prec_theta;               // L_theta x L_theta

  std::vector<double> sigma2;  // per segment
};

/// True when every field has the same shape and identical bits.
bool identical(const ChainState& a, const ChainState& b);

/// Zero A and Theta, zero M, identity precisions, unit sigma^2.
ChainState make_state(const HierLayout& layout, Index P, Index K,
                      const ModelSpec& spec);

/// acc += x, field by field. Shapes must match.
void add_to(ChainState& acc, const ChainState& x);
/// Every field multiplied by `factor`.
ChainState scaled(const ChainState& x, double factor);

/// Copies group values down to subject and segment level for the parts of
/// the hierarchy that a restricted mode holds fixed.
void enforce_mode(ChainState& state, const HierLayout& layout,
                  const ModelSpec& spec);

}  // namespace ressm::model
