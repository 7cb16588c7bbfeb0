#pragma once

#include "ressm/core/linalg.hpp"
#include "ressm/model/chain_state.hpp"

#include <string>
#include <vector>

namespace ressm::ident {

enum class Level { kSegment, kSubject, kGroup };
std::string to_string(Level level);

/// One column comparison. For a segment check r, i, j locate the child;
/// subject checks leave j = -1 and group checks i = j = -1.
struct SignRecord {
  int iteration = 0;
  Level level = Level::kSegment;
  int r = 0;
  int i = -1;
  int j = -1;
  int q = 0;
  double cosine = 0.0;
  bool flipped = false;
};

struct SignAudit {
  std::vector<SignRecord> records;
  int flips() const;
};

/// x^T y / sqrt(x^T x y^T y). Throws ValidationError on a zero vector.
double cosine(const Vector& x, const Vector& y);

/// Negates column q of a Q x mQ dynamics matrix's row and of every lag
/// block's column: S A S with S = diag(1, .., -1, .., 1).
void conjugate_dynamics(Matrix& a, Index q);

/// One bottom-up pass: segment vs subject, subject vs group, group vs
/// population. The population reference is the mean of the group
/// loadings, the centre of the population full conditional; the draw
/// itself is dominated by the wide group-level spread when R is small.
/// A column whose cosine with its parent is below rho0 is
/// negated together with everything beneath it (descendant loading
/// columns, latent rows M_q and the matching sign conjugation of every
/// affected A). Pairs where either column is zero are skipped. Returns
/// the number of flips and appends one record per checked pair.
int apply_sign_tracking(model::ChainState& state,
                        const model::HierLayout& layout, double rho0,
                        int iteration, SignAudit& audit);

}  // namespace ressm::ident
