#pragma once

#include "ressm/core/linalg.hpp"

#include <vector>

namespace ressm::stats {

/// mQ x mQ MVAR(1) rewriting of an MVAR(m) with lag blocks A_1..A_m:
/// top block row [A_1 ... A_m], identity blocks on the sub-diagonal.
class CompanionMatrix {
 public:
  /// Blocks given as the concatenation [A_1 ... A_m] (Q x mQ).
  explicit CompanionMatrix(const Matrix& concatenated);
  explicit CompanionMatrix(const std::vector<Matrix>& blocks);

  Index order() const { return order_; }
  Index latent_dim() const { return latent_dim_; }
  const Matrix& matrix() const { return matrix_; }
  Matrix block(Index h) const;  // A_h, 1-based lag

  /// Largest eigenvalue modulus; < 1 iff the MVAR is stationary.
  double spectral_radius() const;

 private:
  Index order_;
  Index latent_dim_;
  Matrix matrix_;
};

/// Splits [A_1 ... A_m] into its m lag blocks.
std::vector<Matrix> split_lag_blocks(const Matrix& concatenated, Index order);

}  // namespace ressm::stats
