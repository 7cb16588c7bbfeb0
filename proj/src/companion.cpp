#include "ressm/core/companion.hpp"

#include "ressm/core/error.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace ressm::stats {
namespace {

Matrix concatenate(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw ValidationError("companion: need m >= 1 blocks");
  const Index q = blocks.front().rows();
  Matrix out(q, q * static_cast<Index>(blocks.size()));
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    if (blocks[h].rows() != q || blocks[h].cols() != q) {
      throw ValidationError("companion: block " + std::to_string(h + 1) +
                            " is not " + std::to_string(q) + "x" +
                            std::to_string(q));
    }
    out.middleCols(static_cast<Index>(h) * q, q) = blocks[h];
  }
  return out;
}

}  // namespace

CompanionMatrix::CompanionMatrix(const Matrix& concatenated)
    : latent_dim_(concatenated.rows()) {
  if (latent_dim_ == 0 || concatenated.cols() == 0 ||
      concatenated.cols() % latent_dim_ != 0) {
    throw ValidationError("companion: blocks must be Q x mQ, got " +
                          std::to_string(concatenated.rows()) + "x" +
                          std::to_string(concatenated.cols()));
  }
  order_ = concatenated.cols() / latent_dim_;
  const Index n = order_ * latent_dim_;
  matrix_ = Matrix::Zero(n, n);
  matrix_.topRows(latent_dim_) = concatenated;
  if (order_ > 1) {
    matrix_.block(latent_dim_, 0, n - latent_dim_, n - latent_dim_)
        .setIdentity();
  }
}

CompanionMatrix::CompanionMatrix(const std::vector<Matrix>& blocks)
    : CompanionMatrix(concatenate(blocks)) {}

Matrix CompanionMatrix::block(Index h) const {
  return matrix_.block(0, (h - 1) * latent_dim_, latent_dim_, latent_dim_);
}

double CompanionMatrix::spectral_radius() const {
  Eigen::EigenSolver<Matrix> solver(matrix_, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<Matrix> split_lag_blocks(const Matrix& concatenated, Index order) {
  const Index q = concatenated.rows();
  if (concatenated.cols() != q * order) {
    throw ValidationError("split_lag_blocks: expected Q x mQ");
  }
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(order));
  for (Index h = 0; h < order; ++h) out.push_back(concatenated.middleCols(h * q, q));
  return out;
}

}  // namespace ressm::stats
