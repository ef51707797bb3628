#pragma once

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

/// Orthonormal per-mode factor matrices, one per non-subject mode.
struct FactorBasis {
  std::vector<Matrix> factors;  // factor i has shape (T_i, rank_i)
  std::vector<int> ranks;

  std::size_t mode_count() const { return factors.size(); }
};

/// Higher-order SVD of a subject-first tensor (N x T_1 x ... x T_D): factor i
/// holds the leading rank_i left singular vectors of the mode-(i+1)
/// matricization. Each singular vector's largest-magnitude entry is made
/// positive. The subject mode is never factorized.
FactorBasis tucker_bases(const DenseTensor& t, const std::vector<int>& ranks);

/// Projects each non-subject mode onto the basis subspace:
/// t x_2 B_1 B_1^T x_3 ... Idempotent.
DenseTensor project_reconstruct(const DenseTensor& t, const FactorBasis& basis);

}  // namespace tgpr
