#pragma once

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

/// Eigendecomposition of a symmetric matrix, eigenvalues non-increasing and
/// clamped from below at eig_floor(max |eigenvalue|).
struct SymEig {
  Matrix eigvecs;
  Vector eigvals;
};

inline double eig_floor(double max_abs_eigval) {
  return 1e-10 * std::max(max_abs_eigval, 1.0);
}

/// Symmetrizes the input as (M + M^T)/2 before decomposing. Throws on
/// non-finite entries or inputs farther than 1e-8 from symmetric.
SymEig eig_sym(const Matrix& m);

}  // namespace tgpr
