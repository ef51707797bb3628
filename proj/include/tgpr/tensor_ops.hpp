#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tgpr/tensor.hpp"

namespace tgpr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

/// Mode-k matricization: rows indexed by the chosen mode, columns by the
/// remaining modes in ascending order with the last one fastest.
Matrix mode_matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of mode_matricize for the given target shape.
DenseTensor mode_fold(const Matrix& m, const std::vector<std::size_t>& shape,
                      std::size_t mode);

/// Mode-k product t x_k m; result extent at `mode` becomes m.rows().
DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t mode);

/// (f_1 (x) ... (x) f_D) v without materializing the Kronecker product.
Vector kron_matvec(const std::vector<Matrix>& factors, const Vector& v);

/// Diagonal of f_1 (x) ... (x) f_D as a tensor over the factor row counts,
/// flattened row-major. Factors must be square.
dvec kron_diag(const std::vector<Vector>& diags);

/// Views the subject-first data tensor (N x T_1 x ... x T_D) as its N x T
/// mode-0 matricization. Valid while `t` is alive; no copy.
ConstRowMap as_matrix(const DenseTensor& t);
RowMap as_matrix_mut(DenseTensor& t);

}  // namespace tgpr
