#pragma once

#include "tgpr/tensor_ops.hpp"

// Plain-loop, single-threaded counterparts of the OpenMP kernels. Tests pin
// the parallel implementations against these; the kernel benchmark times both.
namespace tgpr::reference {

Matrix mode_matricize(const DenseTensor& t, std::size_t mode);
DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t mode);
Vector kron_matvec(const std::vector<Matrix>& factors, const Vector& v);

/// Densely materialized f_1 (x) ... (x) f_D.
Matrix kron_dense(const std::vector<Matrix>& factors);

}  // namespace tgpr::reference
