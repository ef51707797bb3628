#include "tgpr/eig.hpp"

#include <stdexcept>

namespace tgpr {

SymEig eig_sym(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eig_sym: matrix not square");
  if (!m.allFinite()) throw std::invalid_argument("eig_sym: non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("eig_sym: matrix not symmetric");

  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig_sym: decomposition failed");

  // Eigen returns ascending order; flip to non-increasing.
  const Eigen::Index n = m.rows();
  SymEig out;
  out.eigvecs.resize(n, n);
  out.eigvals.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigvals[k] = solver.eigenvalues()[n - 1 - k];
    out.eigvecs.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  const double floor = eig_floor(out.eigvals.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k)
    if (out.eigvals[k] < floor) out.eigvals[k] = floor;
  return out;
}

}  // namespace tgpr
