#include "tgpr/factorization.hpp"

#include <stdexcept>

#include "tgpr/eig.hpp"

namespace tgpr {

FactorBasis tucker_bases(const DenseTensor& t, const std::vector<int>& ranks) {
  if (t.order() < 2) throw std::invalid_argument("tucker_bases: need a subject mode plus data modes");
  const std::size_t d = t.order() - 1;
  if (ranks.size() != d) throw std::invalid_argument("tucker_bases: one rank per data mode required");

  FactorBasis basis;
  basis.ranks = ranks;
  basis.factors.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t ti = t.extent(i + 1);
    if (ranks[i] < 1 || static_cast<std::size_t>(ranks[i]) > ti)
      throw std::invalid_argument("tucker_bases: rank outside [1, extent] for mode " +
                                  std::to_string(i + 1));
    // Left singular vectors via the Gram matrix of the unfolding.
    const Matrix unfold = mode_matricize(t, i + 1);
    const Matrix gram = unfold * unfold.transpose();
    const SymEig eig = eig_sym(gram);
    Matrix f = eig.eigvecs.leftCols(ranks[i]);
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      Eigen::Index imax = 0;
      f.col(j).cwiseAbs().maxCoeff(&imax);
      if (f(imax, j) < 0) f.col(j) = -f.col(j);
    }
    basis.factors[i] = std::move(f);
  }
  return basis;
}

DenseTensor project_reconstruct(const DenseTensor& t, const FactorBasis& basis) {
  if (basis.mode_count() != t.order() - 1)
    throw std::invalid_argument("project_reconstruct: basis does not match tensor order");
  for (std::size_t i = 0; i < basis.mode_count(); ++i)
    if (static_cast<std::size_t>(basis.factors[i].rows()) != t.extent(i + 1))
      throw std::invalid_argument("project_reconstruct: factor rows do not match extent");

  // Compress with B^T first, then expand; avoids forming B B^T.
  DenseTensor core = t;
  for (std::size_t i = 0; i < basis.mode_count(); ++i)
    core = mode_product(core, basis.factors[i].transpose(), i + 1);
  for (std::size_t i = 0; i < basis.mode_count(); ++i)
    core = mode_product(core, basis.factors[i], i + 1);
  return core;
}

}  // namespace tgpr
