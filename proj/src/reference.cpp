#include "tgpr/reference.hpp"

#include <stdexcept>

namespace tgpr::reference {

namespace {

std::vector<std::size_t> unrank(std::size_t lin, const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t k = shape.size(); k-- > 0;) {
    idx[k] = lin % shape[k];
    lin /= shape[k];
  }
  return idx;
}

}  // namespace

Matrix mode_matricize(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("mode out of range");
  std::vector<std::size_t> rest_shape;
  for (std::size_t k = 0; k < t.order(); ++k)
    if (k != mode) rest_shape.push_back(t.extent(k));
  const std::size_t cols = shape_product(rest_shape);
  Matrix m(t.extent(mode), cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const std::vector<std::size_t> rest = unrank(c, rest_shape);
    for (std::size_t a = 0; a < t.extent(mode); ++a) {
      std::vector<std::size_t> idx;
      idx.reserve(t.order());
      std::size_t j = 0;
      for (std::size_t k = 0; k < t.order(); ++k)
        idx.push_back(k == mode ? a : rest[j++]);
      m(a, c) = t.at(idx);
    }
  }
  return m;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("mode out of range");
  if (static_cast<std::size_t>(m.cols()) != t.extent(mode))
    throw std::invalid_argument("factor columns do not match mode extent");
  std::vector<std::size_t> out_shape = t.shape();
  out_shape[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_shape);
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    std::vector<std::size_t> idx = unrank(lin, out_shape);
    double acc = 0.0;
    std::vector<std::size_t> src = idx;
    for (std::size_t b = 0; b < t.extent(mode); ++b) {
      src[mode] = b;
      acc += m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(b)) * t.at(src);
    }
    out[lin] = acc;
  }
  return out;
}

Matrix kron_dense(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Ones(1, 1);
  for (const Matrix& f : factors) {
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = next;
  }
  return out;
}

Vector kron_matvec(const std::vector<Matrix>& factors, const Vector& v) {
  return kron_dense(factors) * v;
}

}  // namespace tgpr::reference
