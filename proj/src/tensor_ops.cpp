#include "tgpr/tensor_ops.hpp"

#include <omp.h>

#include <stdexcept>

namespace tgpr {

namespace {

// Splits a shape around `mode` into outer (product of earlier extents) and
// inner (product of later extents); the tensor is then outer x mid x inner
// with contiguous inner stride.
struct ModeSplit {
  std::size_t outer = 1, mid = 1, inner = 1;
};

ModeSplit split(const std::vector<std::size_t>& shape, std::size_t mode) {
  ModeSplit s;
  for (std::size_t k = 0; k < mode; ++k) s.outer *= shape[k];
  s.mid = shape[mode];
  for (std::size_t k = mode + 1; k < shape.size(); ++k) s.inner *= shape[k];
  return s;
}

}  // namespace

Matrix mode_matricize(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("mode_matricize: mode out of range");
  const ModeSplit s = split(t.shape(), mode);
  Matrix m(s.mid, s.outer * s.inner);
  const double* src = t.data();
#pragma omp parallel for collapse(2) if (s.outer * s.mid > 1)
  for (std::size_t r = 0; r < s.outer; ++r) {
    for (std::size_t a = 0; a < s.mid; ++a) {
      const double* row = src + (r * s.mid + a) * s.inner;
      for (std::size_t c = 0; c < s.inner; ++c) m(a, r * s.inner + c) = row[c];
    }
  }
  return m;
}

DenseTensor mode_fold(const Matrix& m, const std::vector<std::size_t>& shape,
                      std::size_t mode) {
  if (mode >= shape.size()) throw std::invalid_argument("mode_fold: mode out of range");
  const ModeSplit s = split(shape, mode);
  if (static_cast<std::size_t>(m.rows()) != s.mid ||
      static_cast<std::size_t>(m.cols()) != s.outer * s.inner)
    throw std::invalid_argument("mode_fold: matrix shape does not match target");
  DenseTensor t(shape);
  double* dst = t.data();
#pragma omp parallel for collapse(2) if (s.outer * s.mid > 1)
  for (std::size_t r = 0; r < s.outer; ++r) {
    for (std::size_t a = 0; a < s.mid; ++a) {
      double* row = dst + (r * s.mid + a) * s.inner;
      for (std::size_t c = 0; c < s.inner; ++c) row[c] = m(a, r * s.inner + c);
    }
  }
  return t;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("mode_product: mode out of range");
  const ModeSplit s = split(t.shape(), mode);
  if (static_cast<std::size_t>(m.cols()) != s.mid)
    throw std::invalid_argument("mode_product: factor columns do not match mode extent");

  std::vector<std::size_t> out_shape = t.shape();
  out_shape[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_shape);
  const std::size_t rows = static_cast<std::size_t>(m.rows());

  if (s.outer == 1) {
    // Leading mode: one big GEMM, parallelized over inner column blocks.
    ConstRowMap in(t.data(), s.mid, s.inner);
    RowMap dst(out.data(), rows, s.inner);
    const std::size_t nblk = std::max<std::size_t>(1, omp_get_max_threads());
    const std::size_t blk = (s.inner + nblk - 1) / nblk;
#pragma omp parallel for
    for (std::size_t b = 0; b < nblk; ++b) {
      const std::size_t c0 = b * blk;
      if (c0 >= s.inner) continue;
      const std::size_t c1 = std::min(s.inner, c0 + blk);
      dst.middleCols(c0, c1 - c0).noalias() = m * in.middleCols(c0, c1 - c0);
    }
    return out;
  }

#pragma omp parallel for
  for (std::size_t r = 0; r < s.outer; ++r) {
    ConstRowMap in(t.data() + r * s.mid * s.inner, s.mid, s.inner);
    RowMap dst(out.data() + r * rows * s.inner, rows, s.inner);
    dst.noalias() = m * in;
  }
  return out;
}

Vector kron_matvec(const std::vector<Matrix>& factors, const Vector& v) {
  if (factors.empty()) return v;
  std::vector<std::size_t> shape;
  shape.reserve(factors.size());
  std::size_t n = 1;
  for (const Matrix& f : factors) {
    shape.push_back(static_cast<std::size_t>(f.cols()));
    n *= static_cast<std::size_t>(f.cols());
  }
  if (n != static_cast<std::size_t>(v.size()))
    throw std::invalid_argument("kron_matvec: factor columns do not match vector length");

  DenseTensor t(shape);
  std::copy(v.data(), v.data() + v.size(), t.data());
  for (std::size_t k = 0; k < factors.size(); ++k) t = mode_product(t, factors[k], k);

  Vector out(static_cast<Eigen::Index>(t.size()));
  std::copy(t.data(), t.data() + t.size(), out.data());
  return out;
}

dvec kron_diag(const std::vector<Vector>& diags) {
  dvec out(1, 1.0);
  for (const Vector& d : diags) {
    dvec next(out.size() * static_cast<std::size_t>(d.size()));
    std::size_t k = 0;
    for (double a : out)
      for (Eigen::Index j = 0; j < d.size(); ++j) next[k++] = a * d[j];
    out.swap(next);
  }
  return out;
}

ConstRowMap as_matrix(const DenseTensor& t) {
  if (t.order() < 1) throw std::invalid_argument("as_matrix: scalar tensor");
  return ConstRowMap(t.data(), t.extent(0), t.size() / t.extent(0));
}

RowMap as_matrix_mut(DenseTensor& t) {
  if (t.order() < 1) throw std::invalid_argument("as_matrix: scalar tensor");
  return RowMap(t.data(), t.extent(0), t.size() / t.extent(0));
}

}  // namespace tgpr
