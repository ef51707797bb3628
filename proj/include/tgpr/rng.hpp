#pragma once

#include <cstdint>

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

/// splitmix64-seeded xoshiro256++ with Box-Muller normals. Self-contained so
/// the same seed reproduces the same stream on any platform or stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform01();                       // [0, 1)
  double uniform(double lo, double hi);
  double normal();                          // standard normal

  /// Derives an independent stream for a named pipeline stage.
  Rng fork(std::uint64_t stream) const;

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
  std::uint64_t seed_;
};

/// Random matrix with orthonormal columns (QR of a Gaussian draw), each
/// column's largest-magnitude entry made positive.
Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace tgpr
