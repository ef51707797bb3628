#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "tgpr/alloc_tracker.hpp"

namespace tgpr {

using dvec = std::vector<double, alloc_tracker::tracked_allocator<double>>;

/// Dense multi-way array, row-major (last index fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::initializer_list<std::size_t> shape)
      : DenseTensor(std::vector<std::size_t>(shape)) {}

  std::size_t order() const { return shape_.size(); }
  std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(const std::vector<std::size_t>& idx) { return data_[linear_index(idx)]; }
  double at(const std::vector<std::size_t>& idx) const { return data_[linear_index(idx)]; }
  std::size_t linear_index(const std::vector<std::size_t>& idx) const;

  void fill(double v);
  bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  dvec data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// .dtf tensor file: magic "DTF1", uint32 order, order x uint64 extents,
// row-major float64 payload. All fields little-endian. Round-trips bit-exact.
void write_dtf(const std::string& path, const DenseTensor& t);
DenseTensor read_dtf(const std::string& path);

}  // namespace tgpr
