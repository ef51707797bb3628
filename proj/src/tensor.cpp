#include "tgpr/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tgpr {

static_assert(std::endian::native == std::endian::little,
              "dtf i/o assumes a little-endian host");

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  for (std::size_t e : shape_) {
    if (e < 1) throw std::invalid_argument("DenseTensor: all extents must be >= 1");
  }
  data_.assign(shape_product(shape_), 0.0);
}

std::size_t DenseTensor::linear_index(const std::vector<std::size_t>& idx) const {
  if (idx.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
  std::size_t lin = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= shape_[k]) throw std::out_of_range("tensor index out of range");
    lin = lin * shape_[k] + idx[k];
  }
  return lin;
}

void DenseTensor::fill(double v) {
  for (double& x : data_) x = v;
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t e : shape) p *= e;
  return p;
}

void write_dtf(const std::string& path, const DenseTensor& t) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write("DTF1", 4);
  const std::uint32_t order = static_cast<std::uint32_t>(t.order());
  f.write(reinterpret_cast<const char*>(&order), sizeof(order));
  for (std::size_t k = 0; k < t.order(); ++k) {
    const std::uint64_t e = t.extent(k);
    f.write(reinterpret_cast<const char*>(&e), sizeof(e));
  }
  f.write(reinterpret_cast<const char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!f) throw std::runtime_error("short write: " + path);
}

DenseTensor read_dtf(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "DTF1", 4) != 0)
    throw std::runtime_error("not a dtf file: " + path);
  std::uint32_t order = 0;
  f.read(reinterpret_cast<char*>(&order), sizeof(order));
  if (!f || order == 0 || order > 16) throw std::runtime_error("bad dtf order: " + path);
  std::vector<std::size_t> shape(order);
  for (std::uint32_t k = 0; k < order; ++k) {
    std::uint64_t e = 0;
    f.read(reinterpret_cast<char*>(&e), sizeof(e));
    if (!f || e == 0) throw std::runtime_error("bad dtf extent: " + path);
    shape[k] = static_cast<std::size_t>(e);
  }
  DenseTensor t(shape);
  f.read(reinterpret_cast<char*>(t.data()),
         static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated dtf payload: " + path);
  return t;
}

}  // namespace tgpr
