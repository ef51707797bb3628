#include "tgpr/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace tgpr {

KernelSpec full_composite_spec(KernelInput input) {
  KernelSpec s;
  s.linear = s.squared_exponential = s.diagonal = true;
  s.input = input;
  return s;
}

KernelSpec diagonal_spec(KernelInput input) {
  KernelSpec s;
  s.diagonal = true;
  s.input = input;
  return s;
}

std::string kernel_spec_to_string(const KernelSpec& spec) {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += "+";
    out += name;
  };
  if (spec.linear) add("linear");
  if (spec.squared_exponential) add("se");
  if (spec.diagonal) add("diag");
  return out;
}

KernelSpec kernel_spec_from_string(const std::string& s, KernelInput input) {
  KernelSpec spec;
  spec.input = input;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find('+', pos);
    if (next == std::string::npos) next = s.size();
    const std::string term = s.substr(pos, next - pos);
    if (term == "linear")
      spec.linear = true;
    else if (term == "se")
      spec.squared_exponential = true;
    else if (term == "diag")
      spec.diagonal = true;
    else
      throw std::invalid_argument("unknown kernel term: " + term);
    pos = next + 1;
  }
  if (!spec.any_term()) throw std::invalid_argument("kernel spec has no terms");
  return spec;
}

Matrix index_inputs(int n) {
  Matrix m(n, 1);
  for (int i = 0; i < n; ++i) m(i, 0) = static_cast<double>(i + 1);
  return m;
}

namespace {

void check_params(const KernelSpec& spec, const Vector& raw) {
  if (!spec.any_term()) throw std::invalid_argument("kernel spec has no terms");
  if (raw.size() != spec.param_count())
    throw std::invalid_argument("kernel parameter count mismatch");
  if (!raw.allFinite()) throw std::invalid_argument("non-finite kernel parameters");
}

Matrix sq_dist(const Matrix& a, const Matrix& b) {
  Matrix d2 = -2.0 * a * b.transpose();
  d2.colwise() += a.rowwise().squaredNorm();
  d2.rowwise() += b.rowwise().squaredNorm().transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

Matrix kernel_eval(const KernelSpec& spec, const Vector& raw, const Matrix& inputs_a,
                   const Matrix& inputs_b, bool same_inputs) {
  check_params(spec, raw);
  if (inputs_a.cols() != inputs_b.cols())
    throw std::invalid_argument("kernel inputs have different feature dimensions");
  Matrix k = Matrix::Zero(inputs_a.rows(), inputs_b.rows());
  int p = 0;
  if (spec.linear) {
    const double v = std::exp(raw[p++]);
    k.noalias() += v * inputs_a * inputs_b.transpose();
  }
  if (spec.squared_exponential) {
    const double amp = std::exp(raw[p++]);
    const double ell = std::exp(raw[p++]);
    k += (amp * amp) *
         (sq_dist(inputs_a, inputs_b) * (-0.5 / (ell * ell))).array().exp().matrix();
  }
  if (spec.diagonal && same_inputs) {
    if (inputs_a.rows() != inputs_b.rows())
      throw std::invalid_argument("same_inputs set but row counts differ");
    const double v = std::exp(raw[p]);
    k.diagonal().array() += v;
  }
  return k;
}

Matrix kernel_eval(const KernelSpec& spec, const Vector& raw, const Matrix& inputs) {
  return kernel_eval(spec, raw, inputs, inputs, true);
}

Matrix kernel_grad(const KernelSpec& spec, const Vector& raw, const Matrix& inputs,
                   int param_index) {
  check_params(spec, raw);
  if (param_index < 0 || param_index >= spec.param_count())
    throw std::invalid_argument("kernel_grad: parameter index out of range");
  const Eigen::Index n = inputs.rows();
  int p = 0;
  if (spec.linear) {
    if (param_index == p) return std::exp(raw[p]) * inputs * inputs.transpose();
    ++p;
  }
  if (spec.squared_exponential) {
    const double amp = std::exp(raw[p]);
    const double ell = std::exp(raw[p + 1]);
    const Matrix d2 = sq_dist(inputs, inputs);
    const Matrix se =
        (amp * amp) * (d2 * (-0.5 / (ell * ell))).array().exp().matrix();
    if (param_index == p) return 2.0 * se;
    if (param_index == p + 1) return se.cwiseProduct(d2 / (ell * ell));
    p += 2;
  }
  if (spec.diagonal && param_index == p)
    return std::exp(raw[p]) * Matrix::Identity(n, n);
  throw std::logic_error("kernel_grad: unreachable");
}

}  // namespace tgpr
