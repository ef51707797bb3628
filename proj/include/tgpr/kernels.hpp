#pragma once

#include <string>

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

enum class KernelInput { feature_rows, integer_index };

/// Composite covariance function: any subset of a linear term, a squared
/// exponential term, and a diagonal isotropic term. Parameters are stored as
/// unconstrained reals and exponentiated, in term order:
///   linear variance | se amplitude, se lengthscale | diagonal variance.
struct KernelSpec {
  bool linear = false;
  bool squared_exponential = false;
  bool diagonal = false;
  KernelInput input = KernelInput::feature_rows;

  int param_count() const {
    return (linear ? 1 : 0) + (squared_exponential ? 2 : 0) + (diagonal ? 1 : 0);
  }
  bool any_term() const { return linear || squared_exponential || diagonal; }
};

KernelSpec full_composite_spec(KernelInput input);   // linear + se + diagonal
KernelSpec diagonal_spec(KernelInput input);

std::string kernel_spec_to_string(const KernelSpec& spec);
KernelSpec kernel_spec_from_string(const std::string& s, KernelInput input);

/// Column of index coordinates 1..n, the input space of the latent kernels.
Matrix index_inputs(int n);

/// K(A, B). The diagonal term contributes only when `same_inputs` is set,
/// i.e. both arguments are the same input set.
Matrix kernel_eval(const KernelSpec& spec, const Vector& raw, const Matrix& inputs_a,
                   const Matrix& inputs_b, bool same_inputs);

/// Symmetric K(X, X) including the diagonal term.
Matrix kernel_eval(const KernelSpec& spec, const Vector& raw, const Matrix& inputs);

/// dK(X, X)/d raw[param_index], chain rule through the exp transform included.
Matrix kernel_grad(const KernelSpec& spec, const Vector& raw, const Matrix& inputs,
                   int param_index);

}  // namespace tgpr
