#pragma once

#include "tgpr/model.hpp"

namespace tgpr {

struct StGprOptions {
  KernelSpec kernel = full_composite_spec(KernelInput::feature_rows);
  OptimizerSettings optimizer;
};

struct StGprResult {
  DenseTensor mean;      // N* x T_1 x ... x T_D
  DenseTensor variance;  // predictive variance including the noise term
  Matrix raw_params;     // (kernel params + noise) x T, post optimization
  std::vector<char> failed;  // per-output optimizer failure flags
  std::size_t param_count = 0;  // (kernel params + 1 noise param) per output
};

/// Mass-univariate baseline: an independent GP per output with the composite
/// kernel plus one noise variance, each optimized separately by marginal
/// likelihood. Outputs whose optimizer throws keep their initial parameters
/// and are flagged rather than aborting the sweep.
StGprResult st_gpr_fit_predict(const Dataset& d, const Matrix& x_star,
                               const StGprOptions& opts);

}  // namespace tgpr
