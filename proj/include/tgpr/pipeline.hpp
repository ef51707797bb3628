#pragma once

#include "tgpr/config.hpp"
#include "tgpr/model.hpp"
#include "tgpr/st_gpr.hpp"

namespace tgpr {

struct PipelineOutputs {
  double auc_model = 0.0;
  double auc_baseline = 0.0;
  double ks_calibration = 0.0;  // KS distance of pooled held-out deviations
  std::size_t ks_samples = 0;
};

/// Deviation maps for a held-out split under a fitted model: prediction is
/// fixed effect plus posterior mean, the denominator the predictive plus
/// structured noise variance.
DenseTensor snpm_for(const FittedModel& model, const Dataset& subjects,
                     std::size_t batch_size);

/// One synth -> fit -> calibrate -> score pass; optionally fits the
/// per-output GP baseline on the same splits.
PipelineOutputs run_pipeline(const RunConfig& cfg, std::uint64_t seed,
                             bool with_baseline);

}  // namespace tgpr
