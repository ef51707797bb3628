#pragma once

#include <string>

#include "tgpr/model.hpp"

namespace tgpr {

// Fitted-model container: magic "TGM1", uint32 version, uint64 JSON length +
// config JSON, uint32 block count, then named blocks (uint32 name length,
// name bytes, dtf-encoded tensor). Matrices travel as order-2 tensors.
void save_model(const std::string& path, const FittedModel& model);

/// Loads and rebuilds the cache; the returned model is ready for prediction.
FittedModel load_model(const std::string& path);

}  // namespace tgpr
