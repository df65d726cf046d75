#pragma once

#include <json.hpp>

#include "orf/metrics.hpp"
#include "orf/types.hpp"

namespace orf {

nlohmann::json hyperparams_to_json(const HyperParams& p);

// Starts from defaults and overlays the keys present in `j`.
// Unknown keys raise ConfigError.
HyperParams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json ground_truth_to_json(const GroundTruthBoundaries& g);
GroundTruthBoundaries ground_truth_from_json(const nlohmann::json& j);

// Same overlay-on-defaults convention as hyperparams.
CostModel cost_model_from_json(const nlohmann::json& j);

} // namespace orf
