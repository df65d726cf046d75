#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orf/pipeline.hpp"

namespace orf {

// Parameter grid: named axes with candidate values, expanded as a cartesian
// product in sorted-name odometer order.
struct SweepGrid {
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    static SweepGrid from_json_text(const std::string& text);
};

struct SweepRow {
    std::map<std::string, double> overrides;
    double rho_v_tuned = -1.0; // -1 when constant-budget mode is off
    double achieved_ratio = 0.0;
    CompressionReport report;
};

// One pipeline run per grid point. With constant_budget set, rho_v is
// bisection-tuned per point until the overall retained ratio lands within
// +/-0.01 of the target (<= 40 iterations, else ConfigError listing the
// achieved ratios).
std::vector<SweepRow> sweep(const VideoStream& video, const AudioStream& audio,
                            const HyperParams& base, const SweepGrid& grid,
                            std::optional<double> constant_budget, bool banded,
                            const CostModel& cost = CostModel{});

std::string sweep_rows_to_json(const std::vector<SweepRow>& rows);

// Applies a named override to a parameter set; unknown names raise
// ConfigError.
void apply_param_override(HyperParams& params, const std::string& name, double value);

} // namespace orf
