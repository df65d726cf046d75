#include "orf/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "orf/json_io.hpp"

namespace orf {

using nlohmann::json;

SweepGrid SweepGrid::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep grid: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("sweep grid: expected an object of axes");
    SweepGrid grid;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_array() || value.empty()) {
            throw ConfigError("sweep grid axis '" + key + "': expected a non-empty array");
        }
        std::vector<double> values;
        for (const auto& v : value) {
            if (!v.is_number()) {
                throw ConfigError("sweep grid axis '" + key + "': values must be numbers");
            }
            values.push_back(v.get<double>());
        }
        grid.axes.emplace_back(key, std::move(values));
    }
    std::sort(grid.axes.begin(), grid.axes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return grid;
}

void apply_param_override(HyperParams& params, const std::string& name, double value) {
    if (name == "rho_a") params.rho_a = value;
    else if (name == "rho_v") params.rho_v = value;
    else if (name == "tau_s") params.tau_s = value;
    else if (name == "tau_t") params.tau_t = value;
    else if (name == "beta") params.beta = value;
    else if (name == "lambda_c") params.lambda_c = value;
    else if (name == "theta_anchor") params.theta_anchor = value;
    else if (name == "contextual_ratio") params.contextual_ratio = value;
    else if (name == "v_min") params.v_min = value;
    else if (name == "v_max") params.v_max = value;
    else if (name == "a_min") params.a_min = value;
    else if (name == "a_max") params.a_max = value;
    else if (name == "alpha") params.alpha = value;
    else if (name == "group_size") params.group_size = static_cast<int>(std::llround(value));
    else if (name == "sa_min") params.sa_min = static_cast<int>(std::llround(value));
    else if (name == "sa_max") params.sa_max = static_cast<int>(std::llround(value));
    else if (name == "sv_min") params.sv_min = static_cast<int>(std::llround(value));
    else if (name == "sv_max") params.sv_max = static_cast<int>(std::llround(value));
    else if (name == "dp_band_ratio") params.dp_band_ratio = value;
    else if (name == "dp_min_window") params.dp_min_window = static_cast<int>(std::llround(value));
    else throw ConfigError("sweep: unknown parameter '" + name + "'");
}

namespace {

// Overall retention is non-decreasing in rho_v (through the audio budget),
// so bisection brackets the target. Retention is a step function of rho_v;
// convergence means landing within the tolerance, not exact equality.
double tune_rho_v(const VideoStream& video, const AudioStream& audio, HyperParams params,
                  double target, bool banded, const CostModel& cost, double* achieved_out) {
    constexpr double kTol = 0.01;
    constexpr int kMaxIter = 40;

    const auto ratio_at = [&](double rho_v) {
        params.rho_v = rho_v;
        return run_pipeline(video, audio, params, banded, cost)
            .report.overall_retained_ratio;
    };

    std::vector<std::pair<double, double>> tried;
    double lo = 0.0, hi = 1.0;
    double lo_ratio = ratio_at(lo);
    tried.emplace_back(lo, lo_ratio);
    if (std::abs(lo_ratio - target) <= kTol) {
        *achieved_out = lo_ratio;
        return lo;
    }
    double hi_ratio = ratio_at(hi);
    tried.emplace_back(hi, hi_ratio);
    if (std::abs(hi_ratio - target) <= kTol) {
        *achieved_out = hi_ratio;
        return hi;
    }

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double mid_ratio = ratio_at(mid);
        tried.emplace_back(mid, mid_ratio);
        if (std::abs(mid_ratio - target) <= kTol) {
            *achieved_out = mid_ratio;
            return mid;
        }
        if (mid_ratio < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    std::ostringstream msg;
    msg << "constant-budget tuning did not reach target " << target << " within +/-" << kTol
        << " after " << kMaxIter << " iterations; achieved ratios:";
    for (const auto& [rho, r] : tried) {
        msg << " rho_v=" << rho << "->" << r;
    }
    throw ConfigError(msg.str());
}

} // namespace

std::vector<SweepRow> sweep(const VideoStream& video, const AudioStream& audio,
                            const HyperParams& base, const SweepGrid& grid,
                            std::optional<double> constant_budget, bool banded,
                            const CostModel& cost) {
    std::vector<std::size_t> odometer(grid.axes.size(), 0);
    std::vector<SweepRow> rows;

    bool done = false;
    while (!done) {
        SweepRow row;
        HyperParams params = base;
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            const auto& [name, values] = grid.axes[a];
            apply_param_override(params, name, values[odometer[a]]);
            row.overrides[name] = values[odometer[a]];
        }
        params.validate();

        if (constant_budget) {
            double achieved = 0.0;
            row.rho_v_tuned =
                tune_rho_v(video, audio, params, *constant_budget, banded, cost, &achieved);
            params.rho_v = row.rho_v_tuned;
        }
        PipelineResult result = run_pipeline(video, audio, params, banded, cost);
        row.achieved_ratio = result.report.overall_retained_ratio;
        row.report = std::move(result.report);
        rows.push_back(std::move(row));

        // odometer step over the sorted axes
        done = true;
        for (std::size_t a = grid.axes.size(); a-- > 0;) {
            if (++odometer[a] < grid.axes[a].second.size()) {
                done = false;
                break;
            }
            odometer[a] = 0;
        }
        if (grid.axes.empty()) break;
    }
    return rows;
}

std::string sweep_rows_to_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        json overrides = json::object();
        for (const auto& [k, v] : row.overrides) overrides[k] = v;
        out.push_back({
            {"overrides", overrides},
            {"rho_v_tuned", row.rho_v_tuned},
            {"achieved_ratio", row.achieved_ratio},
            {"report", json::parse(report_to_json(row.report))},
        });
    }
    return out.dump(2);
}

} // namespace orf
