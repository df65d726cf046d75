#include "orf/json_io.hpp"

namespace orf {

using nlohmann::json;

json hyperparams_to_json(const HyperParams& p) {
    return json{
        {"rho_a", p.rho_a},
        {"rho_v", p.rho_v},
        {"tau_s", p.tau_s},
        {"tau_t", p.tau_t},
        {"beta", p.beta},
        {"lambda_c", p.lambda_c},
        {"theta_anchor", p.theta_anchor},
        {"contextual_ratio", p.contextual_ratio},
        {"v_min", p.v_min},
        {"v_max", p.v_max},
        {"a_min", p.a_min},
        {"a_max", p.a_max},
        {"alpha", p.alpha},
        {"group_size", p.group_size},
        {"sa_min", p.sa_min},
        {"sa_max", p.sa_max},
        {"sv_min", p.sv_min},
        {"sv_max", p.sv_max},
        {"dp_band_ratio", p.dp_band_ratio},
        {"dp_min_window", p.dp_min_window},
        {"one_sided_boundary", p.one_sided_boundary},
        {"alpha_modulation", p.alpha_modulation},
    };
}

HyperParams hyperparams_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("hyperparams: expected a JSON object");
    HyperParams p;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "rho_a") p.rho_a = value.get<double>();
            else if (key == "rho_v") p.rho_v = value.get<double>();
            else if (key == "tau_s") p.tau_s = value.get<double>();
            else if (key == "tau_t") p.tau_t = value.get<double>();
            else if (key == "beta") p.beta = value.get<double>();
            else if (key == "lambda_c") p.lambda_c = value.get<double>();
            else if (key == "theta_anchor") p.theta_anchor = value.get<double>();
            else if (key == "contextual_ratio") p.contextual_ratio = value.get<double>();
            else if (key == "v_min") p.v_min = value.get<double>();
            else if (key == "v_max") p.v_max = value.get<double>();
            else if (key == "a_min") p.a_min = value.get<double>();
            else if (key == "a_max") p.a_max = value.get<double>();
            else if (key == "alpha") p.alpha = value.get<double>();
            else if (key == "group_size") p.group_size = value.get<int>();
            else if (key == "sa_min") p.sa_min = value.get<int>();
            else if (key == "sa_max") p.sa_max = value.get<int>();
            else if (key == "sv_min") p.sv_min = value.get<int>();
            else if (key == "sv_max") p.sv_max = value.get<int>();
            else if (key == "dp_band_ratio") p.dp_band_ratio = value.get<double>();
            else if (key == "dp_min_window") p.dp_min_window = value.get<int>();
            else if (key == "one_sided_boundary") p.one_sided_boundary = value.get<bool>();
            else if (key == "alpha_modulation") p.alpha_modulation = value.get<bool>();
            else throw ConfigError("hyperparams: unknown key '" + key + "'");
        } catch (const json::exception&) {
            throw ConfigError("hyperparams." + key + ": wrong value type");
        }
    }
    p.validate();
    return p;
}

json ground_truth_to_json(const GroundTruthBoundaries& g) {
    return json{
        {"num_events", g.num_events},
        {"video_starts", g.video_starts},
        {"audio_starts", g.audio_starts},
    };
}

GroundTruthBoundaries ground_truth_from_json(const json& j) {
    GroundTruthBoundaries g;
    try {
        g.num_events = j.at("num_events").get<int>();
        g.video_starts = j.at("video_starts").get<std::vector<std::size_t>>();
        g.audio_starts = j.at("audio_starts").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("ground_truth_boundaries: ") + e.what());
    }
    return g;
}

CostModel cost_model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("cost model: expected a JSON object");
    CostModel m;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "c_quad") m.c_quad = value.get<double>();
            else if (key == "c_lin") m.c_lin = value.get<double>();
            else if (key == "preprocess_cost") m.preprocess_cost = value.get<double>();
            else if (key == "decode_cost_per_turn") m.decode_cost_per_turn = value.get<double>();
            else throw ConfigError("cost model: unknown key '" + key + "'");
        } catch (const json::exception&) {
            throw ConfigError("cost model." + key + ": wrong value type");
        }
    }
    m.validate();
    return m;
}

} // namespace orf
