#include "orf/metrics.hpp"

#include "orf/errors.hpp"

namespace orf {

void CostModel::validate() const {
    if (c_quad < 0.0 || c_lin < 0.0 || preprocess_cost < 0.0 || decode_cost_per_turn < 0.0) {
        throw ConfigError("cost model: coefficients must be >= 0");
    }
    if (c_quad + c_lin <= 0.0) {
        throw ConfigError("cost model: c_quad + c_lin must be > 0");
    }
}

double prefill_cost(const CostModel& model, double n_tokens) {
    return model.c_lin * n_tokens + model.c_quad * n_tokens * n_tokens;
}

double flops_proxy(std::size_t n_before, std::size_t n_after, const CostModel& model) {
    model.validate();
    if (n_after == 0 || n_after > n_before) {
        throw InvariantError("flops_proxy: requires 0 < n_after <= n_before");
    }
    const double denom = prefill_cost(model, static_cast<double>(n_before));
    if (denom <= 0.0) throw ConfigError("flops_proxy: zero denominator");
    return prefill_cost(model, static_cast<double>(n_after)) / denom;
}

double kv_reuse_amortized(std::size_t k, const CostModel& model, std::size_t n_after) {
    model.validate();
    if (k < 1) throw InvariantError("kv_reuse_amortized: k must be >= 1");
    const double once =
        model.preprocess_cost + prefill_cost(model, static_cast<double>(n_after));
    return (once + static_cast<double>(k) * model.decode_cost_per_turn) /
           static_cast<double>(k);
}

double no_reuse_per_turn(const CostModel& model, std::size_t n_after) {
    model.validate();
    return model.preprocess_cost + prefill_cost(model, static_cast<double>(n_after)) +
           model.decode_cost_per_turn;
}

} // namespace orf
