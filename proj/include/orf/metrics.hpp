#pragma once

#include <cstddef>

namespace orf {

// Inference cost proxy: quadratic attention term plus linear per-token work,
// with fixed preprocessing and per-turn decode costs for the multi-turn
// model. Units are arbitrary; only ratios are reported.
struct CostModel {
    double c_quad = 1.0;
    double c_lin = 8192.0;
    double preprocess_cost = 0.0;
    double decode_cost_per_turn = 0.0;

    void validate() const;
};

double prefill_cost(const CostModel& model, double n_tokens);

// (c_lin*n_after + c_quad*n_after^2) / (c_lin*n_before + c_quad*n_before^2);
// requires 0 < n_after <= n_before.
double flops_proxy(std::size_t n_before, std::size_t n_after, const CostModel& model);

// Per-turn cost over k turns when the compressed context is prefilled once
// and its KV cache reused: (preprocess + prefill(n_after) + k*decode) / k.
double kv_reuse_amortized(std::size_t k, const CostModel& model, std::size_t n_after);

// Per-turn cost when the context is reprocessed every turn.
double no_reuse_per_turn(const CostModel& model, std::size_t n_after);

} // namespace orf
