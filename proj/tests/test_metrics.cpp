#include <doctest.h>

#include <cmath>
#include <limits>

#include "orf/metrics.hpp"
#include "orf/errors.hpp"
#include "orf/rng.hpp"

using namespace orf;

TEST_CASE("flops proxy identities") {
    const CostModel model; // quad + linear defaults
    CHECK(flops_proxy(1000, 1000, model) == 1.0);

    CostModel quad;
    quad.c_quad = 1.0;
    quad.c_lin = 0.0;
    CHECK(flops_proxy(1000, 500, quad) == doctest::Approx(0.25).epsilon(1e-12));

    CostModel lin;
    lin.c_quad = 0.0;
    lin.c_lin = 3.0;
    CHECK(flops_proxy(10000, 4400, lin) == doctest::Approx(0.44).epsilon(1e-12));
}

TEST_CASE("flops proxy preconditions") {
    const CostModel model;
    CHECK_THROWS_AS(flops_proxy(10, 0, model), InvariantError);
    CHECK_THROWS_AS(flops_proxy(10, 11, model), InvariantError);
    CostModel zero;
    zero.c_quad = 0.0;
    zero.c_lin = 0.0;
    CHECK_THROWS_AS(flops_proxy(10, 5, zero), ConfigError);
}

TEST_CASE("flops proxy is strictly increasing in n_after") {
    Rng rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        CostModel model;
        model.c_quad = rng.uniform(0.0, 2.0);
        model.c_lin = rng.uniform(0.0, 4096.0);
        if (model.c_quad + model.c_lin <= 0.0) model.c_lin = 1.0;
        const std::size_t n_before = 1000;
        double prev = -1.0;
        for (std::size_t n_after = 100; n_after <= 1000; n_after += 100) {
            const double ratio = flops_proxy(n_before, n_after, model);
            CHECK(ratio > prev);
            prev = ratio;
        }
        CHECK(prev == 1.0);
    }
}

TEST_CASE("kv reuse amortization") {
    CostModel model;
    model.c_quad = 1.0;
    model.c_lin = 100.0;
    model.preprocess_cost = 5000.0;
    model.decode_cost_per_turn = 250.0;
    const std::size_t n = 400;

    SUBCASE("single turn pays the full cost") {
        const double expected = 5000.0 + (100.0 * 400 + 400.0 * 400) + 250.0;
        CHECK(kv_reuse_amortized(1, model, n) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("limit is the per-turn decode cost") {
        const double at_million = kv_reuse_amortized(1000000, model, n);
        CHECK(std::abs(at_million - model.decode_cost_per_turn) / model.decode_cost_per_turn <
              0.001);
    }

    SUBCASE("amortized cost is non-increasing and beats no-reuse for every k") {
        double prev = std::numeric_limits<double>::infinity();
        const double no_reuse = no_reuse_per_turn(model, n);
        for (std::size_t k = 1; k <= 64; ++k) {
            const double cost = kv_reuse_amortized(k, model, n);
            CHECK(cost <= prev);
            CHECK(cost <= no_reuse + 1e-12);
            CHECK(cost >= model.decode_cost_per_turn);
            prev = cost;
        }
    }

    SUBCASE("k must be positive") {
        CHECK_THROWS_AS(kv_reuse_amortized(0, model, n), InvariantError);
    }
}
