#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "orf/chunk_refine.hpp"
#include "orf/scenario.hpp"

using namespace orf;
using namespace orf::testutil;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CorrespondenceField ones_field(std::size_t F, std::size_t N) {
    Matrix sim(F, N);
    for (auto& v : sim.data) v = 1.0;
    return CorrespondenceField::from_parts(std::move(sim),
                                           std::vector<std::uint8_t>(F * N, 1));
}

} // namespace

TEST_CASE("block score: all-ones block averages to 1") {
    const auto field = ones_field(4, 6);
    CHECK(block_score(field, 0, 4, 0, 6) == doctest::Approx(1.0));
    CHECK(block_score(field, 1, 3, 2, 5) == doctest::Approx(1.0));
}

TEST_CASE("block score: zero-mask block is -inf") {
    Matrix sim(2, 3);
    for (auto& v : sim.data) v = 0.9;
    const auto field =
        CorrespondenceField::from_parts(std::move(sim), std::vector<std::uint8_t>(6, 0));
    CHECK(block_score(field, 0, 2, 0, 3) == -kInf);
}

TEST_CASE("block score: 2x3 worked example against a direct sum oracle") {
    // masked row sums 1.2 and 0.9 over 5 valid pairs -> 0.42
    Matrix sim(2, 3);
    sim.at(0, 0) = 0.5;
    sim.at(0, 1) = 0.4;
    sim.at(0, 2) = 0.3;
    sim.at(1, 0) = 0.6;
    sim.at(1, 1) = 0.3;
    sim.at(1, 2) = -0.8; // masked out below
    std::vector<std::uint8_t> mask{1, 1, 1, 1, 1, 0};
    const auto field = CorrespondenceField::from_parts(sim, mask);

    double direct_sum = 0.0, direct_count = 0.0;
    for (std::size_t f = 0; f < 2; ++f) {
        for (std::size_t t = 0; t < 3; ++t) {
            if (!mask[f * 3 + t]) continue;
            direct_sum += sim.at(f, t);
            direct_count += 1.0;
        }
    }
    CHECK(direct_count == 5.0);
    const double expected = direct_sum / direct_count;
    CHECK(expected == doctest::Approx(0.42));
    CHECK(block_score(field, 0, 2, 0, 3) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("block score rejects bad indices") {
    const auto field = ones_field(3, 4);
    CHECK_THROWS_AS(block_score(field, 2, 2, 0, 4), InvariantError);
    CHECK_THROWS_AS(block_score(field, 0, 4, 0, 4), InvariantError);
}

TEST_CASE("only feasible segmentation: one chunk covering everything") {
    Rng rng(71);
    Matrix sim(3, 90);
    for (auto& v : sim.data) v = rng.uniform(-1.0, 1.0);
    const auto field = CorrespondenceField::from_parts(std::move(sim),
                                                       std::vector<std::uint8_t>(270, 1));
    const HyperParams params; // sv=[3,5], sa=[90,140]
    DpTable table;
    const RefinedChunking dp = refine_chunks_dp(field, params, false, &table);
    REQUIRE(dp.chunks.size() == 1);
    CHECK(dp.chunks[0] == ChunkSpan{1, 3, 1, 90});
    CHECK(dp.score ==
          doctest::Approx(block_score(field, 0, 3, 0, 90) - params.lambda_c).epsilon(1e-12));
    CHECK(table.best_at(0, 0) == 0.0);
}

TEST_CASE("infeasible bounds report dimensions and ranges") {
    const auto field = ones_field(4, 7);
    HyperParams params;
    params.sv_min = params.sv_max = 3; // 4 frames cannot split into pieces of 3
    params.sa_min = 1;
    params.sa_max = 7;
    try {
        refine_chunks_dp(field, params, false);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("4 frames") != std::string::npos);
        CHECK(msg.find("7 audio tokens") != std::string::npos);
    }
}

TEST_CASE("brute force matches an independent segmentation counter") {
    const auto field = ones_field(4, 6);
    HyperParams params;
    params.sv_min = 1;
    params.sv_max = 2;
    params.sa_min = 1;
    params.sa_max = 3;
    std::size_t enumerated = 0;
    refine_chunks_bruteforce(field, params, &enumerated);
    CHECK(enumerated == count_joint_segmentations(4, 6, 1, 2, 1, 3));
    CHECK(enumerated > 0);
}

TEST_CASE("brute force size guard") {
    const auto field = ones_field(13, 8);
    HyperParams params;
    params.sv_min = params.sa_min = 1;
    params.sv_max = params.sa_max = 13;
    CHECK_THROWS_AS(refine_chunks_bruteforce(field, params), ConfigError);
}

TEST_CASE("dp equals brute force on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t F = static_cast<std::size_t>(rng.uniform_int(2, 8));
        const std::size_t N = static_cast<std::size_t>(rng.uniform_int(4, 24));
        HyperParams params = random_feasible_bounds(rng, F, N);
        params.lambda_c = rng.uniform(0.0, 0.1);
        auto field = trial % 3 == 0 ? random_masked_field(rng, F, N, 0.8)
                                    : random_field(rng, F, N);

        const RefinedChunking dp = refine_chunks_dp(field, params, false);
        const RefinedChunking oracle = refine_chunks_bruteforce(field, params);
        CHECK(dp.score == oracle.score); // exact: same fold over the same prefix sums
        CHECK(dp.chunks == oracle.chunks);

        // independent double-loop rescoring agrees within fp noise
        if (std::isfinite(dp.score)) {
            CHECK(direct_segmentation_score(dp, field, params.lambda_c) ==
                  doctest::Approx(dp.score).epsilon(1e-9));
        }
    }
}

TEST_CASE("dp equals brute force on tie-heavy constant fields") {
    // every block scores 1, so optima are decided purely by the tie-break
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng(900 + seed);
        const std::size_t F = static_cast<std::size_t>(rng.uniform_int(3, 7));
        const std::size_t N = static_cast<std::size_t>(rng.uniform_int(6, 18));
        HyperParams params = random_feasible_bounds(rng, F, N);
        params.lambda_c = 0.02;
        const auto field = ones_field(F, N);
        const RefinedChunking dp = refine_chunks_dp(field, params, false);
        const RefinedChunking oracle = refine_chunks_bruteforce(field, params);
        CHECK(dp.score == oracle.score);
        CHECK(dp.chunks == oracle.chunks);
    }
}

TEST_CASE("segmentation score arithmetic and structure errors") {
    Matrix sim(2, 2);
    for (auto& v : sim.data) v = 0.8;
    const auto field =
        CorrespondenceField::from_parts(std::move(sim), std::vector<std::uint8_t>(4, 1));

    RefinedChunking one;
    one.chunks = {ChunkSpan{1, 2, 1, 2}};
    CHECK(segmentation_score(one, field, 0.02) == doctest::Approx(0.78).epsilon(1e-12));

    RefinedChunking two;
    two.chunks = {ChunkSpan{1, 1, 1, 1}, ChunkSpan{2, 2, 2, 2}};
    CHECK_NOTHROW(segmentation_score(two, field, 0.02));

    // audio coverage gap: frames tile [1,2] but audio skips token 2
    RefinedChunking gap;
    gap.chunks = {ChunkSpan{1, 2, 1, 1}};
    CHECK_THROWS_AS(segmentation_score(gap, field, 0.02), InvariantError);
}

TEST_CASE("zero-evidence chunk makes the whole segmentation -inf") {
    Matrix sim(2, 2);
    for (auto& v : sim.data) v = 0.5;
    std::vector<std::uint8_t> mask{1, 1, 0, 0}; // frame 2 has no evidence
    const auto field = CorrespondenceField::from_parts(std::move(sim), std::move(mask));
    RefinedChunking two;
    two.chunks = {ChunkSpan{1, 1, 1, 1}, ChunkSpan{2, 2, 2, 2}};
    CHECK(segmentation_score(two, field, 0.02) == -kInf);
}

TEST_CASE("dp dominates the native chunking whenever it is feasible") {
    Rng rng(31);
    HyperParams params;
    params.sv_min = 2;
    params.sv_max = 4;
    params.sa_min = 6;
    params.sa_max = 12;
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioSpec spec;
        spec.num_frames = 6 + 2 * static_cast<std::size_t>(rng.uniform_int(0, 3));
        spec.grid_h = 2;
        spec.grid_w = 2;
        spec.num_audio_tokens = spec.num_frames * 3;
        spec.dim = 8;
        spec.num_events = 2;
        spec.boundary_jitter = 1;
        spec.noise_sigma = 0.4;
        spec.seed = 5000 + static_cast<std::uint64_t>(trial);
        const GeneratedScenario s = generate_scenario(spec, params);

        const auto field = build_field(s.video, s.audio);
        const RefinedChunking dp = refine_chunks_dp(field, params, false);
        const RefinedChunking native = native_chunking(s.video, s.audio);
        CHECK(segmentation_score(dp, field, params.lambda_c) >=
              segmentation_score(native, field, params.lambda_c));
    }
}

TEST_CASE("chunk count is non-increasing in lambda_c") {
    Rng rng(57);
    const auto field = random_field(rng, 8, 20);
    HyperParams params;
    params.sv_min = 1;
    params.sv_max = 4;
    params.sa_min = 1;
    params.sa_max = 10;

    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double lambda : {0.0, 0.005, 0.02, 0.1, 0.5, 2.0}) {
        params.lambda_c = lambda;
        const RefinedChunking dp = refine_chunks_dp(field, params, false);
        CHECK(dp.chunks.size() <= prev);
        prev = dp.chunks.size();
    }
}

TEST_CASE("banded dp matches unbanded when the optimal path is in-band") {
    Rng rng(88);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t F = static_cast<std::size_t>(rng.uniform_int(3, 8));
        const std::size_t N = static_cast<std::size_t>(rng.uniform_int(6, 24));
        HyperParams params = random_feasible_bounds(rng, F, N);
        params.dp_band_ratio = 2.0;
        params.dp_min_window = std::max<int>(1, static_cast<int>(N / 8));
        const auto field = random_field(rng, F, N);

        const RefinedChunking unbanded = refine_chunks_dp(field, params, false);
        const bool path_in_band =
            std::all_of(unbanded.chunks.begin(), unbanded.chunks.end(), [&](const ChunkSpan& c) {
                return in_band(c.f_hi, c.t_hi, F, N, params);
            });
        const RefinedChunking banded = refine_chunks_dp(field, params, true);
        if (path_in_band) {
            CHECK(banded.score == unbanded.score);
            CHECK(banded.chunks == unbanded.chunks);
        } else {
            CHECK(banded.score <= unbanded.score);
        }
    }
}

TEST_CASE("banded dp prunes out-of-band states") {
    const auto field = ones_field(8, 24);
    HyperParams params;
    params.sv_min = 1;
    params.sv_max = 2;
    params.sa_min = 1;
    params.sa_max = 6;
    params.dp_band_ratio = 1.0;
    params.dp_min_window = 1;

    DpTable table;
    refine_chunks_dp(field, params, true, &table);
    bool pruned_any = false;
    for (std::size_t u = 1; u <= 8; ++u) {
        for (std::size_t q = 1; q <= 24; ++q) {
            if (!in_band(u, q, 8, 24, params)) {
                CHECK(!table.reached(u, q));
                pruned_any = true;
            }
        }
    }
    CHECK(pruned_any);
}

TEST_CASE("noiseless jittered events: refined boundaries sit on the ground truth") {
    HyperParams params;
    params.sv_min = 1;
    params.sv_max = 4;
    params.sa_min = 1;
    params.sa_max = 8;
    params.lambda_c = 0.02;

    ScenarioSpec spec;
    spec.num_frames = 8;
    spec.grid_h = spec.grid_w = 2;
    spec.num_audio_tokens = 16;
    spec.dim = 8;
    spec.num_events = 2;
    spec.boundary_jitter = 1;
    spec.noise_sigma = 0.0;
    spec.seed = 77;

    const GeneratedScenario s = generate_scenario(spec, params);
    const auto field = build_field(s.video, s.audio);
    const RefinedChunking dp = refine_chunks_dp(field, params, false);

    // the joint ground-truth boundary appears among the chunk ends
    const std::size_t vb = s.truth.video_starts[1];
    const std::size_t ab = s.truth.audio_starts[1];
    const bool found = std::any_of(dp.chunks.begin(), dp.chunks.end(), [&](const ChunkSpan& c) {
        return c.f_hi == vb && c.t_hi == ab;
    });
    CHECK(found);

    // ... and not only the native boundary when they differ
    const RefinedChunking native = native_chunking(s.video, s.audio);
    CHECK(segmentation_score(dp, field, params.lambda_c) >=
          segmentation_score(native, field, params.lambda_c));

    // exhaustive confirmation that this is the true optimum
    const RefinedChunking oracle = refine_chunks_bruteforce(field, params);
    CHECK(dp.score == oracle.score);
    CHECK(dp.chunks == oracle.chunks);
}

TEST_CASE("chunking json export carries the schema fields") {
    const auto field = ones_field(3, 6);
    HyperParams params;
    params.sv_min = 1;
    params.sv_max = 3;
    params.sa_min = 1;
    params.sa_max = 6;
    const RefinedChunking dp = refine_chunks_dp(field, params, false);
    const std::string text = chunking_to_json(dp, field, params, false);
    for (const char* key : {"\"chunks\"", "\"score\"", "\"lambda_c\"", "\"banded\"",
                            "\"band_width\"", "\"phi\""}) {
        CHECK(text.find(key) != std::string::npos);
    }
}
