#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "orf/correspondence.hpp"
#include "orf/rng.hpp"
#include "orf/video_compress.hpp"

using namespace orf;

namespace {

// num_frames x grid of dim-vectors from a generator callback
VideoStream make_video(std::size_t frames, std::size_t h, std::size_t w, std::size_t dim,
                       const std::function<void(std::size_t f, std::size_t r, std::size_t c,
                                                std::span<float>)>& fill) {
    VideoStream v;
    v.num_frames = frames;
    v.grid_h = h;
    v.grid_w = w;
    v.tokens = EmbeddingMatrix(frames * h * w, dim);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                fill(f, r, c, v.tokens.row(f * h * w + r * w + c));
            }
        }
    }
    v.frame_bucket.assign(frames, 0);
    return v;
}

VideoStream constant_video(std::size_t frames, std::size_t h, std::size_t w,
                           std::size_t dim, float value = 1.0f) {
    return make_video(frames, h, w, dim, [&](std::size_t, std::size_t, std::size_t,
                                             std::span<float> row) {
        for (auto& x : row) x = value;
    });
}

VideoStream random_video(Rng& rng, std::size_t frames, std::size_t h, std::size_t w,
                         std::size_t dim) {
    return make_video(frames, h, w, dim,
                      [&](std::size_t, std::size_t, std::size_t, std::span<float> row) {
                          for (auto& x : row) x = static_cast<float>(rng.uniform(-1.0, 1.0));
                      });
}

std::span<const float> frame_span(const VideoStream& v, std::size_t f) {
    const std::size_t p = v.patches_per_frame();
    return {v.tokens.values.data() + f * p * v.tokens.dim, p * v.tokens.dim};
}

} // namespace

TEST_CASE("hierarchy: 1x1 grid is a single node") {
    const VideoStream v = constant_video(1, 1, 1, 3);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 1, 1, 3);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].level == 0);
    CHECK(tree.nodes[0].weight == 1);
    CHECK(tree.is_leaf(0));
}

TEST_CASE("hierarchy: 4x4 grid structure") {
    const VideoStream v = constant_video(1, 4, 4, 2);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 4, 4, 2);
    // root + 4 children + 16 leaves
    REQUIRE(tree.nodes.size() == 21);
    CHECK(tree.nodes[0].weight == 16);
    CHECK(tree.nodes[0].num_children == 4);
    for (int c = 0; c < 4; ++c) {
        const auto& child = tree.nodes[tree.nodes[0].child[static_cast<std::size_t>(c)]];
        CHECK(child.weight == 4);
        CHECK(child.rect.height() == 2);
        CHECK(child.rect.width() == 2);
        CHECK(child.level == 1);
    }
    std::size_t leaves = 0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.is_leaf(static_cast<int>(i))) {
            ++leaves;
            CHECK(tree.nodes[i].weight == 1);
        }
    }
    CHECK(leaves == 16);
}

TEST_CASE("hierarchy: 3x3 grid splits ceil/floor") {
    const VideoStream v = constant_video(1, 3, 3, 2);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 3, 3, 2);
    const auto& root = tree.nodes[0];
    REQUIRE(root.num_children == 4);
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    std::vector<std::size_t> weights;
    for (int c = 0; c < 4; ++c) {
        const auto& child = tree.nodes[root.child[static_cast<std::size_t>(c)]];
        shapes.emplace_back(child.rect.height(), child.rect.width());
        weights.push_back(child.weight);
    }
    CHECK(shapes == std::vector<std::pair<std::size_t, std::size_t>>{
                        {2, 2}, {2, 1}, {1, 2}, {1, 1}});
    CHECK(weights == std::vector<std::size_t>{4, 2, 2, 1});
}

TEST_CASE("hierarchy: extent-1 dimension yields two children") {
    const VideoStream v = constant_video(1, 1, 4, 2);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 1, 4, 2);
    CHECK(tree.nodes[0].num_children == 2);
}

TEST_CASE("hierarchy rejects an empty grid") {
    CHECK_THROWS_AS(build_hierarchy(std::span<const float>{}, 0, 4, 2), ConfigError);
}

TEST_CASE("spatial selection: constant frame keeps the root only") {
    const VideoStream v = constant_video(1, 8, 8, 4);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 8, 8, 4);
    const auto selected = spatial_select(tree, 0.82);
    REQUIRE(selected.size() == 1);
    CHECK(selected[0] == 0);
}

TEST_CASE("spatial selection: four orthogonal quadrants stop at level 1") {
    // quadrant latents e0..e3: root-child cosine is 0.5, inside quadrants 1
    const std::size_t dim = 4;
    const VideoStream v = make_video(1, 8, 8, dim,
                                     [&](std::size_t, std::size_t r, std::size_t c,
                                         std::span<float> row) {
                                         const std::size_t quadrant = (r / 4) * 2 + (c / 4);
                                         for (auto& x : row) x = 0.0f;
                                         row[quadrant] = 1.0f;
                                     });
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 8, 8, dim);
    const double root_child = cosine(std::span<const double>(tree.nodes[0].rep),
                                     std::span<const double>(
                                         tree.nodes[tree.nodes[0].child[0]].rep));
    CHECK(root_child == doctest::Approx(0.5).epsilon(1e-9));

    const auto selected = spatial_select(tree, 0.82);
    REQUIRE(selected.size() == 4);
    for (int id : selected) {
        CHECK(tree.nodes[id].level == 1);
        CHECK(tree.nodes[id].weight == 16);
    }
}

TEST_CASE("spatial selection: orthonormal checkerboard keeps every leaf") {
    const std::size_t dim = 16;
    const VideoStream v = make_video(1, 4, 4, dim,
                                     [&](std::size_t, std::size_t r, std::size_t c,
                                         std::span<float> row) {
                                         for (auto& x : row) x = 0.0f;
                                         row[r * 4 + c] = 1.0f;
                                     });
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 4, 4, dim);
    const auto selected = spatial_select(tree, 0.82);
    CHECK(selected.size() == 16);
    for (int id : selected) CHECK(tree.is_leaf(id));
}

TEST_CASE("spatial selection always tiles the frame") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t h = static_cast<std::size_t>(rng.uniform_int(1, 7));
        const std::size_t w = static_cast<std::size_t>(rng.uniform_int(1, 7));
        const VideoStream v = random_video(rng, 1, h, w, 4);
        const QuadTree tree = build_hierarchy(frame_span(v, 0), h, w, 4);
        const double tau = rng.uniform(0.0, 1.0);
        const auto selected = spatial_select(tree, tau);

        std::vector<int> covered(h * w, 0);
        for (int id : selected) {
            const Rect& rect = tree.nodes[id].rect;
            for (std::size_t r = rect.row_lo; r <= rect.row_hi; ++r) {
                for (std::size_t c = rect.col_lo; c <= rect.col_hi; ++c) {
                    covered[r * w + c] += 1;
                }
            }
        }
        CHECK(std::all_of(covered.begin(), covered.end(), [](int x) { return x == 1; }));
    }
}

TEST_CASE("spatial selection count is monotone in tau_s") {
    Rng rng(11);
    const VideoStream v = random_video(rng, 1, 6, 6, 4);
    const QuadTree tree = build_hierarchy(frame_span(v, 0), 6, 6, 4);
    std::size_t prev = 0;
    for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95, 1.0}) {
        const std::size_t count = spatial_select(tree, tau).size();
        CHECK(count >= prev);
        prev = count;
    }
}

TEST_CASE("temporal merge: identical frames collapse into frame one") {
    const VideoStream v = constant_video(2, 2, 2, 3, 0.7f);
    std::vector<QuadTree> trees{build_hierarchy(frame_span(v, 0), 2, 2, 3),
                                build_hierarchy(frame_span(v, 1), 2, 2, 3)};
    std::vector<std::vector<int>> selected{spatial_select(trees[0], 0.82),
                                           spatial_select(trees[1], 0.82)};
    const auto merged = temporal_merge(trees, selected, 0.58);
    REQUIRE(merged.survivors.size() == 1);
    CHECK(merged.merges.size() == 1);
    CHECK(merged.survivors[0].acc_weight == 8);
    CHECK(merged.survivors[0].own_weight == 4);
    // mean of equal vectors: representative unchanged
    for (double x : merged.survivors[0].rep) CHECK(x == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("temporal merge: orthogonal frames never merge") {
    const std::size_t dim = 2;
    const VideoStream v = make_video(2, 2, 2, dim,
                                     [&](std::size_t f, std::size_t, std::size_t,
                                         std::span<float> row) {
                                         row[0] = f == 0 ? 1.0f : 0.0f;
                                         row[1] = f == 0 ? 0.0f : 1.0f;
                                     });
    std::vector<QuadTree> trees{build_hierarchy(frame_span(v, 0), 2, 2, dim),
                                build_hierarchy(frame_span(v, 1), 2, 2, dim)};
    std::vector<std::vector<int>> selected{spatial_select(trees[0], 0.82),
                                           spatial_select(trees[1], 0.82)};
    const auto merged = temporal_merge(trees, selected, 0.58);
    CHECK(merged.survivors.size() == 2);
    CHECK(merged.merges.empty());
}

TEST_CASE("temporal merge: weighted mean of (4, 4) nodes") {
    const std::size_t dim = 2;
    // frame 0 constant u = (1, 0.2); frame 1 constant v = (0.8, 0.4); cosine well above 0.58
    const VideoStream v = make_video(2, 2, 2, dim,
                                     [&](std::size_t f, std::size_t, std::size_t,
                                         std::span<float> row) {
                                         row[0] = f == 0 ? 1.0f : 0.8f;
                                         row[1] = f == 0 ? 0.2f : 0.4f;
                                     });
    std::vector<QuadTree> trees{build_hierarchy(frame_span(v, 0), 2, 2, dim),
                                build_hierarchy(frame_span(v, 1), 2, 2, dim)};
    std::vector<std::vector<int>> selected{spatial_select(trees[0], 0.82),
                                           spatial_select(trees[1], 0.82)};
    const auto merged = temporal_merge(trees, selected, 0.58);
    REQUIRE(merged.survivors.size() == 1);
    CHECK(merged.survivors[0].acc_weight == 8);
    CHECK(merged.survivors[0].rep[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(merged.survivors[0].rep[1] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("temporal merge count is antitone in tau_t") {
    Rng rng(12);
    const VideoStream v = random_video(rng, 3, 4, 4, 3);
    std::vector<QuadTree> trees;
    std::vector<std::vector<int>> selected;
    for (std::size_t f = 0; f < 3; ++f) {
        trees.push_back(build_hierarchy(frame_span(v, f), 4, 4, 3));
        selected.push_back(spatial_select(trees.back(), 0.82));
    }
    std::size_t prev = SIZE_MAX;
    for (double tau : {0.0, 0.3, 0.6, 0.9, 1.0}) {
        const std::size_t merges = temporal_merge(trees, selected, tau).merges.size();
        CHECK(merges <= prev);
        prev = merges;
    }
}

TEST_CASE("compress: constant chunk collapses then refines toward the window") {
    const VideoStream v = constant_video(4, 4, 4, 3);
    HyperParams params;
    const VideoCompressionResult result = compress_video_chunk(v, 0, 4, params);

    CHECK(result.r_v_pre_clamp == doctest::Approx(1.0 / 64.0));
    CHECK(result.heterogeneity == doctest::Approx(0.0));
    // hand-applied split ordering: 1 -> 4 -> 7 -> 10 -> 13 representatives
    CHECK(result.survivors.size() == 13);
    CHECK(result.r_v == doctest::Approx(13.0 / 64.0));
    CHECK(result.r_v >= result.window_lo);
    CHECK(result.r_v <= result.window_hi);
    CHECK(!result.bound_infeasible);
    CHECK(result.note.empty());
}

TEST_CASE("compress: checkerboard retains everything then coarsens to the window") {
    const std::size_t dim = 16;
    const VideoStream v = make_video(1, 4, 4, dim,
                                     [&](std::size_t, std::size_t r, std::size_t c,
                                         std::span<float> row) {
                                         for (auto& x : row) x = 0.0f;
                                         row[r * 4 + c] = 1.0f;
                                     });
    HyperParams params;
    const VideoCompressionResult result = compress_video_chunk(v, 0, 1, params);
    CHECK(result.r_v_pre_clamp == doctest::Approx(1.0));
    // hand-applied coarsen ordering: 16 -> 13 -> 10 -> 7 representatives
    CHECK(result.survivors.size() == 7);
    CHECK(result.r_v == doctest::Approx(7.0 / 16.0));
    CHECK(!result.bound_infeasible);
}

TEST_CASE("compress: weight conservation and coverage on random chunks") {
    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t frames = static_cast<std::size_t>(rng.uniform_int(1, 4));
        const std::size_t h = static_cast<std::size_t>(rng.uniform_int(2, 5));
        const std::size_t w = static_cast<std::size_t>(rng.uniform_int(2, 5));
        const std::size_t dim = 4;
        // mix of random and low-rank content so both merging and splitting occur
        VideoStream v = random_video(rng, frames, h, w, dim);
        if (trial % 3 == 0) {
            for (auto& x : v.tokens.values) x = 0.5f; // constant chunk
        }
        HyperParams params;
        const VideoCompressionResult result = compress_video_chunk(v, 0, frames, params);

        std::size_t own_total = 0, acc_total = 0;
        for (const auto& surv : result.survivors) {
            own_total += surv.own_weight;
            acc_total += surv.acc_weight;
        }
        std::size_t merged_total = 0;
        for (const auto& edge : result.merges) merged_total += edge.weight;

        const std::size_t expected = frames * h * w;
        CHECK(own_total + merged_total == expected);
        CHECK(acc_total == expected);
        CHECK(result.r_v > 0.0);
        CHECK(result.r_v <= 1.0);
        CHECK(result.token_mask.size() == expected);
        CHECK(static_cast<std::size_t>(
                  std::count(result.token_mask.begin(), result.token_mask.end(), 1)) ==
              result.survivors.size());
    }
}

TEST_CASE("compress: untouched survivors keep exact patch means") {
    Rng rng(14);
    const VideoStream v = random_video(rng, 1, 4, 4, 3);
    HyperParams params;
    params.v_min = 0.0;
    params.v_max = 1.0; // no clamping
    params.alpha_modulation = false;
    const VideoCompressionResult result = compress_video_chunk(v, 0, 1, params);
    CHECK(result.r_v == result.r_v_pre_clamp);

    for (const auto& surv : result.survivors) {
        std::vector<double> mean(3, 0.0);
        std::size_t count = 0;
        for (std::size_t r = surv.rect.row_lo; r <= surv.rect.row_hi; ++r) {
            for (std::size_t c = surv.rect.col_lo; c <= surv.rect.col_hi; ++c) {
                const auto row = v.patch(0, r * 4 + c);
                for (std::size_t d = 0; d < 3; ++d) mean[d] += static_cast<double>(row[d]);
                ++count;
            }
        }
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(surv.rep[d] == doctest::Approx(mean[d] / count).epsilon(1e-6));
        }
    }
}

TEST_CASE("compress: result already in the window is unchanged") {
    Rng rng(15);
    const VideoStream v = random_video(rng, 2, 3, 3, 4);
    HyperParams params;
    params.v_min = 0.0;
    params.v_max = 1.0;
    params.alpha_modulation = false;
    const VideoCompressionResult result = compress_video_chunk(v, 0, 2, params);
    CHECK(result.r_v == result.r_v_pre_clamp);
    CHECK(!result.bound_infeasible);
}

TEST_CASE("compress: single-token chunk reports the infeasible bound") {
    const VideoStream v = constant_video(1, 1, 1, 3);
    HyperParams params;
    const VideoCompressionResult result = compress_video_chunk(v, 0, 1, params);
    CHECK(result.r_v == 1.0);
    CHECK(result.bound_infeasible);
    CHECK(!result.note.empty());
}
