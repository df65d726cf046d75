#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orf/errors.hpp"

namespace orf {

// Dense row-major f32 token embeddings; one row per token.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 1;
    std::vector<float> values;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows_, std::size_t dim_)
        : rows(rows_), dim(dim_), values(rows_ * dim_, 0.0f) {}

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
    std::span<float> row(std::size_t i) {
        return {values.data() + i * dim, dim};
    }

    // Throws InvariantError naming `name` on shape or finiteness violations.
    void validate(const std::string& name) const;
};

// Dense row-major double matrix for derived quantities (frame embeddings,
// similarity fields, merged representatives).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
};

// Framed patch-grid video tokens. `tokens` has num_frames * grid_h * grid_w
// rows, frame-major and row-major within each frame.
struct VideoStream {
    std::size_t num_frames = 0;
    std::size_t grid_h = 1;
    std::size_t grid_w = 1;
    EmbeddingMatrix tokens;
    std::vector<int> frame_bucket; // native bucket id per frame

    std::size_t patches_per_frame() const { return grid_h * grid_w; }
    int num_buckets() const {
        return frame_bucket.empty() ? 0 : frame_bucket.back() + 1;
    }
    std::span<const float> patch(std::size_t frame, std::size_t p) const {
        return tokens.row(frame * patches_per_frame() + p);
    }

    void validate() const;
};

// Flat audio token timeline with native bucket ids.
struct AudioStream {
    std::size_t num_tokens = 0;
    EmbeddingMatrix tokens;
    std::vector<int> token_bucket;

    int num_buckets() const {
        return token_bucket.empty() ? 0 : token_bucket.back() + 1;
    }

    void validate() const;
};

// Full engine configuration. Defaults are the published operating point.
struct HyperParams {
    double rho_a = 0.3;            // base audio merging ratio
    double rho_v = 0.6;            // base video merging ratio
    double tau_s = 0.82;           // spatial similarity threshold
    double tau_t = 0.58;           // temporal similarity threshold
    double beta = 0.5;             // cross-modal budget coefficient
    double lambda_c = 0.02;        // per-chunk regularization penalty
    double theta_anchor = 0.4;     // semantic-anchor similarity threshold
    double contextual_ratio = 0.05;
    double v_min = 0.18, v_max = 0.55; // hard video retention bounds
    double a_min = 0.1, a_max = 0.9;   // hard audio merging-ratio bounds
    double alpha = 0.15;           // video budget modulation factor
    int group_size = 3;            // block size for grouped candidate selection
    int sa_min = 90, sa_max = 140; // audio chunk size bounds (tokens)
    int sv_min = 3, sv_max = 5;    // video chunk size bounds (frames)
    double dp_band_ratio = 2.0;    // diagonal band ratio B
    int dp_min_window = 48;        // minimum band half-width W

    // Documented switches: literal vs one-sided boundary neighborhoods, and
    // the alpha window tilt on the video clamp bounds.
    bool one_sided_boundary = false;
    bool alpha_modulation = true;

    void validate() const; // throws ConfigError naming the offending field
};

// Synthetic scenario description. Events are latent cross-modal intervals
// shared by both streams.
struct ScenarioSpec {
    std::size_t num_frames = 0;
    std::size_t grid_h = 1;
    std::size_t grid_w = 1;
    std::size_t num_audio_tokens = 0;
    std::size_t dim = 1;
    int num_events = 1;
    int boundary_jitter = 0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Generator sidecar: where the true event boundaries were planted.
// starts[0] == 0; interior boundaries are starts[1..].
struct GroundTruthBoundaries {
    int num_events = 0;
    std::vector<std::size_t> video_starts;
    std::vector<std::size_t> audio_starts;
};

// Validates that the two streams of a pair agree on bucket structure.
// Skipped for an empty side (a zero-frame video carries no buckets).
void validate_pair(const VideoStream& video, const AudioStream& audio);

} // namespace orf
