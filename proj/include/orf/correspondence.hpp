#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "orf/types.hpp"

namespace orf {

// Neighborhood rule at the sequence ends: the literal rule keeps only the
// bucket itself at either end; one_sided extends to the single inward
// neighbor instead.
enum class BoundaryMode { bucket_only, one_sided };

// eps-guarded cosine: 0 when either norm <= 1e-12, clamped to [-1, 1].
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const double> u, std::span<const float> v);

// Row f = mean of the frame's patch tokens (double accumulation).
Matrix frame_embeddings(const VideoStream& video);

// S[f][t] = cosine(frame_f, audio_t).
Matrix similarity_matrix(const Matrix& frames, const AudioStream& audio);

// M[f][t] = 1 iff the audio token's bucket is in the neighborhood of the
// frame's bucket: {k-1, k, k+1} in the interior, ends per BoundaryMode.
std::vector<std::uint8_t> neighborhood_mask(const VideoStream& video,
                                            const AudioStream& audio,
                                            BoundaryMode mode);

// Similarity field with its mask, masked values and 2D prefix sums.
// Prefix sums accumulate in double so downstream block scores are exact
// enough for deterministic tie-breaking.
struct CorrespondenceField {
    std::size_t num_frames = 0;
    std::size_t num_audio = 0;
    Matrix sim;                       // F x N
    std::vector<std::uint8_t> mask;   // F x N, 0/1
    Matrix masked;                    // mask .* sim
    std::vector<double> masked_prefix; // (F+1) x (N+1)
    std::vector<double> mask_prefix;   // (F+1) x (N+1)

    // Assembles from raw parts; sim entries must lie in [-1, 1].
    static CorrespondenceField from_parts(Matrix sim, std::vector<std::uint8_t> mask);

    // Sum over the half-open block [f_lo, f_hi) x [t_lo, t_hi).
    double masked_sum(std::size_t f_lo, std::size_t f_hi,
                      std::size_t t_lo, std::size_t t_hi) const;
    double mask_sum(std::size_t f_lo, std::size_t f_hi,
                    std::size_t t_lo, std::size_t t_hi) const;
};

CorrespondenceField build_field(const VideoStream& video, const AudioStream& audio,
                                BoundaryMode mode = BoundaryMode::bucket_only);

// Debug CSV (%.6f): one row per frame, one column per audio token.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_mask_csv(std::ostream& out, const std::vector<std::uint8_t>& mask,
                    std::size_t rows, std::size_t cols);

} // namespace orf
