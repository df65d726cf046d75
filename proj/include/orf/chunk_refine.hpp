#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "orf/correspondence.hpp"
#include "orf/types.hpp"

namespace orf {

// One refined chunk: video frames [f_lo, f_hi] and audio tokens
// [t_lo, t_hi], 1-based inclusive.
struct ChunkSpan {
    std::size_t f_lo = 0, f_hi = 0;
    std::size_t t_lo = 0, t_hi = 0;

    bool operator==(const ChunkSpan&) const = default;
};

struct RefinedChunking {
    std::vector<ChunkSpan> chunks;
    double score = 0.0;
};

// Joint segmentation DP state, exposed for inspection.
struct DpTable {
    std::size_t num_frames = 0, num_audio = 0;
    std::vector<double> best;              // (F+1)*(N+1), -inf when unreached
    std::vector<int> count;                // chunks on the best path, INT_MAX sentinel
    std::vector<std::pair<int, int>> back; // predecessor state, (-1,-1) at origin

    double best_at(std::size_t u, std::size_t q) const {
        return best[u * (num_audio + 1) + q];
    }
    bool reached(std::size_t u, std::size_t q) const;
};

// Mean masked similarity over frames (i, u] x audio (j, q], 0-based
// exclusive-lo/inclusive-hi as index arithmetic: rows [i, u), cols [j, q).
// Returns -inf when the block has no masked pairs.
double block_score(const CorrespondenceField& field,
                   std::size_t i, std::size_t u, std::size_t j, std::size_t q);

// Chunk counts m that can tile F frames and N audio tokens jointly under the
// size bounds; empty when infeasible.
std::pair<int, int> feasible_chunk_counts(std::size_t F, std::size_t N,
                                          const HyperParams& params, bool* ok);

// Diagonal band half-width max(W, B * (N/F) * sv_max).
double band_halfwidth(std::size_t F, std::size_t N, const HyperParams& params);
bool in_band(std::size_t u, std::size_t q, std::size_t F, std::size_t N,
             const HyperParams& params);

// True when `a` beats `b` under the canonical order: higher score, then
// fewer chunks, then lexicographically earlier (f_hi, t_hi) sequence.
bool chunking_better(const RefinedChunking& a, const RefinedChunking& b);

// Maximizes sum(phi) - lambda_c * #chunks over monotone contiguous joint
// segmentations within the size bounds. banded prunes states outside the
// diagonal band. Throws ConfigError when no segmentation exists, and a
// distinct ConfigError when only the band makes it unreachable.
RefinedChunking refine_chunks_dp(const CorrespondenceField& field,
                                 const HyperParams& params, bool banded,
                                 DpTable* table_out = nullptr);

// Exhaustive oracle over all joint segmentations; same objective, same
// tie-break, same score accumulation as the DP. Guarded to F <= 12, N <= 40.
// enumerated_out, when set, receives the number of complete segmentations
// visited.
RefinedChunking refine_chunks_bruteforce(const CorrespondenceField& field,
                                         const HyperParams& params,
                                         std::size_t* enumerated_out = nullptr);

// Re-scores an existing chunking with the same left-fold accumulation the
// solvers use. Throws InvariantError when the chunking does not tile the
// field. -inf when any chunk has zero masked pairs.
double segmentation_score(const RefinedChunking& chunking,
                          const CorrespondenceField& field, double lambda_c);

// The native bucketing as a chunking (score left 0; rescore as needed).
RefinedChunking native_chunking(const VideoStream& video, const AudioStream& audio);

// {chunks: [{f_lo, f_hi, t_lo, t_hi, phi}], score, lambda_c, banded, band_width}
std::string chunking_to_json(const RefinedChunking& chunking,
                             const CorrespondenceField& field,
                             const HyperParams& params, bool banded);

} // namespace orf
