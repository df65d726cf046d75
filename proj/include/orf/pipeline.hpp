#pragma once

#include <string>
#include <vector>

#include "orf/chunk_refine.hpp"
#include "orf/metrics.hpp"
#include "orf/audio_compress.hpp"
#include "orf/video_compress.hpp"
#include "orf/types.hpp"

namespace orf {

struct ChunkReport {
    ChunkSpan span;
    double phi = 0.0;
    double r_v_pre_clamp = 0.0;
    double r_v = 0.0;
    double m_a = 0.0;
    double R_a = 0.0;
    double audio_retained_ratio = 0.0; // achieved
    std::size_t video_before = 0, video_after = 0;
    std::size_t audio_before = 0, audio_after = 0;
    double heterogeneity = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    std::string clamp_note;
};

// Per-turn cost with the compressed KV cache reused, sampled at doubling
// turn counts; paired with the constant reprocess-every-turn cost.
struct AmortizationPoint {
    std::size_t turns = 1;
    double reuse_per_turn = 0.0;
};

struct CompressionReport {
    int report_version = 1;
    std::string config_digest;
    bool banded = true;
    double band_halfwidth = 0.0;
    double lambda_c = 0.0;
    double chunking_score = 0.0;
    double overall_retained_ratio = 0.0;
    double flops_proxy_ratio = 0.0;
    std::size_t tokens_before = 0, tokens_after = 0;
    std::size_t video_before = 0, video_after = 0;
    std::size_t audio_before = 0, audio_after = 0;
    CostModel cost_model;
    std::vector<AmortizationPoint> amortization; // turns = 1, 2, 4, ..., 1024
    double no_reuse_per_turn = 0.0;
    std::vector<ChunkReport> per_chunk;
};

struct PipelineResult {
    RefinedChunking chunking;
    std::vector<VideoCompressionResult> video_results; // per chunk
    std::vector<AudioCompressionResult> audio_results; // per chunk
    // Survivors reassembled in temporal order, video before audio within a
    // chunk. Video survivors are stored as 1x1-patch frames; both sides are
    // bucketed by chunk id.
    VideoStream compressed_video;
    AudioStream compressed_audio;
    CompressionReport report;
};

// Field -> constrained-DP chunk refinement -> per-chunk cooperative
// compression (audio consumes the chunk's video retention) -> reassembly and
// report. Deterministic for fixed inputs regardless of thread count.
PipelineResult run_pipeline(const VideoStream& video, const AudioStream& audio,
                            const HyperParams& params, bool banded = true,
                            const CostModel& cost = CostModel{});

// Stable 16-hex-digit digest of a parameter set.
std::string config_digest(const HyperParams& params);

// Fixed, versioned report schema; byte-identical for identical runs.
std::string report_to_json(const CompressionReport& report);

// Per-chunk diagnostic trace: video survivor rects and merge edges,
// retention before/after clamping, audio anchors, assignments, merge sets
// and weights.
std::string pipeline_trace_json(const PipelineResult& result);

} // namespace orf
