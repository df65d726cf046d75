#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "orf/video_compress.hpp"
#include "orf/types.hpp"

namespace orf {

// Per-token saliency for one chunk. The default scorer is the l2 norm; an
// external provider can substitute model-derived scores.
struct ImportanceScores {
    std::vector<double> values;
    std::string source = "norm";

    void validate(std::size_t chunk_size) const;
};

ImportanceScores norm_importance(const AudioStream& audio,
                                 std::size_t t_begin, std::size_t t_end);

struct AudioBudget {
    double m_a = 0.0; // applied merging ratio
    double R_a = 0.0; // 1 - m_a
};

// m_a = min(a_max, max(a_min, rho_a - beta * (R_v - (1 - rho_v)))).
AudioBudget audio_budget(const HyperParams& params, double R_v);

// Token 0 opens the first semantic interval; token t>=1 is an anchor iff
// cosine(a_{t-1}, a_t) < theta. Indices are chunk-local.
std::vector<std::size_t> detect_anchors(const AudioStream& audio,
                                        std::size_t t_begin, std::size_t t_end,
                                        double theta);

// interval_of[t] = index of the anchor opening t's semantic interval.
std::vector<std::size_t> interval_map(std::size_t chunk_size,
                                      const std::vector<std::size_t>& anchors);

struct RetainedSelection {
    std::size_t target = 0;              // round((1-m_a)*N_g), floored at 1
    std::vector<std::size_t> dominant;   // sorted
    std::vector<std::size_t> contextual; // sorted anchor subset
    std::vector<std::size_t> residual;   // sorted complement
};

// Top-score dominant tokens plus coverage-first contextual anchors; the
// retained total always equals the target. Ties go to earlier indices.
RetainedSelection select_retained(std::size_t chunk_size,
                                  const ImportanceScores& scores,
                                  const std::vector<std::size_t>& anchors,
                                  double m_a, double contextual_ratio);

// pi per residual: the retained anchor in its semantic interval with maximal
// cosine (ties: temporally nearest, then earlier). Intervals without a
// retained anchor fall back to the nearest retained anchor in time; -1 when
// no anchor is retained at all.
std::vector<int> assign_to_anchors(const AudioStream& audio, std::size_t t_begin,
                                   const std::vector<std::size_t>& residuals,
                                   const std::vector<std::size_t>& retained_anchors,
                                   const std::vector<std::size_t>& interval_of);

// Per-token max cosine against retained video representatives; all zeros
// when there are none.
std::vector<double> crossmodal_scores(const AudioStream& audio,
                                      std::size_t t_begin, std::size_t t_end,
                                      const Matrix& video_reps);

struct MergeSelection {
    std::map<std::size_t, std::vector<std::size_t>> merge_sets; // anchor -> tokens
    std::vector<std::size_t> dropped;
};

// Within each anchor group, residuals are scanned in contiguous blocks of
// size G; each pass takes every block's next-best scorer until the quota
// ceil(m_a * group_size) is filled. The rest are dropped.
MergeSelection crossmodal_merge_candidates(
    const std::vector<std::size_t>& residuals, const std::vector<int>& pi,
    const std::vector<double>& cross_scores, double m_a, int group_size);

struct MergedAnchors {
    std::map<std::size_t, std::vector<double>> merged_rep; // anchor -> d-vector
    std::map<std::size_t, std::vector<double>> weights;    // anchor -> w_t
};

// a~_h = (a_h + sum w_t a_t) / (1 + sum w_t), w_t the relevance scores
// normalized within the merge set (clamped at 0; uniform when all zero).
MergedAnchors merge_into_anchors(const AudioStream& audio, std::size_t t_begin,
                                 const std::map<std::size_t, std::vector<std::size_t>>& merge_sets,
                                 const std::vector<double>& cross_scores);

enum class TokenFate : std::uint8_t { dominant, contextual_anchor, merged, dropped };

struct AudioCompressionResult {
    std::vector<std::size_t> anchors;        // all detected anchors
    std::vector<std::size_t> dominant;
    std::vector<std::size_t> contextual;
    std::vector<int> assignment;             // per token; residual -> anchor, else -1
    std::map<std::size_t, std::vector<std::size_t>> merge_sets;
    std::map<std::size_t, std::vector<double>> merge_weights;
    std::vector<TokenFate> fate;             // partition over the chunk
    std::vector<std::uint8_t> retained_mask;
    std::vector<std::size_t> retained_indices; // sorted
    Matrix merged_reps;                      // one row per retained token
    std::vector<double> cross_scores;
    double m_a = 0.0;
    double R_a = 0.0;             // 1 - m_a exactly
    double retained_ratio = 0.0;  // |retained| / N_g, the achieved ratio
    std::size_t target = 0;
};

// Composes budget -> anchors -> selection -> assignment -> cross-modal
// candidates -> weighted merge for audio tokens [t_begin, t_end), consuming
// the chunk's video retention. external_scores, when given, replaces the
// norm scorer.
AudioCompressionResult compress_audio_chunk(const AudioStream& audio,
                                            std::size_t t_begin, std::size_t t_end,
                                            const VideoCompressionResult& video_result,
                                            const HyperParams& params,
                                            const ImportanceScores* external_scores = nullptr);

} // namespace orf
