#include "orf/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "orf/json_io.hpp"
#include "orf/parallel.hpp"

namespace orf {

using nlohmann::json;

std::string config_digest(const HyperParams& params) {
    const std::string text = hyperparams_to_json(params).dump();
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a 64
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineResult run_pipeline(const VideoStream& video, const AudioStream& audio,
                            const HyperParams& params, bool banded,
                            const CostModel& cost) {
    params.validate();
    cost.validate();
    validate_pair(video, audio);

    const BoundaryMode mode =
        params.one_sided_boundary ? BoundaryMode::one_sided : BoundaryMode::bucket_only;
    const CorrespondenceField field = build_field(video, audio, mode);

    PipelineResult result;
    result.chunking = refine_chunks_dp(field, params, banded);
    const std::size_t n_chunks = result.chunking.chunks.size();

    result.video_results.resize(n_chunks);
    result.audio_results.resize(n_chunks);
    parallel_for(n_chunks, [&](std::size_t g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        result.video_results[g] =
            compress_video_chunk(video, span.f_lo - 1, span.f_hi, params);
        result.audio_results[g] = compress_audio_chunk(audio, span.t_lo - 1, span.t_hi,
                                                       result.video_results[g], params);
    });

    // Reassemble survivors in temporal order: video before audio within each
    // chunk. Video survivors become 1x1-patch frames; both sides carry the
    // chunk id as their bucket.
    const std::size_t dim = audio.tokens.dim;
    VideoStream& cv = result.compressed_video;
    AudioStream& ca = result.compressed_audio;
    cv.grid_h = 1;
    cv.grid_w = 1;
    cv.tokens.dim = dim;
    ca.tokens.dim = dim;

    CompressionReport& report = result.report;
    report.config_digest = config_digest(params);
    report.banded = banded;
    report.band_halfwidth = band_halfwidth(video.num_frames, audio.num_tokens, params);
    report.lambda_c = params.lambda_c;
    report.chunking_score = result.chunking.score;
    report.cost_model = cost;

    const std::size_t patches = video.patches_per_frame();
    for (std::size_t g = 0; g < n_chunks; ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        const auto& vres = result.video_results[g];
        const auto& ares = result.audio_results[g];

        for (std::size_t i = 0; i < vres.merged_reps.rows; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                cv.tokens.values.push_back(static_cast<float>(vres.merged_reps.at(i, d)));
            }
            cv.frame_bucket.push_back(static_cast<int>(g));
        }
        for (std::size_t i = 0; i < ares.merged_reps.rows; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                ca.tokens.values.push_back(static_cast<float>(ares.merged_reps.at(i, d)));
            }
            ca.token_bucket.push_back(static_cast<int>(g));
        }

        ChunkReport cr;
        cr.span = span;
        cr.phi = block_score(field, span.f_lo - 1, span.f_hi, span.t_lo - 1, span.t_hi);
        cr.r_v_pre_clamp = vres.r_v_pre_clamp;
        cr.r_v = vres.r_v;
        cr.m_a = ares.m_a;
        cr.R_a = ares.R_a;
        cr.audio_retained_ratio = ares.retained_ratio;
        cr.video_before = (span.f_hi - span.f_lo + 1) * patches;
        cr.video_after = vres.merged_reps.rows;
        cr.audio_before = span.t_hi - span.t_lo + 1;
        cr.audio_after = ares.merged_reps.rows;
        cr.heterogeneity = vres.heterogeneity;
        cr.window_lo = vres.window_lo;
        cr.window_hi = vres.window_hi;
        cr.clamp_note = vres.note;
        report.per_chunk.push_back(std::move(cr));

        report.video_before += report.per_chunk.back().video_before;
        report.video_after += report.per_chunk.back().video_after;
        report.audio_before += report.per_chunk.back().audio_before;
        report.audio_after += report.per_chunk.back().audio_after;
    }

    cv.num_frames = cv.frame_bucket.size();
    cv.tokens.rows = cv.num_frames;
    ca.num_tokens = ca.token_bucket.size();
    ca.tokens.rows = ca.num_tokens;

    report.tokens_before = report.video_before + report.audio_before;
    report.tokens_after = report.video_after + report.audio_after;
    report.overall_retained_ratio = static_cast<double>(report.tokens_after) /
                                    static_cast<double>(report.tokens_before);
    report.flops_proxy_ratio = flops_proxy(report.tokens_before, report.tokens_after, cost);
    for (std::size_t k = 1; k <= 1024; k *= 2) {
        report.amortization.push_back(
            AmortizationPoint{k, kv_reuse_amortized(k, cost, report.tokens_after)});
    }
    report.no_reuse_per_turn = no_reuse_per_turn(cost, report.tokens_after);

    validate_pair(cv, ca);
    return result;
}

std::string report_to_json(const CompressionReport& report) {
    json per_chunk = json::array();
    for (std::size_t g = 0; g < report.per_chunk.size(); ++g) {
        const auto& c = report.per_chunk[g];
        per_chunk.push_back({
            {"chunk_id", g},
            {"f_lo", c.span.f_lo},
            {"f_hi", c.span.f_hi},
            {"t_lo", c.span.t_lo},
            {"t_hi", c.span.t_hi},
            {"phi", c.phi},
            {"r_v_pre_clamp", c.r_v_pre_clamp},
            {"r_v", c.r_v},
            {"m_a", c.m_a},
            {"R_a", c.R_a},
            {"audio_retained_ratio", c.audio_retained_ratio},
            {"video_tokens_before", c.video_before},
            {"video_tokens_after", c.video_after},
            {"audio_tokens_before", c.audio_before},
            {"audio_tokens_after", c.audio_after},
            {"heterogeneity", c.heterogeneity},
            {"window_lo", c.window_lo},
            {"window_hi", c.window_hi},
            {"clamp_note", c.clamp_note},
        });
    }
    json amortization = json::array();
    for (const auto& point : report.amortization) {
        amortization.push_back(
            {{"turns", point.turns}, {"reuse_per_turn", point.reuse_per_turn}});
    }
    const json j{
        {"report_version", report.report_version},
        {"config_digest", report.config_digest},
        {"banded", report.banded},
        {"band_halfwidth", report.band_halfwidth},
        {"lambda_c", report.lambda_c},
        {"chunking_score", report.chunking_score},
        {"overall_retained_ratio", report.overall_retained_ratio},
        {"flops_proxy_ratio", report.flops_proxy_ratio},
        {"tokens_before", report.tokens_before},
        {"tokens_after", report.tokens_after},
        {"video_tokens_before", report.video_before},
        {"video_tokens_after", report.video_after},
        {"audio_tokens_before", report.audio_before},
        {"audio_tokens_after", report.audio_after},
        {"cost_model",
         {{"c_quad", report.cost_model.c_quad},
          {"c_lin", report.cost_model.c_lin},
          {"preprocess_cost", report.cost_model.preprocess_cost},
          {"decode_cost_per_turn", report.cost_model.decode_cost_per_turn}}},
        {"amortization", amortization},
        {"no_reuse_per_turn", report.no_reuse_per_turn},
        {"per_chunk", per_chunk},
    };
    return j.dump(2);
}

std::string pipeline_trace_json(const PipelineResult& result) {
    json chunks = json::array();
    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        const auto& vres = result.video_results[g];
        const auto& ares = result.audio_results[g];

        json survivors = json::array();
        for (const auto& s : vres.survivors) {
            survivors.push_back({
                {"frame", s.frame},
                {"rect", {s.rect.row_lo, s.rect.row_hi, s.rect.col_lo, s.rect.col_hi}},
                {"own_weight", s.own_weight},
                {"acc_weight", s.acc_weight},
            });
        }
        json merges = json::array();
        for (const auto& e : vres.merges) {
            merges.push_back({
                {"frame", e.frame},
                {"rect", {e.rect.row_lo, e.rect.row_hi, e.rect.col_lo, e.rect.col_hi}},
                {"weight", e.weight},
                {"target", e.target},
            });
        }
        json merge_sets = json::object();
        json merge_weights = json::object();
        for (const auto& [anchor, members] : ares.merge_sets) {
            merge_sets[std::to_string(anchor)] = members;
            merge_weights[std::to_string(anchor)] = ares.merge_weights.at(anchor);
        }

        chunks.push_back({
            {"chunk_id", g},
            {"f_lo", span.f_lo},
            {"f_hi", span.f_hi},
            {"t_lo", span.t_lo},
            {"t_hi", span.t_hi},
            {"video",
             {{"r_v_pre_clamp", vres.r_v_pre_clamp},
              {"r_v", vres.r_v},
              {"window_lo", vres.window_lo},
              {"window_hi", vres.window_hi},
              {"heterogeneity", vres.heterogeneity},
              {"clamp_note", vres.note},
              {"survivors", survivors},
              {"merges", merges}}},
            {"audio",
             {{"m_a", ares.m_a},
              {"R_a", ares.R_a},
              {"retained_ratio", ares.retained_ratio},
              {"anchors", ares.anchors},
              {"dominant", ares.dominant},
              {"contextual", ares.contextual},
              {"assignment", ares.assignment},
              {"dropped_count",
               std::count(ares.fate.begin(), ares.fate.end(), TokenFate::dropped)},
              {"merge_sets", merge_sets},
              {"merge_weights", merge_weights}}},
        });
    }
    return json{{"per_chunk", chunks}}.dump(2);
}

} // namespace orf
