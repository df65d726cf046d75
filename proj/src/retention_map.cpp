#include "orf/retention_map.hpp"

#include <fstream>
#include <ostream>
#include <vector>

namespace orf {

namespace {

// Global output-row index of each chunk's first video and audio survivor:
// survivors are emitted chunk-major, video before audio.
struct RepOffsets {
    std::vector<std::size_t> video_base;
    std::vector<std::size_t> audio_base;
};

RepOffsets rep_offsets(const PipelineResult& result) {
    RepOffsets off;
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        off.video_base.push_back(cursor);
        cursor += result.video_results[g].merged_reps.rows;
        off.audio_base.push_back(cursor);
        cursor += result.audio_results[g].merged_reps.rows;
    }
    return off;
}

} // namespace

void write_retention_csv(std::ostream& out, const VideoStream& video,
                         const AudioStream& audio, const PipelineResult& result) {
    (void)audio;
    const RepOffsets off = rep_offsets(result);
    const std::size_t patches = video.patches_per_frame();

    out << "chunk_id,modality,position,retained,representative_id\n";
    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        const auto& vres = result.video_results[g];
        const auto& ares = result.audio_results[g];

        for (std::size_t local = 0; local < vres.token_mask.size(); ++local) {
            const std::size_t position = (span.f_lo - 1) * patches + local;
            const int rep = vres.representative_of[local];
            out << g << ",v," << position << ',' << (vres.token_mask[local] ? 1 : 0) << ','
                << off.video_base[g] + static_cast<std::size_t>(rep) << '\n';
        }

        // retained audio tokens own an output row; merged tokens point at
        // their anchor's row; dropped tokens have no representative
        std::vector<long> audio_rep(ares.fate.size(), -1);
        for (std::size_t i = 0; i < ares.retained_indices.size(); ++i) {
            audio_rep[ares.retained_indices[i]] =
                static_cast<long>(off.audio_base[g] + i);
        }
        for (const auto& [anchor, members] : ares.merge_sets) {
            for (std::size_t t : members) audio_rep[t] = audio_rep[anchor];
        }
        for (std::size_t local = 0; local < ares.fate.size(); ++local) {
            const std::size_t position = (span.t_lo - 1) + local;
            out << g << ",a," << position << ',' << (ares.retained_mask[local] ? 1 : 0)
                << ',' << audio_rep[local] << '\n';
        }
    }
}

void write_retention_svg(std::ostream& out, const VideoStream& video,
                         const AudioStream& audio, const PipelineResult& result) {
    const std::size_t cell = 6;
    const std::size_t frame_gap = 3;
    const std::size_t chunk_gap = 9;
    const std::size_t patches = video.patches_per_frame();

    std::size_t x_cursor = chunk_gap;
    std::vector<std::size_t> frame_x(video.num_frames, 0);
    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        for (std::size_t f = span.f_lo - 1; f < span.f_hi; ++f) {
            frame_x[f] = x_cursor;
            x_cursor += video.grid_w * cell + frame_gap;
        }
        x_cursor += chunk_gap;
    }
    const std::size_t grid_height = video.grid_h * cell;
    const std::size_t audio_y = grid_height + 16;
    const std::size_t audio_h = 12;
    const std::size_t width = x_cursor;
    const std::size_t height = audio_y + audio_h + 16;
    const double audio_px = audio.num_tokens
                                ? static_cast<double>(width - 2 * chunk_gap) /
                                      static_cast<double>(audio.num_tokens)
                                : 1.0;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";

    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        const auto& vres = result.video_results[g];
        for (std::size_t f = span.f_lo - 1; f < span.f_hi; ++f) {
            const std::size_t local_frame = f - (span.f_lo - 1);
            for (std::size_t r = 0; r < video.grid_h; ++r) {
                for (std::size_t c = 0; c < video.grid_w; ++c) {
                    const std::size_t local = local_frame * patches + r * video.grid_w + c;
                    const bool kept = vres.token_mask[local] != 0;
                    out << "<rect x=\"" << frame_x[f] + c * cell << "\" y=\"" << r * cell
                        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                        << (kept ? "#3b6fb6" : "#d9d9d9") << "\"/>\n";
                }
            }
        }
    }

    // audio timeline: retained tokens colored, anchors ticked
    for (std::size_t g = 0; g < result.chunking.chunks.size(); ++g) {
        const ChunkSpan& span = result.chunking.chunks[g];
        const auto& ares = result.audio_results[g];
        for (std::size_t local = 0; local < ares.retained_mask.size(); ++local) {
            const std::size_t t = (span.t_lo - 1) + local;
            const std::size_t x =
                chunk_gap + static_cast<std::size_t>(static_cast<double>(t) * audio_px);
            const std::size_t w =
                std::max<std::size_t>(1, static_cast<std::size_t>(audio_px));
            out << "<rect x=\"" << x << "\" y=\"" << audio_y << "\" width=\"" << w
                << "\" height=\"" << audio_h << "\" fill=\""
                << (ares.retained_mask[local] ? "#c96a2e" : "#d9d9d9") << "\"/>\n";
        }
        for (std::size_t anchor : ares.anchors) {
            if (!ares.retained_mask[anchor]) continue;
            const std::size_t t = (span.t_lo - 1) + anchor;
            const std::size_t x =
                chunk_gap + static_cast<std::size_t>(static_cast<double>(t) * audio_px);
            out << "<rect x=\"" << x << "\" y=\"" << audio_y - 4 << "\" width=\"2\" height=\"4\""
                << " fill=\"#222222\"/>\n";
        }
    }
    out << "</svg>\n";
}

void export_retention_map(const VideoStream& video, const AudioStream& audio,
                          const PipelineResult& result, const std::string& path,
                          const std::string& format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    if (format == "csv") {
        write_retention_csv(out, video, audio, result);
    } else if (format == "svg") {
        write_retention_svg(out, video, audio, result);
    } else {
        throw ConfigError("unknown retention map format '" + format + "' (csv|svg)");
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

} // namespace orf
