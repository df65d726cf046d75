#pragma once

#include <optional>
#include <string>

#include "orf/types.hpp"

namespace orf {

// Binary token container, extension-agnostic:
//   bytes 0..7   magic "ORTC0001" ("ORTC" + 4-digit version)
//   u32 LE       header length
//   ...          UTF-8 JSON header {dim, num_frames, grid_h, grid_w,
//                num_audio_tokens, frame_bucket, token_bucket,
//                hyperparams|null, ground_truth_boundaries|null}
//   ...          video payload, F*P*d little-endian f32
//   ...          audio payload, N*d little-endian f32, no padding
inline constexpr char kContainerMagic[8] = {'O', 'R', 'T', 'C', '0', '0', '0', '1'};

struct LoadedContainer {
    VideoStream video;
    AudioStream audio;
    std::optional<HyperParams> params;
    std::optional<GroundTruthBoundaries> truth;
};

// Deterministic bytes for identical inputs.
void save_container(const VideoStream& video, const AudioStream& audio,
                    const HyperParams* params, const GroundTruthBoundaries* truth,
                    const std::string& path);

// Distinct FormatError per corruption class (magic, version, truncation,
// field invariants); IoError when the file cannot be opened.
LoadedContainer load_container(const std::string& path);

} // namespace orf
