#pragma once

#include <iosfwd>
#include <string>

#include "orf/pipeline.hpp"

namespace orf {

// CSV rows {chunk_id, modality, position, retained, representative_id}, one
// row per input token. representative_id is the global output-row index of
// the survivor standing in for the token, -1 for dropped audio tokens.
void write_retention_csv(std::ostream& out, const VideoStream& video,
                         const AudioStream& audio, const PipelineResult& result);

// Deterministic SVG: per-frame patch grids (pruned cells gray) above an
// audio timeline with anchor ticks.
void write_retention_svg(std::ostream& out, const VideoStream& video,
                         const AudioStream& audio, const PipelineResult& result);

void export_retention_map(const VideoStream& video, const AudioStream& audio,
                          const PipelineResult& result, const std::string& path,
                          const std::string& format); // "csv" | "svg"

} // namespace orf
