#pragma once

#include "orf/types.hpp"

namespace orf {

struct GeneratedScenario {
    VideoStream video;
    AudioStream audio;
    GroundTruthBoundaries truth;
};

// Plants num_events contiguous cross-modal events, each with a unit latent
// vector (orthonormalized when num_events <= dim). Video tokens are the
// event latent scaled by a per-position gradient plus gaussian noise; audio
// tokens are the latent plus noise. Event boundaries sit within
// boundary_jitter of a native bucket boundary. Native buckets partition both
// streams uniformly into K buckets, K the smallest count >= num_events whose
// bucket sizes fall inside [sv_min, sv_max] and [sa_min, sa_max].
// Deterministic in spec.seed.
GeneratedScenario generate_scenario(const ScenarioSpec& spec, const HyperParams& params);

// The K the generator would use, or throws the same ConfigError.
int choose_bucket_count(const ScenarioSpec& spec, const HyperParams& params);

} // namespace orf
