#include "orf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "orf/rng.hpp"

namespace orf {

namespace {

// Balanced partition of n items into k buckets: bucket b covers
// [floor(b*n/k), floor((b+1)*n/k)).
std::size_t bucket_edge(std::size_t n, int k, int b) {
    return (static_cast<std::size_t>(b) * n) / static_cast<std::size_t>(k);
}

bool bucket_sizes_ok(std::size_t n, int k, int lo, int hi) {
    for (int b = 0; b < k; ++b) {
        const std::size_t size = bucket_edge(n, k, b + 1) - bucket_edge(n, k, b);
        if (size < static_cast<std::size_t>(lo) || size > static_cast<std::size_t>(hi)) {
            return false;
        }
    }
    return true;
}

std::vector<int> assign_buckets(std::size_t n, int k) {
    std::vector<int> out(n, 0);
    for (int b = 0; b < k; ++b) {
        for (std::size_t i = bucket_edge(n, k, b); i < bucket_edge(n, k, b + 1); ++i) {
            out[i] = b;
        }
    }
    return out;
}

// Jittered interior boundaries near the chosen native edges, kept strictly
// increasing with at least one unit per event.
std::vector<std::size_t> jittered_starts(Rng& rng, std::size_t n, int k, int num_events,
                                         int jitter) {
    std::vector<std::size_t> starts{0};
    std::size_t prev = 0;
    for (int e = 1; e < num_events; ++e) {
        const int edge = static_cast<int>(
            std::llround(static_cast<double>(e) * k / static_cast<double>(num_events)));
        const std::int64_t base = static_cast<std::int64_t>(bucket_edge(n, k, edge));
        const std::int64_t delta = jitter > 0 ? rng.uniform_int(-jitter, jitter) : 0;
        const std::int64_t lo = static_cast<std::int64_t>(prev) + 1;
        const std::int64_t hi =
            static_cast<std::int64_t>(n) - (num_events - e); // room for the rest
        std::int64_t pos = std::clamp(base + delta, lo, hi);
        starts.push_back(static_cast<std::size_t>(pos));
        prev = static_cast<std::size_t>(pos);
    }
    return starts;
}

std::size_t event_of(const std::vector<std::size_t>& starts, std::size_t index) {
    std::size_t e = 0;
    while (e + 1 < starts.size() && index >= starts[e + 1]) ++e;
    return e;
}

} // namespace

int choose_bucket_count(const ScenarioSpec& spec, const HyperParams& params) {
    spec.validate();
    params.validate();
    const int k_cap = static_cast<int>(std::min(spec.num_frames, spec.num_audio_tokens));
    for (int k = std::max(1, spec.num_events); k <= k_cap; ++k) {
        if (bucket_sizes_ok(spec.num_frames, k, params.sv_min, params.sv_max) &&
            bucket_sizes_ok(spec.num_audio_tokens, k, params.sa_min, params.sa_max)) {
            return k;
        }
    }
    std::ostringstream msg;
    msg << "no bucket count K >= " << spec.num_events << " partitions " << spec.num_frames
        << " frames into sizes within [" << params.sv_min << ", " << params.sv_max
        << "] and " << spec.num_audio_tokens << " audio tokens into sizes within ["
        << params.sa_min << ", " << params.sa_max << "]";
    throw ConfigError(msg.str());
}

GeneratedScenario generate_scenario(const ScenarioSpec& spec, const HyperParams& params) {
    const int k = choose_bucket_count(spec, params);
    Rng rng(spec.seed);

    GeneratedScenario scenario;
    scenario.truth.num_events = spec.num_events;
    scenario.truth.video_starts =
        jittered_starts(rng, spec.num_frames, k, spec.num_events, spec.boundary_jitter);
    scenario.truth.audio_starts =
        jittered_starts(rng, spec.num_audio_tokens, k, spec.num_events, spec.boundary_jitter);

    // Event latents: unit vectors, orthonormalized while dimensions allow.
    std::vector<std::vector<double>> latents;
    latents.reserve(static_cast<std::size_t>(spec.num_events));
    for (int e = 0; e < spec.num_events; ++e) {
        std::vector<double> v(spec.dim);
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (auto& x : v) x = rng.gaussian();
            if (static_cast<std::size_t>(spec.num_events) <= spec.dim) {
                for (const auto& prev : latents) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < spec.dim; ++i) dot += v[i] * prev[i];
                    for (std::size_t i = 0; i < spec.dim; ++i) v[i] -= dot * prev[i];
                }
            }
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 1e-8) {
                for (auto& x : v) x /= norm;
                break;
            }
        }
        latents.push_back(std::move(v));
    }

    const std::size_t patches = spec.grid_h * spec.grid_w;

    scenario.video.num_frames = spec.num_frames;
    scenario.video.grid_h = spec.grid_h;
    scenario.video.grid_w = spec.grid_w;
    scenario.video.tokens = EmbeddingMatrix(spec.num_frames * patches, spec.dim);
    scenario.video.frame_bucket = assign_buckets(spec.num_frames, k);

    // The spatial pattern scales the latent per position so intra-event
    // cosines stay exactly 1 in the noiseless case.
    for (std::size_t f = 0; f < spec.num_frames; ++f) {
        const auto& latent = latents[event_of(scenario.truth.video_starts, f)];
        for (std::size_t p = 0; p < patches; ++p) {
            const double gradient =
                patches == 1 ? 0.0
                             : 2.0 * (static_cast<double>(p) / static_cast<double>(patches - 1)) - 1.0;
            const double scale = 1.0 + 0.25 * gradient;
            auto row = scenario.video.tokens.row(f * patches + p);
            for (std::size_t i = 0; i < spec.dim; ++i) {
                row[i] = static_cast<float>(scale * latent[i] + spec.noise_sigma * rng.gaussian());
            }
        }
    }

    scenario.audio.num_tokens = spec.num_audio_tokens;
    scenario.audio.tokens = EmbeddingMatrix(spec.num_audio_tokens, spec.dim);
    scenario.audio.token_bucket = assign_buckets(spec.num_audio_tokens, k);
    for (std::size_t t = 0; t < spec.num_audio_tokens; ++t) {
        const auto& latent = latents[event_of(scenario.truth.audio_starts, t)];
        auto row = scenario.audio.tokens.row(t);
        for (std::size_t i = 0; i < spec.dim; ++i) {
            row[i] = static_cast<float>(latent[i] + spec.noise_sigma * rng.gaussian());
        }
    }

    validate_pair(scenario.video, scenario.audio);
    return scenario;
}

} // namespace orf
