#include "orf/types.hpp"

#include <cmath>
#include <sstream>

namespace orf {

namespace {

void check_bucket_vector(const std::string& name, const std::vector<int>& buckets,
                         std::size_t expected_len) {
    if (buckets.size() != expected_len) {
        std::ostringstream msg;
        msg << name << ": expected " << expected_len << " entries, got " << buckets.size();
        throw InvariantError(msg.str());
    }
    if (buckets.empty()) return;
    if (buckets.front() != 0) {
        throw InvariantError(name + ": bucket ids must start at 0");
    }
    for (std::size_t i = 1; i < buckets.size(); ++i) {
        const int step = buckets[i] - buckets[i - 1];
        if (step < 0) {
            throw InvariantError(name + ": bucket ids must be monotone non-decreasing");
        }
        if (step > 1) {
            throw InvariantError(name + ": bucket ids must cover a contiguous range");
        }
    }
}

} // namespace

void EmbeddingMatrix::validate(const std::string& name) const {
    if (dim < 1) {
        throw InvariantError(name + ": dim must be >= 1");
    }
    if (values.size() != rows * dim) {
        std::ostringstream msg;
        msg << name << ": values length " << values.size() << " != rows*dim "
            << rows * dim;
        throw InvariantError(msg.str());
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream msg;
            msg << name << ": non-finite value at index " << i;
            throw InvariantError(msg.str());
        }
    }
}

void VideoStream::validate() const {
    if (grid_h < 1 || grid_w < 1) {
        throw InvariantError("video: grid_h and grid_w must be >= 1");
    }
    if (tokens.rows != num_frames * patches_per_frame()) {
        std::ostringstream msg;
        msg << "video: token rows " << tokens.rows << " != num_frames*patches "
            << num_frames * patches_per_frame();
        throw InvariantError(msg.str());
    }
    tokens.validate("video.tokens");
    check_bucket_vector("frame_bucket", frame_bucket, num_frames);
}

void AudioStream::validate() const {
    if (tokens.rows != num_tokens) {
        std::ostringstream msg;
        msg << "audio: token rows " << tokens.rows << " != num_tokens " << num_tokens;
        throw InvariantError(msg.str());
    }
    tokens.validate("audio.tokens");
    check_bucket_vector("token_bucket", token_bucket, num_tokens);
}

void validate_pair(const VideoStream& video, const AudioStream& audio) {
    video.validate();
    audio.validate();
    if (video.tokens.rows > 0 && audio.tokens.rows > 0 &&
        video.tokens.dim != audio.tokens.dim) {
        throw InvariantError("stream pair: embedding dim mismatch between video and audio");
    }
    if (video.num_frames > 0 && audio.num_tokens > 0 &&
        video.num_buckets() != audio.num_buckets()) {
        std::ostringstream msg;
        msg << "stream pair: frame_bucket has " << video.num_buckets()
            << " buckets but token_bucket has " << audio.num_buckets();
        throw InvariantError(msg.str());
    }
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError("hyperparams." + field + ": " + what);
}

void in_unit(double v, const std::string& field) {
    require(v >= 0.0 && v <= 1.0, field, "must lie in [0, 1]");
}

} // namespace

void HyperParams::validate() const {
    in_unit(rho_a, "rho_a");
    in_unit(rho_v, "rho_v");
    // Thresholds compare against cosines; values above 1 disable merging and
    // are allowed for that purpose.
    require(tau_s >= 0.0 && tau_s <= 2.0, "tau_s", "must lie in [0, 2]");
    require(tau_t >= 0.0 && tau_t <= 2.0, "tau_t", "must lie in [0, 2]");
    in_unit(beta, "beta");
    require(lambda_c >= 0.0, "lambda_c", "must be >= 0");
    in_unit(theta_anchor, "theta_anchor");
    in_unit(contextual_ratio, "contextual_ratio");
    in_unit(v_min, "v_min");
    in_unit(v_max, "v_max");
    in_unit(a_min, "a_min");
    in_unit(a_max, "a_max");
    require(alpha >= 0.0, "alpha", "must be >= 0");
    require(v_min <= v_max, "v_min", "must satisfy v_min <= v_max");
    require(a_min <= a_max, "a_min", "must satisfy a_min <= a_max");
    require(group_size >= 1, "group_size", "must be >= 1");
    require(sa_min >= 1 && sa_min <= sa_max, "sa_min", "must satisfy 1 <= sa_min <= sa_max");
    require(sv_min >= 1 && sv_min <= sv_max, "sv_min", "must satisfy 1 <= sv_min <= sv_max");
    require(dp_band_ratio >= 1.0, "dp_band_ratio", "must be >= 1");
    require(dp_min_window >= 1, "dp_min_window", "must be >= 1");
}

void ScenarioSpec::validate() const {
    if (num_frames < 1) throw ConfigError("scenario.num_frames: must be >= 1");
    if (grid_h < 1 || grid_w < 1) throw ConfigError("scenario.grid: must be >= 1x1");
    if (num_audio_tokens < 1) throw ConfigError("scenario.num_audio_tokens: must be >= 1");
    if (dim < 1) throw ConfigError("scenario.dim: must be >= 1");
    if (num_events < 1) throw ConfigError("scenario.num_events: must be >= 1");
    if (boundary_jitter < 0) throw ConfigError("scenario.boundary_jitter: must be >= 0");
    if (noise_sigma < 0.0) throw ConfigError("scenario.noise_sigma: must be >= 0");
}

} // namespace orf
