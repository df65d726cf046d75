#include "orf/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "orf/parallel.hpp"

namespace orf {

namespace {

constexpr double kNormEps = 1e-12;

template <typename A, typename B>
double cosine_impl(const A* a, const B* b, std::size_t n) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(a[i]);
        const double y = static_cast<double>(b[i]);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na <= kNormEps || nb <= kNormEps) return 0.0;
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

void check_dims(std::size_t a, std::size_t b) {
    if (a != b) throw InvariantError("cosine: dimension mismatch");
}

} // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
    check_dims(u.size(), v.size());
    return cosine_impl(u.data(), v.data(), u.size());
}

double cosine(std::span<const double> u, std::span<const double> v) {
    check_dims(u.size(), v.size());
    return cosine_impl(u.data(), v.data(), u.size());
}

double cosine(std::span<const double> u, std::span<const float> v) {
    check_dims(u.size(), v.size());
    return cosine_impl(u.data(), v.data(), u.size());
}

Matrix frame_embeddings(const VideoStream& video) {
    video.validate();
    const std::size_t patches = video.patches_per_frame();
    const std::size_t dim = video.tokens.dim;
    Matrix frames(video.num_frames, dim);
    for (std::size_t f = 0; f < video.num_frames; ++f) {
        for (std::size_t p = 0; p < patches; ++p) {
            const auto row = video.patch(f, p);
            for (std::size_t i = 0; i < dim; ++i) {
                frames.at(f, i) += static_cast<double>(row[i]);
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            frames.at(f, i) /= static_cast<double>(patches);
        }
    }
    return frames;
}

Matrix similarity_matrix(const Matrix& frames, const AudioStream& audio) {
    if (frames.cols != audio.tokens.dim && frames.rows > 0 && audio.num_tokens > 0) {
        throw InvariantError("similarity_matrix: dimension mismatch");
    }
    Matrix sim(frames.rows, audio.num_tokens);
    parallel_for(frames.rows, [&](std::size_t f) {
        const auto frame = frames.row(f);
        for (std::size_t t = 0; t < audio.num_tokens; ++t) {
            sim.at(f, t) = cosine(frame, audio.tokens.row(t));
        }
    });
    return sim;
}

std::vector<std::uint8_t> neighborhood_mask(const VideoStream& video,
                                            const AudioStream& audio,
                                            BoundaryMode mode) {
    const int k = video.num_buckets();
    if (k != audio.num_buckets()) {
        throw InvariantError("neighborhood_mask: bucket count mismatch between streams");
    }
    const std::size_t F = video.num_frames;
    const std::size_t N = audio.num_tokens;
    std::vector<std::uint8_t> mask(F * N, 0);
    for (std::size_t f = 0; f < F; ++f) {
        const int b = video.frame_bucket[f];
        int lo = b - 1, hi = b + 1;
        if (mode == BoundaryMode::bucket_only) {
            // Literal boundary rule: only the bucket itself at either end.
            if (b == 0) lo = hi = 0;
            if (b == k - 1) lo = hi = k - 1;
        } else {
            lo = std::max(lo, 0);
            hi = std::min(hi, k - 1);
        }
        for (std::size_t t = 0; t < N; ++t) {
            const int a = audio.token_bucket[t];
            mask[f * N + t] = (a >= lo && a <= hi) ? 1 : 0;
        }
    }
    return mask;
}

CorrespondenceField CorrespondenceField::from_parts(Matrix sim,
                                                    std::vector<std::uint8_t> mask) {
    const std::size_t F = sim.rows;
    const std::size_t N = sim.cols;
    if (mask.size() != F * N) {
        throw InvariantError("correspondence field: mask size does not match sim");
    }
    for (double v : sim.data) {
        if (!(v >= -1.0 && v <= 1.0)) {
            throw InvariantError("correspondence field: similarity outside [-1, 1]");
        }
    }

    CorrespondenceField field;
    field.num_frames = F;
    field.num_audio = N;
    field.masked = Matrix(F, N);
    for (std::size_t i = 0; i < F * N; ++i) {
        field.masked.data[i] = mask[i] ? sim.data[i] : 0.0;
    }
    field.sim = std::move(sim);
    field.mask = std::move(mask);

    field.masked_prefix.assign((F + 1) * (N + 1), 0.0);
    field.mask_prefix.assign((F + 1) * (N + 1), 0.0);
    const std::size_t stride = N + 1;
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t t = 0; t < N; ++t) {
            const std::size_t cur = (f + 1) * stride + (t + 1);
            field.masked_prefix[cur] = field.masked.at(f, t) +
                                       field.masked_prefix[f * stride + (t + 1)] +
                                       field.masked_prefix[(f + 1) * stride + t] -
                                       field.masked_prefix[f * stride + t];
            field.mask_prefix[cur] = static_cast<double>(field.mask[f * N + t]) +
                                     field.mask_prefix[f * stride + (t + 1)] +
                                     field.mask_prefix[(f + 1) * stride + t] -
                                     field.mask_prefix[f * stride + t];
        }
    }
    return field;
}

namespace {

double block_sum(const std::vector<double>& prefix, std::size_t stride, std::size_t f_lo,
                 std::size_t f_hi, std::size_t t_lo, std::size_t t_hi) {
    return prefix[f_hi * stride + t_hi] - prefix[f_lo * stride + t_hi] -
           prefix[f_hi * stride + t_lo] + prefix[f_lo * stride + t_lo];
}

} // namespace

double CorrespondenceField::masked_sum(std::size_t f_lo, std::size_t f_hi,
                                       std::size_t t_lo, std::size_t t_hi) const {
    return block_sum(masked_prefix, num_audio + 1, f_lo, f_hi, t_lo, t_hi);
}

double CorrespondenceField::mask_sum(std::size_t f_lo, std::size_t f_hi,
                                     std::size_t t_lo, std::size_t t_hi) const {
    return block_sum(mask_prefix, num_audio + 1, f_lo, f_hi, t_lo, t_hi);
}

CorrespondenceField build_field(const VideoStream& video, const AudioStream& audio,
                                BoundaryMode mode) {
    validate_pair(video, audio);
    Matrix frames = frame_embeddings(video);
    Matrix sim = similarity_matrix(frames, audio);
    std::vector<std::uint8_t> mask = neighborhood_mask(video, audio, mode);
    return CorrespondenceField::from_parts(std::move(sim), std::move(mask));
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    char buf[32];
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.6f", m.at(r, c));
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

void write_mask_csv(std::ostream& out, const std::vector<std::uint8_t>& mask,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ',';
            out << static_cast<int>(mask[r * cols + c]);
        }
        out << '\n';
    }
}

} // namespace orf
