#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "orf/correspondence.hpp"
#include "orf/chunk_refine.hpp"
#include "orf/rng.hpp"
#include "orf/types.hpp"

namespace orf::testutil {

// Random similarity field in [-1, 1] with an all-ones mask.
inline CorrespondenceField random_field(Rng& rng, std::size_t F, std::size_t N) {
    Matrix sim(F, N);
    for (auto& v : sim.data) v = rng.uniform(-1.0, 1.0);
    std::vector<std::uint8_t> mask(F * N, 1);
    return CorrespondenceField::from_parts(std::move(sim), std::move(mask));
}

// Random field with each mask entry on with probability keep_prob.
inline CorrespondenceField random_masked_field(Rng& rng, std::size_t F, std::size_t N,
                                               double keep_prob) {
    Matrix sim(F, N);
    for (auto& v : sim.data) v = rng.uniform(-1.0, 1.0);
    std::vector<std::uint8_t> mask(F * N, 0);
    for (auto& m : mask) m = rng.uniform01() < keep_prob ? 1 : 0;
    return CorrespondenceField::from_parts(std::move(sim), std::move(mask));
}

// Independent joint-segmentation counter: number of ways to cut F frames and
// N audio tokens into the same number of bounded pieces.
inline std::size_t count_joint_segmentations(std::size_t F, std::size_t N, int sv_min,
                                             int sv_max, int sa_min, int sa_max) {
    std::vector<std::size_t> memo((F + 1) * (N + 1), 0);
    std::vector<bool> known((F + 1) * (N + 1), false);
    const auto idx = [N](std::size_t f, std::size_t n) { return f * (N + 1) + n; };
    const std::function<std::size_t(std::size_t, std::size_t)> count =
        [&](std::size_t f, std::size_t n) -> std::size_t {
        if (f == 0 && n == 0) return 1;
        if (f == 0 || n == 0) return 0;
        if (known[idx(f, n)]) return memo[idx(f, n)];
        std::size_t total = 0;
        for (int dv = sv_min; dv <= sv_max && static_cast<std::size_t>(dv) <= f; ++dv) {
            for (int da = sa_min; da <= sa_max && static_cast<std::size_t>(da) <= n; ++da) {
                total += count(f - static_cast<std::size_t>(dv),
                               n - static_cast<std::size_t>(da));
            }
        }
        known[idx(f, n)] = true;
        memo[idx(f, n)] = total;
        return total;
    };
    return count(F, N);
}

// Independent scoring path: per-chunk mean via a direct double loop over
// sim and mask (no prefix sums).
inline double direct_segmentation_score(const RefinedChunking& chunking,
                                        const CorrespondenceField& field,
                                        double lambda_c) {
    double acc = 0.0;
    for (const auto& c : chunking.chunks) {
        double s = 0.0, m = 0.0;
        for (std::size_t f = c.f_lo - 1; f < c.f_hi; ++f) {
            for (std::size_t t = c.t_lo - 1; t < c.t_hi; ++t) {
                const double mv = field.mask[f * field.num_audio + t] ? 1.0 : 0.0;
                s += mv * field.sim.at(f, t);
                m += mv;
            }
        }
        const double phi = m == 0.0 ? -std::numeric_limits<double>::infinity() : s / m;
        acc += phi - lambda_c;
    }
    return acc;
}

// Bounds sampler for oracle cross-checks: narrow enough that exhaustive
// enumeration stays small. Audio bounds are anchored around N/m for a chunk
// count m the video bounds admit, so any (F, N) pair is jointly feasible.
inline HyperParams random_feasible_bounds(Rng& rng, std::size_t F, std::size_t N) {
    HyperParams params;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        params.sv_min = static_cast<int>(rng.uniform_int(1, 2));
        params.sv_max = params.sv_min + static_cast<int>(rng.uniform_int(0, 2));
        const int m_lo = static_cast<int>(
            (F + static_cast<std::size_t>(params.sv_max) - 1) /
            static_cast<std::size_t>(params.sv_max));
        const int m_hi = static_cast<int>(F / static_cast<std::size_t>(params.sv_min));
        int m = static_cast<int>(rng.uniform_int(m_lo, std::max(m_lo, m_hi)));
        m = std::min(m, static_cast<int>(N));
        const int base = static_cast<int>(N) / m;
        params.sa_min = std::max(1, base - static_cast<int>(rng.uniform_int(0, 2)));
        params.sa_max = base + static_cast<int>(rng.uniform_int(1, 3));
        bool ok = false;
        feasible_chunk_counts(F, N, params, &ok);
        if (ok) return params;
    }
    throw std::runtime_error("no feasible bounds sampled");
}

} // namespace orf::testutil
