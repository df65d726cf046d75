#include "orf/chunk_refine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace orf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kUnreached = std::numeric_limits<int>::max();

// ------------------------------------------------------------------ scoring
//
// Path scores are sums of per-chunk terms (phi_g and -lambda_c). Plain
// double accumulation makes the sum depend on the order chunks are visited:
// two segmentations with mathematically equal objectives can differ by an
// ulp at intermediate states, which silently overrides the documented
// count/lexicographic tie-break and desynchronizes the DP from the
// exhaustive oracle. Scores are therefore kept as exact nonoverlapping
// expansions (two-sum cascades); comparison is exact, so ties are decided
// by the tie-break alone, identically in every solver.

inline void two_sum(double a, double b, double& hi, double& lo) {
    hi = a + b;
    const double bb = hi - a;
    const double aa = hi - bb;
    lo = (a - aa) + (b - bb);
}

struct PathScore {
    static constexpr std::size_t kCap = 28;

    bool neg_inf = false;
    std::array<double, kCap> comp{}; // nonoverlapping, increasing magnitude
    std::size_t size = 0;

    void add(double term) {
        if (neg_inf) return;
        if (term == kNegInf) {
            neg_inf = true;
            size = 0;
            return;
        }
        std::array<double, kCap + 1> out{};
        std::size_t n = 0;
        double q = term;
        for (std::size_t i = 0; i < size; ++i) {
            double lo;
            two_sum(q, comp[i], q, lo);
            if (lo != 0.0) out[n++] = lo;
        }
        if (q != 0.0) out[n++] = q;
        if (n > kCap) throw InvariantError("path score expansion overflow");
        std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), comp.begin());
        size = n;
    }

    double approx() const {
        if (neg_inf) return kNegInf;
        double total = 0.0;
        for (std::size_t i = 0; i < size; ++i) total += comp[i];
        return total;
    }

    // sign of (a - b), exact
    static int compare(const PathScore& a, const PathScore& b) {
        if (a.neg_inf || b.neg_inf) {
            if (a.neg_inf && b.neg_inf) return 0;
            return a.neg_inf ? -1 : 1;
        }
        PathScore diff = a;
        for (std::size_t i = 0; i < b.size; ++i) diff.add(-b.comp[i]);
        if (diff.size == 0) return 0;
        const double top = diff.comp[diff.size - 1]; // dominates the total
        return top > 0.0 ? 1 : (top < 0.0 ? -1 : 0);
    }
};

struct EndSeq {
    std::vector<std::pair<std::size_t, std::size_t>> ends;

    // true when a is lexicographically earlier than b
    static bool earlier(const EndSeq& a, const EndSeq& b) {
        return std::lexicographical_compare(a.ends.begin(), a.ends.end(), b.ends.begin(),
                                            b.ends.end());
    }
};

EndSeq ends_of(const RefinedChunking& c) {
    EndSeq seq;
    seq.ends.reserve(c.chunks.size());
    for (const auto& chunk : c.chunks) seq.ends.emplace_back(chunk.f_hi, chunk.t_hi);
    return seq;
}

// (score desc, count asc, ends lex asc)
bool better_solution(const PathScore& score_a, const EndSeq& ends_a,
                     const PathScore& score_b, const EndSeq& ends_b) {
    const int c = PathScore::compare(score_a, score_b);
    if (c != 0) return c > 0;
    if (ends_a.ends.size() != ends_b.ends.size()) {
        return ends_a.ends.size() < ends_b.ends.size();
    }
    return EndSeq::earlier(ends_a, ends_b);
}

} // namespace

bool DpTable::reached(std::size_t u, std::size_t q) const {
    return count[u * (num_audio + 1) + q] != kUnreached;
}

double block_score(const CorrespondenceField& field, std::size_t i, std::size_t u,
                   std::size_t j, std::size_t q) {
    if (!(i < u && u <= field.num_frames && j < q && q <= field.num_audio)) {
        std::ostringstream msg;
        msg << "block_score: indices (" << i << ", " << u << ", " << j << ", " << q
            << ") out of range for " << field.num_frames << "x" << field.num_audio;
        throw InvariantError(msg.str());
    }
    const double msum = field.mask_sum(i, u, j, q);
    if (msum == 0.0) return kNegInf;
    return field.masked_sum(i, u, j, q) / msum;
}

std::pair<int, int> feasible_chunk_counts(std::size_t F, std::size_t N,
                                          const HyperParams& params, bool* ok) {
    const auto ceil_div = [](std::size_t a, std::size_t b) {
        return static_cast<int>((a + b - 1) / b);
    };
    const int lo = std::max({1, ceil_div(F, static_cast<std::size_t>(params.sv_max)),
                             ceil_div(N, static_cast<std::size_t>(params.sa_max))});
    const int hi = static_cast<int>(
        std::min(F / static_cast<std::size_t>(params.sv_min),
                 N / static_cast<std::size_t>(params.sa_min)));
    if (ok) *ok = lo <= hi;
    return {lo, hi};
}

double band_halfwidth(std::size_t F, std::size_t N, const HyperParams& params) {
    const double rate = static_cast<double>(N) / static_cast<double>(F);
    return std::max(static_cast<double>(params.dp_min_window),
                    params.dp_band_ratio * rate * static_cast<double>(params.sv_max));
}

bool in_band(std::size_t u, std::size_t q, std::size_t F, std::size_t N,
             const HyperParams& params) {
    const double rate = static_cast<double>(N) / static_cast<double>(F);
    const double expected = static_cast<double>(u) * rate;
    return std::abs(static_cast<double>(q) - expected) <= band_halfwidth(F, N, params);
}

bool chunking_better(const RefinedChunking& a, const RefinedChunking& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunks.size() != b.chunks.size()) return a.chunks.size() < b.chunks.size();
    return EndSeq::earlier(ends_of(a), ends_of(b));
}

namespace {

void throw_infeasible(std::size_t F, std::size_t N, const HyperParams& params) {
    std::ostringstream msg;
    msg << "no joint segmentation: " << F << " frames with chunk sizes in ["
        << params.sv_min << ", " << params.sv_max << "] and " << N
        << " audio tokens with chunk sizes in [" << params.sa_min << ", " << params.sa_max
        << "] admit no common chunk count";
    throw ConfigError(msg.str());
}

struct DpState {
    std::size_t F = 0, N = 0;
    std::vector<PathScore> score;
    std::vector<int> count;
    std::vector<int> back_i, back_j;

    std::size_t idx(std::size_t u, std::size_t q) const { return u * (N + 1) + q; }

    // Boundary ends of the stored optimum at (u, q), forward order,
    // excluding the (0, 0) origin.
    EndSeq path_ends(std::size_t u, std::size_t q) const {
        EndSeq seq;
        std::size_t cu = u, cq = q;
        while (!(cu == 0 && cq == 0)) {
            seq.ends.emplace_back(cu, cq);
            const std::size_t at = idx(cu, cq);
            cu = static_cast<std::size_t>(back_i[at]);
            cq = static_cast<std::size_t>(back_j[at]);
        }
        std::reverse(seq.ends.begin(), seq.ends.end());
        return seq;
    }
};

} // namespace

RefinedChunking refine_chunks_dp(const CorrespondenceField& field,
                                 const HyperParams& params, bool banded,
                                 DpTable* table_out) {
    params.validate();
    const std::size_t F = field.num_frames;
    const std::size_t N = field.num_audio;
    bool feasible = false;
    feasible_chunk_counts(F, N, params, &feasible);
    if (!feasible) throw_infeasible(F, N, params);

    DpState dp;
    dp.F = F;
    dp.N = N;
    const std::size_t cells = (F + 1) * (N + 1);
    dp.score.assign(cells, PathScore{});
    dp.count.assign(cells, kUnreached);
    dp.back_i.assign(cells, -1);
    dp.back_j.assign(cells, -1);
    dp.count[0] = 0;

    const std::size_t sv_min = static_cast<std::size_t>(params.sv_min);
    const std::size_t sv_max = static_cast<std::size_t>(params.sv_max);
    const std::size_t sa_min = static_cast<std::size_t>(params.sa_min);
    const std::size_t sa_max = static_cast<std::size_t>(params.sa_max);

    for (std::size_t u = 1; u <= F; ++u) {
        if (u < sv_min) continue;
        const std::size_t i_lo = u >= sv_max ? u - sv_max : 0;
        const std::size_t i_hi = u - sv_min;
        for (std::size_t q = 1; q <= N; ++q) {
            if (q < sa_min) continue;
            if (banded && !in_band(u, q, F, N, params)) continue;
            const std::size_t j_lo = q >= sa_max ? q - sa_max : 0;
            const std::size_t j_hi = q - sa_min;
            const std::size_t at = dp.idx(u, q);

            for (std::size_t i = i_lo; i <= i_hi; ++i) {
                for (std::size_t j = j_lo; j <= j_hi; ++j) {
                    const std::size_t prev = dp.idx(i, j);
                    if (dp.count[prev] == kUnreached) continue;
                    const double msum = field.mask_sum(i, u, j, q);
                    const double phi =
                        msum == 0.0 ? kNegInf : field.masked_sum(i, u, j, q) / msum;

                    PathScore cand = dp.score[prev];
                    cand.add(phi);
                    cand.add(-params.lambda_c);
                    const int cand_count = dp.count[prev] + 1;

                    bool take = false;
                    if (dp.count[at] == kUnreached) {
                        take = true;
                    } else {
                        const int cmp = PathScore::compare(cand, dp.score[at]);
                        if (cmp > 0) {
                            take = true;
                        } else if (cmp == 0) {
                            if (cand_count < dp.count[at]) {
                                take = true;
                            } else if (cand_count == dp.count[at]) {
                                EndSeq candidate = dp.path_ends(i, j);
                                candidate.ends.emplace_back(u, q);
                                take = EndSeq::earlier(candidate, dp.path_ends(u, q));
                            }
                        }
                    }
                    if (take) {
                        dp.score[at] = cand;
                        dp.count[at] = cand_count;
                        dp.back_i[at] = static_cast<int>(i);
                        dp.back_j[at] = static_cast<int>(j);
                    }
                }
            }
        }
    }

    if (table_out) {
        table_out->num_frames = F;
        table_out->num_audio = N;
        table_out->best.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            table_out->best[c] =
                dp.count[c] == kUnreached ? kNegInf : dp.score[c].approx();
        }
        table_out->count = dp.count;
        table_out->back.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            table_out->back[c] = {dp.back_i[c], dp.back_j[c]};
        }
    }

    if (dp.count[dp.idx(F, N)] == kUnreached) {
        if (banded) {
            std::ostringstream msg;
            msg << "banded segmentation infeasible for " << F << "x" << N
                << " although an unbanded segmentation exists; increase dp_band_ratio ("
                << params.dp_band_ratio << ") or dp_min_window (" << params.dp_min_window
                << ")";
            throw ConfigError(msg.str());
        }
        throw InvariantError("dp: final state unreached after feasibility precheck");
    }

    RefinedChunking result;
    result.score = dp.score[dp.idx(F, N)].approx();
    std::size_t cu = F, cq = N;
    while (!(cu == 0 && cq == 0)) {
        const std::size_t at = dp.idx(cu, cq);
        const std::size_t pi = static_cast<std::size_t>(dp.back_i[at]);
        const std::size_t pj = static_cast<std::size_t>(dp.back_j[at]);
        result.chunks.push_back(ChunkSpan{pi + 1, cu, pj + 1, cq});
        cu = pi;
        cq = pj;
    }
    std::reverse(result.chunks.begin(), result.chunks.end());
    return result;
}

RefinedChunking refine_chunks_bruteforce(const CorrespondenceField& field,
                                         const HyperParams& params,
                                         std::size_t* enumerated_out) {
    params.validate();
    const std::size_t F = field.num_frames;
    const std::size_t N = field.num_audio;
    if (F > 12 || N > 40) {
        std::ostringstream msg;
        msg << "brute-force guard: " << F << "x" << N << " exceeds 12x40";
        throw ConfigError(msg.str());
    }
    bool feasible = false;
    feasible_chunk_counts(F, N, params, &feasible);
    if (!feasible) throw_infeasible(F, N, params);

    const std::size_t sv_min = static_cast<std::size_t>(params.sv_min);
    const std::size_t sv_max = static_cast<std::size_t>(params.sv_max);
    const std::size_t sa_min = static_cast<std::size_t>(params.sa_min);
    const std::size_t sa_max = static_cast<std::size_t>(params.sa_max);

    // Reverse reachability so the walk never enters dead ends.
    std::vector<std::uint8_t> feas((F + 1) * (N + 1), 0);
    const auto idx = [N](std::size_t u, std::size_t q) { return u * (N + 1) + q; };
    feas[idx(F, N)] = 1;
    for (std::size_t u = F + 1; u-- > 0;) {
        for (std::size_t q = N + 1; q-- > 0;) {
            if (u == F && q == N) continue;
            for (std::size_t dv = sv_min; dv <= sv_max && !feas[idx(u, q)]; ++dv) {
                if (u + dv > F) break;
                for (std::size_t da = sa_min; da <= sa_max; ++da) {
                    if (q + da > N) break;
                    if (feas[idx(u + dv, q + da)]) {
                        feas[idx(u, q)] = 1;
                        break;
                    }
                }
            }
        }
    }

    std::size_t enumerated = 0;
    RefinedChunking incumbent;
    PathScore incumbent_score;
    bool have_incumbent = false;
    EndSeq incumbent_ends;

    std::vector<ChunkSpan> current;

    const std::function<void(std::size_t, std::size_t, const PathScore&)> walk =
        [&](std::size_t u, std::size_t q, const PathScore& score) {
            if (u == F && q == N) {
                ++enumerated;
                EndSeq cand_ends;
                cand_ends.ends.reserve(current.size());
                for (const auto& c : current) cand_ends.ends.emplace_back(c.f_hi, c.t_hi);
                if (!have_incumbent ||
                    better_solution(score, cand_ends, incumbent_score, incumbent_ends)) {
                    incumbent.chunks = current;
                    incumbent_score = score;
                    incumbent_ends = std::move(cand_ends);
                    have_incumbent = true;
                }
                return;
            }
            for (std::size_t dv = sv_min; dv <= sv_max; ++dv) {
                if (u + dv > F) break;
                for (std::size_t da = sa_min; da <= sa_max; ++da) {
                    if (q + da > N) break;
                    if (!feas[idx(u + dv, q + da)]) continue;
                    const double phi = block_score(field, u, u + dv, q, q + da);
                    PathScore next = score;
                    next.add(phi);
                    next.add(-params.lambda_c);
                    current.push_back(ChunkSpan{u + 1, u + dv, q + 1, q + da});
                    walk(u + dv, q + da, next);
                    current.pop_back();
                }
            }
        };
    walk(0, 0, PathScore{});

    if (enumerated_out) *enumerated_out = enumerated;
    if (!have_incumbent) {
        throw InvariantError("brute force: no segmentation enumerated after precheck");
    }
    incumbent.score = incumbent_score.approx();
    return incumbent;
}

double segmentation_score(const RefinedChunking& chunking,
                          const CorrespondenceField& field, double lambda_c) {
    const std::size_t F = field.num_frames;
    const std::size_t N = field.num_audio;
    if (chunking.chunks.empty()) {
        throw InvariantError("chunking structure: empty chunk list");
    }
    std::size_t f_cursor = 1, t_cursor = 1;
    for (const auto& c : chunking.chunks) {
        if (c.f_lo != f_cursor || c.t_lo != t_cursor) {
            throw InvariantError("chunking structure: gap or overlap between chunks");
        }
        if (c.f_hi < c.f_lo || c.t_hi < c.t_lo) {
            throw InvariantError("chunking structure: empty interval");
        }
        f_cursor = c.f_hi + 1;
        t_cursor = c.t_hi + 1;
    }
    if (f_cursor != F + 1 || t_cursor != N + 1) {
        throw InvariantError("chunking structure: does not cover the full field");
    }

    PathScore acc;
    for (const auto& c : chunking.chunks) {
        acc.add(block_score(field, c.f_lo - 1, c.f_hi, c.t_lo - 1, c.t_hi));
        acc.add(-lambda_c);
    }
    return acc.approx();
}

RefinedChunking native_chunking(const VideoStream& video, const AudioStream& audio) {
    validate_pair(video, audio);
    const int k = video.num_buckets();
    if (k == 0 || audio.num_buckets() != k) {
        throw InvariantError("native_chunking: streams carry no shared bucketization");
    }
    RefinedChunking chunking;
    for (int b = 0; b < k; ++b) {
        ChunkSpan span;
        span.f_lo = static_cast<std::size_t>(
                        std::find(video.frame_bucket.begin(), video.frame_bucket.end(), b) -
                        video.frame_bucket.begin()) +
                    1;
        span.f_hi = static_cast<std::size_t>(
            std::find_if(video.frame_bucket.rbegin(), video.frame_bucket.rend(),
                         [b](int x) { return x == b; })
                .base() -
            video.frame_bucket.begin());
        span.t_lo = static_cast<std::size_t>(
                        std::find(audio.token_bucket.begin(), audio.token_bucket.end(), b) -
                        audio.token_bucket.begin()) +
                    1;
        span.t_hi = static_cast<std::size_t>(
            std::find_if(audio.token_bucket.rbegin(), audio.token_bucket.rend(),
                         [b](int x) { return x == b; })
                .base() -
            audio.token_bucket.begin());
        chunking.chunks.push_back(span);
    }
    return chunking;
}

std::string chunking_to_json(const RefinedChunking& chunking,
                             const CorrespondenceField& field,
                             const HyperParams& params, bool banded) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : chunking.chunks) {
        chunks.push_back({
            {"f_lo", c.f_lo},
            {"f_hi", c.f_hi},
            {"t_lo", c.t_lo},
            {"t_hi", c.t_hi},
            {"phi", block_score(field, c.f_lo - 1, c.f_hi, c.t_lo - 1, c.t_hi)},
        });
    }
    const nlohmann::json j{
        {"chunks", chunks},
        {"score", chunking.score},
        {"lambda_c", params.lambda_c},
        {"banded", banded},
        {"band_width", band_halfwidth(field.num_frames, field.num_audio, params)},
    };
    return j.dump(2);
}

} // namespace orf
