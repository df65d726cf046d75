#include "orf/audio_compress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "orf/correspondence.hpp"

namespace orf {

namespace {

// round-half-up on nonnegative values
std::size_t round_count(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

} // namespace

void ImportanceScores::validate(std::size_t chunk_size) const {
    if (values.size() != chunk_size) {
        throw InvariantError("importance scores: length does not match chunk size");
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvariantError("importance scores: values must be finite and >= 0");
        }
    }
}

ImportanceScores norm_importance(const AudioStream& audio, std::size_t t_begin,
                                 std::size_t t_end) {
    ImportanceScores scores;
    scores.source = "norm";
    scores.values.reserve(t_end - t_begin);
    for (std::size_t t = t_begin; t < t_end; ++t) {
        const auto row = audio.tokens.row(t);
        double sq = 0.0;
        for (float v : row) sq += static_cast<double>(v) * static_cast<double>(v);
        scores.values.push_back(std::sqrt(sq));
    }
    return scores;
}

AudioBudget audio_budget(const HyperParams& params, double R_v) {
    if (!(R_v >= 0.0 && R_v <= 1.0)) {
        throw InvariantError("audio_budget: R_v must lie in [0, 1]");
    }
    const double raw = params.rho_a - params.beta * (R_v - (1.0 - params.rho_v));
    const double m_a = std::min(params.a_max, std::max(params.a_min, raw));
    return AudioBudget{m_a, 1.0 - m_a};
}

std::vector<std::size_t> detect_anchors(const AudioStream& audio, std::size_t t_begin,
                                        std::size_t t_end, double theta) {
    if (t_begin >= t_end || t_end > audio.num_tokens) {
        throw InvariantError("detect_anchors: empty or out-of-range chunk");
    }
    std::vector<std::size_t> anchors{0};
    for (std::size_t t = t_begin + 1; t < t_end; ++t) {
        if (cosine(audio.tokens.row(t - 1), audio.tokens.row(t)) < theta) {
            anchors.push_back(t - t_begin);
        }
    }
    return anchors;
}

std::vector<std::size_t> interval_map(std::size_t chunk_size,
                                      const std::vector<std::size_t>& anchors) {
    std::vector<std::size_t> interval_of(chunk_size, 0);
    std::size_t current = 0;
    for (std::size_t t = 0; t < chunk_size; ++t) {
        if (current + 1 < anchors.size() && t >= anchors[current + 1]) ++current;
        interval_of[t] = current;
    }
    return interval_of;
}

RetainedSelection select_retained(std::size_t chunk_size, const ImportanceScores& scores,
                                  const std::vector<std::size_t>& anchors, double m_a,
                                  double contextual_ratio) {
    scores.validate(chunk_size);
    RetainedSelection sel;
    sel.target = std::max<std::size_t>(
        1, round_count((1.0 - m_a) * static_cast<double>(chunk_size)));
    sel.target = std::min(sel.target, chunk_size);

    std::size_t k_ctx = round_count(contextual_ratio * static_cast<double>(chunk_size));
    k_ctx = std::min({k_ctx, sel.target, anchors.size()});
    const std::size_t k_dom = sel.target - k_ctx;

    // score-descending, index-ascending
    std::vector<std::size_t> by_score(chunk_size);
    std::iota(by_score.begin(), by_score.end(), 0);
    std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
        return scores.values[a] > scores.values[b];
    });

    std::vector<std::uint8_t> retained(chunk_size, 0);
    std::vector<std::size_t> dominant(by_score.begin(),
                                      by_score.begin() + static_cast<std::ptrdiff_t>(k_dom));
    for (std::size_t t : dominant) retained[t] = 1;

    const std::vector<std::size_t> interval_of = interval_map(chunk_size, anchors);
    std::vector<std::uint8_t> interval_has_dominant(anchors.size(), 0);
    for (std::size_t t : dominant) interval_has_dominant[interval_of[t]] = 1;

    // Coverage-first contextual anchors: intervals without a dominant member
    // come first, earlier anchors break ties.
    std::vector<std::size_t> eligible;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        if (!retained[anchors[a]]) eligible.push_back(a);
    }
    std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
        const int cov_a = interval_has_dominant[a] ? 1 : 0;
        const int cov_b = interval_has_dominant[b] ? 1 : 0;
        if (cov_a != cov_b) return cov_a < cov_b;
        return a < b;
    });

    std::vector<std::size_t> contextual;
    for (std::size_t a : eligible) {
        if (contextual.size() == k_ctx) break;
        contextual.push_back(anchors[a]);
        retained[anchors[a]] = 1;
    }
    // Anchors may already be dominant; backfill with the next best scorers so
    // the retained total always equals the target.
    for (std::size_t t : by_score) {
        if (dominant.size() + contextual.size() == sel.target) break;
        if (retained[t]) continue;
        dominant.push_back(t);
        retained[t] = 1;
    }

    std::sort(dominant.begin(), dominant.end());
    std::sort(contextual.begin(), contextual.end());
    sel.dominant = std::move(dominant);
    sel.contextual = std::move(contextual);
    for (std::size_t t = 0; t < chunk_size; ++t) {
        if (!retained[t]) sel.residual.push_back(t);
    }
    return sel;
}

std::vector<int> assign_to_anchors(const AudioStream& audio, std::size_t t_begin,
                                   const std::vector<std::size_t>& residuals,
                                   const std::vector<std::size_t>& retained_anchors,
                                   const std::vector<std::size_t>& interval_of) {
    std::vector<int> pi(residuals.size(), -1);
    if (retained_anchors.empty()) return pi;

    const std::vector<std::size_t> anchor_interval = [&] {
        std::vector<std::size_t> out(retained_anchors.size());
        for (std::size_t i = 0; i < retained_anchors.size(); ++i) {
            out[i] = interval_of[retained_anchors[i]];
        }
        return out;
    }();

    for (std::size_t r = 0; r < residuals.size(); ++r) {
        const std::size_t t = residuals[r];
        const std::size_t home = interval_of[t];

        long best = -1;
        double best_cos = -2.0;
        std::size_t best_dist = 0;
        for (std::size_t i = 0; i < retained_anchors.size(); ++i) {
            if (anchor_interval[i] != home) continue;
            const std::size_t h = retained_anchors[i];
            const double c =
                cosine(audio.tokens.row(t_begin + t), audio.tokens.row(t_begin + h));
            const std::size_t dist = t > h ? t - h : h - t;
            bool better = false;
            if (best < 0 || c > best_cos) {
                better = true;
            } else if (c == best_cos && dist < best_dist) {
                better = true;
            }
            // remaining ties fall through to the earlier anchor, which the
            // scan order already guarantees
            if (better) {
                best = static_cast<long>(i);
                best_cos = c;
                best_dist = dist;
            }
        }
        if (best < 0) {
            // interval with no retained anchor: nearest retained anchor in time
            std::size_t nearest = 0;
            std::size_t nearest_dist = SIZE_MAX;
            for (std::size_t i = 0; i < retained_anchors.size(); ++i) {
                const std::size_t h = retained_anchors[i];
                const std::size_t dist = t > h ? t - h : h - t;
                if (dist < nearest_dist) {
                    nearest_dist = dist;
                    nearest = i;
                }
            }
            best = static_cast<long>(nearest);
        }
        pi[r] = static_cast<int>(retained_anchors[static_cast<std::size_t>(best)]);
    }
    return pi;
}

std::vector<double> crossmodal_scores(const AudioStream& audio, std::size_t t_begin,
                                      std::size_t t_end, const Matrix& video_reps) {
    std::vector<double> scores(t_end - t_begin, 0.0);
    if (video_reps.rows == 0) return scores;
    for (std::size_t t = t_begin; t < t_end; ++t) {
        double best = -2.0;
        for (std::size_t r = 0; r < video_reps.rows; ++r) {
            best = std::max(best, cosine(video_reps.row(r), audio.tokens.row(t)));
        }
        scores[t - t_begin] = best;
    }
    return scores;
}

MergeSelection crossmodal_merge_candidates(const std::vector<std::size_t>& residuals,
                                           const std::vector<int>& pi,
                                           const std::vector<double>& cross_scores,
                                           double m_a, int group_size) {
    if (pi.size() != residuals.size()) {
        throw InvariantError("merge candidates: assignment does not match residuals");
    }
    if (group_size < 1) throw ConfigError("merge candidates: group_size must be >= 1");

    MergeSelection out;
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < residuals.size(); ++r) {
        if (pi[r] < 0) {
            out.dropped.push_back(residuals[r]);
            continue;
        }
        groups[static_cast<std::size_t>(pi[r])].push_back(residuals[r]);
    }

    for (auto& [anchor, members] : groups) {
        const std::size_t gs = members.size();
        // epsilon guards against products like 0.3*10 landing one ulp high
        std::size_t quota = static_cast<std::size_t>(
            std::ceil(m_a * static_cast<double>(gs) - 1e-9));
        quota = std::min(quota, gs);

        const std::size_t g = static_cast<std::size_t>(group_size);
        const std::size_t num_blocks = (gs + g - 1) / g;
        std::vector<std::vector<std::size_t>> blocks(num_blocks);
        for (std::size_t i = 0; i < gs; ++i) blocks[i / g].push_back(members[i]);
        // within a block: score-descending, then earlier token
        for (auto& block : blocks) {
            std::stable_sort(block.begin(), block.end(), [&](std::size_t a, std::size_t b) {
                return cross_scores[a] > cross_scores[b];
            });
        }

        std::vector<std::size_t> chosen;
        for (std::size_t pass = 0; chosen.size() < quota; ++pass) {
            bool any = false;
            for (const auto& block : blocks) {
                if (chosen.size() == quota) break;
                if (pass < block.size()) {
                    chosen.push_back(block[pass]);
                    any = true;
                }
            }
            if (!any) break;
        }
        std::sort(chosen.begin(), chosen.end());

        if (!chosen.empty()) out.merge_sets[anchor] = chosen;
        for (std::size_t m : members) {
            if (!std::binary_search(chosen.begin(), chosen.end(), m)) {
                out.dropped.push_back(m);
            }
        }
    }
    std::sort(out.dropped.begin(), out.dropped.end());
    return out;
}

MergedAnchors merge_into_anchors(
    const AudioStream& audio, std::size_t t_begin,
    const std::map<std::size_t, std::vector<std::size_t>>& merge_sets,
    const std::vector<double>& cross_scores) {
    MergedAnchors out;
    const std::size_t dim = audio.tokens.dim;
    for (const auto& [anchor, members] : merge_sets) {
        if (members.empty()) continue;
        // relevance weights: clamped scores normalized within the set,
        // uniform when all are zero
        std::vector<double> w(members.size(), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            w[i] = std::max(0.0, cross_scores[members[i]]);
            sum += w[i];
        }
        if (sum <= 1e-12) {
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(members.size()));
        } else {
            for (auto& x : w) x /= sum;
        }

        std::vector<double> rep(dim, 0.0);
        const auto anchor_row = audio.tokens.row(t_begin + anchor);
        double w_sum = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto row = audio.tokens.row(t_begin + members[i]);
            for (std::size_t d = 0; d < dim; ++d) {
                rep[d] += w[i] * static_cast<double>(row[d]);
            }
            w_sum += w[i];
        }
        for (std::size_t d = 0; d < dim; ++d) {
            rep[d] = (static_cast<double>(anchor_row[d]) + rep[d]) / (1.0 + w_sum);
        }
        out.merged_rep[anchor] = std::move(rep);
        out.weights[anchor] = std::move(w);
    }
    return out;
}

AudioCompressionResult compress_audio_chunk(const AudioStream& audio, std::size_t t_begin,
                                            std::size_t t_end,
                                            const VideoCompressionResult& video_result,
                                            const HyperParams& params,
                                            const ImportanceScores* external_scores) {
    if (t_begin >= t_end || t_end > audio.num_tokens) {
        throw InvariantError("compress_audio_chunk: empty or out-of-range chunk");
    }
    const std::size_t n = t_end - t_begin;
    const std::size_t dim = audio.tokens.dim;

    AudioCompressionResult result;
    const AudioBudget budget = audio_budget(params, video_result.r_v);
    result.m_a = budget.m_a;
    result.R_a = budget.R_a;

    result.anchors = detect_anchors(audio, t_begin, t_end, params.theta_anchor);
    const std::vector<std::size_t> interval_of = interval_map(n, result.anchors);

    const ImportanceScores scores =
        external_scores ? *external_scores : norm_importance(audio, t_begin, t_end);
    RetainedSelection sel =
        select_retained(n, scores, result.anchors, budget.m_a, params.contextual_ratio);
    result.dominant = sel.dominant;
    result.contextual = sel.contextual;
    result.target = sel.target;

    std::vector<std::size_t> retained_anchors;
    {
        std::vector<std::uint8_t> retained(n, 0);
        for (std::size_t t : sel.dominant) retained[t] = 1;
        for (std::size_t t : sel.contextual) retained[t] = 1;
        for (std::size_t a : result.anchors) {
            if (retained[a]) retained_anchors.push_back(a);
        }
    }

    const std::vector<int> pi_residual =
        assign_to_anchors(audio, t_begin, sel.residual, retained_anchors, interval_of);
    result.assignment.assign(n, -1);
    for (std::size_t r = 0; r < sel.residual.size(); ++r) {
        result.assignment[sel.residual[r]] = pi_residual[r];
    }

    result.cross_scores = crossmodal_scores(audio, t_begin, t_end, video_result.merged_reps);
    MergeSelection merge_sel = crossmodal_merge_candidates(
        sel.residual, pi_residual, result.cross_scores, budget.m_a, params.group_size);
    result.merge_sets = merge_sel.merge_sets;

    MergedAnchors merged =
        merge_into_anchors(audio, t_begin, result.merge_sets, result.cross_scores);
    result.merge_weights = merged.weights;

    result.fate.assign(n, TokenFate::dropped);
    result.retained_mask.assign(n, 0);
    for (std::size_t t : sel.dominant) {
        result.fate[t] = TokenFate::dominant;
        result.retained_mask[t] = 1;
    }
    for (std::size_t t : sel.contextual) {
        result.fate[t] = TokenFate::contextual_anchor;
        result.retained_mask[t] = 1;
    }
    for (const auto& [anchor, members] : result.merge_sets) {
        for (std::size_t t : members) result.fate[t] = TokenFate::merged;
    }

    for (std::size_t t = 0; t < n; ++t) {
        if (result.retained_mask[t]) result.retained_indices.push_back(t);
    }
    result.merged_reps = Matrix(result.retained_indices.size(), dim);
    for (std::size_t i = 0; i < result.retained_indices.size(); ++i) {
        const std::size_t t = result.retained_indices[i];
        const auto it = merged.merged_rep.find(t);
        if (it != merged.merged_rep.end()) {
            for (std::size_t d = 0; d < dim; ++d) result.merged_reps.at(i, d) = it->second[d];
        } else {
            const auto row = audio.tokens.row(t_begin + t);
            for (std::size_t d = 0; d < dim; ++d) {
                result.merged_reps.at(i, d) = static_cast<double>(row[d]);
            }
        }
    }

    result.retained_ratio =
        static_cast<double>(result.retained_indices.size()) / static_cast<double>(n);
    return result;
}

} // namespace orf
