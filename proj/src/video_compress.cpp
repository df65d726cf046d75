#include "orf/video_compress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "orf/correspondence.hpp"

namespace orf {

std::size_t rect_intersection_area(const Rect& a, const Rect& b) {
    const std::size_t row_lo = std::max(a.row_lo, b.row_lo);
    const std::size_t row_hi = std::min(a.row_hi, b.row_hi);
    const std::size_t col_lo = std::max(a.col_lo, b.col_lo);
    const std::size_t col_hi = std::min(a.col_hi, b.col_hi);
    if (row_lo > row_hi || col_lo > col_hi) return 0;
    return (row_hi - row_lo + 1) * (col_hi - col_lo + 1);
}

namespace {

int build_node(QuadTree& tree, std::span<const float> tokens, const Rect& rect,
               int parent, int level) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].rect = rect;
    tree.nodes[id].parent = parent;
    tree.nodes[id].level = level;

    const std::size_t h = rect.height();
    const std::size_t w = rect.width();
    if (h == 1 && w == 1) {
        const std::size_t offset = (rect.row_lo * tree.grid_w + rect.col_lo) * tree.dim;
        auto& node = tree.nodes[id];
        node.rep.assign(tokens.begin() + static_cast<std::ptrdiff_t>(offset),
                        tokens.begin() + static_cast<std::ptrdiff_t>(offset + tree.dim));
        node.weight = 1;
        return id;
    }

    // ceil/floor halving; an extent-1 dimension does not split.
    std::vector<std::pair<std::size_t, std::size_t>> row_parts, col_parts;
    if (h >= 2) {
        const std::size_t mid = rect.row_lo + (h + 1) / 2 - 1;
        row_parts = {{rect.row_lo, mid}, {mid + 1, rect.row_hi}};
    } else {
        row_parts = {{rect.row_lo, rect.row_hi}};
    }
    if (w >= 2) {
        const std::size_t mid = rect.col_lo + (w + 1) / 2 - 1;
        col_parts = {{rect.col_lo, mid}, {mid + 1, rect.col_hi}};
    } else {
        col_parts = {{rect.col_lo, rect.col_hi}};
    }

    int child_ids[4];
    int n_children = 0;
    for (const auto& rows : row_parts) {
        for (const auto& cols : col_parts) {
            const Rect child_rect{rows.first, rows.second, cols.first, cols.second};
            child_ids[n_children++] = build_node(tree, tokens, child_rect, id, level + 1);
        }
    }

    auto& node = tree.nodes[id];
    node.num_children = n_children;
    node.rep.assign(tree.dim, 0.0);
    node.weight = 0;
    for (int c = 0; c < n_children; ++c) {
        node.child[static_cast<std::size_t>(c)] = child_ids[c];
        const auto& child = tree.nodes[child_ids[c]];
        for (std::size_t i = 0; i < tree.dim; ++i) {
            node.rep[i] += child.rep[i] * static_cast<double>(child.weight);
        }
        node.weight += child.weight;
    }
    for (std::size_t i = 0; i < tree.dim; ++i) {
        node.rep[i] /= static_cast<double>(node.weight);
    }
    node.min_child_cos = 1.0;
    node.sum_child_cos = 0.0;
    for (int c = 0; c < n_children; ++c) {
        const double cos_pc = cosine(std::span<const double>(node.rep),
                                     std::span<const double>(tree.nodes[child_ids[c]].rep));
        node.min_child_cos = std::min(node.min_child_cos, cos_pc);
        node.sum_child_cos += cos_pc;
    }
    return id;
}

} // namespace

QuadTree build_hierarchy(std::span<const float> frame_tokens, std::size_t grid_h,
                         std::size_t grid_w, std::size_t dim) {
    if (grid_h < 1 || grid_w < 1) throw ConfigError("build_hierarchy: empty grid");
    if (frame_tokens.size() != grid_h * grid_w * dim) {
        throw InvariantError("build_hierarchy: token count does not match grid");
    }
    QuadTree tree;
    tree.grid_h = grid_h;
    tree.grid_w = grid_w;
    tree.dim = dim;
    tree.nodes.reserve(grid_h * grid_w * 2);
    build_node(tree, frame_tokens, Rect{0, grid_h - 1, 0, grid_w - 1}, -1, 0);
    return tree;
}

namespace {

void select_into(const QuadTree& tree, int id, double tau_s, std::vector<int>& out) {
    const auto& node = tree.nodes[id];
    if (node.num_children == 0 || node.min_child_cos >= tau_s) {
        out.push_back(id);
        return;
    }
    for (int c = 0; c < node.num_children; ++c) {
        select_into(tree, node.child[static_cast<std::size_t>(c)], tau_s, out);
    }
}

} // namespace

std::vector<int> spatial_select(const QuadTree& tree, double tau_s) {
    std::vector<int> out;
    select_into(tree, 0, tau_s, out);
    return out;
}

TemporalMergeResult temporal_merge(const std::vector<QuadTree>& trees,
                                   const std::vector<std::vector<int>>& selected,
                                   double tau_t) {
    if (trees.size() != selected.size()) {
        throw InvariantError("temporal_merge: trees and selections disagree");
    }
    TemporalMergeResult result;
    std::vector<std::size_t> active;

    for (std::size_t t = 0; t < trees.size(); ++t) {
        std::vector<std::size_t> fresh;
        std::vector<std::uint8_t> absorbed(active.size(), 0);

        for (int node_id : selected[t]) {
            const auto& node = trees[t].nodes[node_id];
            long best = -1;
            std::size_t best_area = 0;
            double best_cos = -2.0;

            if (t > 0) {
                for (std::size_t k = 0; k < active.size(); ++k) {
                    const auto& surv = result.survivors[active[k]];
                    const std::size_t area = rect_intersection_area(surv.rect, node.rect);
                    if (area == 0) continue;
                    const double cos_ts = cosine(std::span<const double>(surv.rep),
                                                 std::span<const double>(node.rep));
                    if (cos_ts < tau_t) continue;

                    bool better = false;
                    if (best < 0) {
                        better = true;
                    } else {
                        const auto& cur = result.survivors[active[static_cast<std::size_t>(best)]];
                        if (area != best_area) {
                            better = area > best_area;
                        } else if (cos_ts != best_cos) {
                            better = cos_ts > best_cos;
                        } else {
                            const auto key = std::make_tuple(surv.rect.row_lo, surv.rect.col_lo,
                                                             surv.frame, active[k]);
                            const auto cur_key =
                                std::make_tuple(cur.rect.row_lo, cur.rect.col_lo, cur.frame,
                                                active[static_cast<std::size_t>(best)]);
                            better = key < cur_key;
                        }
                    }
                    if (better) {
                        best = static_cast<long>(k);
                        best_area = area;
                        best_cos = cos_ts;
                    }
                }
            }

            if (best >= 0) {
                auto& surv = result.survivors[active[static_cast<std::size_t>(best)]];
                const double total =
                    static_cast<double>(surv.acc_weight) + static_cast<double>(node.weight);
                for (std::size_t i = 0; i < surv.rep.size(); ++i) {
                    surv.rep[i] = (surv.rep[i] * static_cast<double>(surv.acc_weight) +
                                   node.rep[i] * static_cast<double>(node.weight)) /
                                  total;
                }
                surv.acc_weight += node.weight;
                result.merges.push_back(MergeEdge{static_cast<int>(t), node_id, node.rect,
                                                  node.weight,
                                                  active[static_cast<std::size_t>(best)]});
                absorbed[static_cast<std::size_t>(best)] = 1;
            } else {
                SurvivorNode surv;
                surv.frame = static_cast<int>(t);
                surv.node = node_id;
                surv.rect = node.rect;
                surv.rep = node.rep;
                surv.own_weight = node.weight;
                surv.acc_weight = node.weight;
                result.survivors.push_back(std::move(surv));
                fresh.push_back(result.survivors.size() - 1);
            }
        }

        std::vector<std::size_t> next_active;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (absorbed[k]) next_active.push_back(active[k]);
        }
        next_active.insert(next_active.end(), fresh.begin(), fresh.end());
        active = std::move(next_active);
    }
    return result;
}

namespace {

struct ClampSlot {
    bool alive = true;
    int frame = 0;
    int node = 0;
    Rect rect;
    std::vector<double> rep;
    std::size_t own = 0;
    std::size_t acc = 0;
};

struct ClampEdge {
    int frame = 0;
    int node = 0;
    Rect rect;
    std::size_t weight = 0;
    std::size_t target = 0; // slot index
};

} // namespace

VideoCompressionResult compress_video_chunk(const VideoStream& video,
                                            std::size_t f_begin, std::size_t f_end,
                                            const HyperParams& params) {
    if (!(f_begin < f_end && f_end <= video.num_frames)) {
        throw InvariantError("compress_video_chunk: frame range out of bounds");
    }
    const std::size_t nframes = f_end - f_begin;
    const std::size_t patches = video.patches_per_frame();
    const std::size_t dim = video.tokens.dim;
    const std::size_t total = nframes * patches;

    std::vector<QuadTree> trees;
    trees.reserve(nframes);
    std::vector<std::vector<int>> selected(nframes);
    for (std::size_t f = 0; f < nframes; ++f) {
        const std::size_t row0 = (f_begin + f) * patches;
        std::span<const float> frame_tokens{video.tokens.values.data() + row0 * dim,
                                            patches * dim};
        trees.push_back(build_hierarchy(frame_tokens, video.grid_h, video.grid_w, dim));
        selected[f] = spatial_select(trees.back(), params.tau_s);
    }

    TemporalMergeResult merged = temporal_merge(trees, selected, params.tau_t);

    // Chunk heterogeneity: mean parent-child dissimilarity over every
    // internal node of every frame tree.
    double dissim_total = 0.0;
    std::size_t pair_total = 0;
    for (const auto& tree : trees) {
        for (const auto& node : tree.nodes) {
            if (node.num_children == 0) continue;
            dissim_total += (static_cast<double>(node.num_children) - node.sum_child_cos) / 2.0;
            pair_total += static_cast<std::size_t>(node.num_children);
        }
    }
    const double heterogeneity = pair_total ? dissim_total / static_cast<double>(pair_total) : 0.0;

    double window_lo = params.v_min;
    double window_hi = params.v_max;
    if (params.alpha_modulation) {
        const double shift =
            params.alpha * (2.0 * heterogeneity - 1.0) * (params.v_max - params.v_min) / 2.0;
        window_lo = params.v_min + std::max(0.0, shift);
        window_hi = params.v_max + std::min(0.0, shift);
    }

    std::vector<ClampSlot> slots;
    slots.reserve(merged.survivors.size());
    for (const auto& surv : merged.survivors) {
        slots.push_back(ClampSlot{true, surv.frame, surv.node, surv.rect, surv.rep,
                                  surv.own_weight, surv.acc_weight});
    }
    std::vector<ClampEdge> edges;
    edges.reserve(merged.merges.size());
    for (const auto& e : merged.merges) {
        edges.push_back(ClampEdge{e.frame, e.node, e.rect, e.weight, e.target});
    }

    std::size_t alive_count = slots.size();
    const double r_v_pre = static_cast<double>(alive_count) / static_cast<double>(total);
    const auto ratio = [&] {
        return static_cast<double>(alive_count) / static_cast<double>(total);
    };

    // Coarsen least-lossy complete sibling groups while above the window.
    while (ratio() > window_hi) {
        std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (!slots[s].alive) continue;
            const int parent = trees[static_cast<std::size_t>(slots[s].frame)]
                                   .nodes[slots[s].node]
                                   .parent;
            if (parent < 0) continue;
            groups[{slots[s].frame, parent}].push_back(s);
        }
        long best_frame = -1, best_parent = -1;
        double best_key = -2.0;
        for (const auto& [key, members] : groups) {
            const auto& tree = trees[static_cast<std::size_t>(key.first)];
            if (static_cast<int>(members.size()) != tree.nodes[key.second].num_children) {
                continue;
            }
            const double k = tree.nodes[key.second].min_child_cos;
            if (best_frame < 0 || k > best_key) {
                best_frame = key.first;
                best_parent = key.second;
                best_key = k;
            }
        }
        if (best_frame < 0) break; // nothing left to coarsen

        const auto& members = groups[{static_cast<int>(best_frame), static_cast<int>(best_parent)}];
        const auto& tree = trees[static_cast<std::size_t>(best_frame)];
        ClampSlot parent_slot;
        parent_slot.frame = static_cast<int>(best_frame);
        parent_slot.node = static_cast<int>(best_parent);
        parent_slot.rect = tree.nodes[best_parent].rect;
        parent_slot.rep.assign(dim, 0.0);
        for (std::size_t s : members) {
            for (std::size_t i = 0; i < dim; ++i) {
                parent_slot.rep[i] += slots[s].rep[i] * static_cast<double>(slots[s].acc);
            }
            parent_slot.own += slots[s].own;
            parent_slot.acc += slots[s].acc;
            slots[s].alive = false;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            parent_slot.rep[i] /= static_cast<double>(parent_slot.acc);
        }
        const std::size_t new_id = slots.size();
        for (auto& e : edges) {
            if (std::find(members.begin(), members.end(), e.target) != members.end()) {
                e.target = new_id;
            }
        }
        slots.push_back(std::move(parent_slot));
        alive_count -= members.size() - 1;
    }

    // Split the most heterogeneous survivors while below the window.
    while (ratio() < window_lo) {
        long best_slot = -1;
        double best_key = 2.0;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (!slots[s].alive) continue;
            const auto& node = trees[static_cast<std::size_t>(slots[s].frame)].nodes[slots[s].node];
            if (node.num_children == 0) continue;
            if (best_slot < 0 || node.min_child_cos < best_key) {
                best_slot = static_cast<long>(s);
                best_key = node.min_child_cos;
            }
        }
        if (best_slot < 0) break; // every survivor is a leaf

        const std::size_t s = static_cast<std::size_t>(best_slot);
        const int frame = slots[s].frame;
        const auto& tree = trees[static_cast<std::size_t>(frame)];
        const auto& node = tree.nodes[slots[s].node];
        std::vector<std::size_t> child_slots;
        for (int c = 0; c < node.num_children; ++c) {
            const auto& child = tree.nodes[node.child[static_cast<std::size_t>(c)]];
            ClampSlot cs;
            cs.frame = frame;
            cs.node = node.child[static_cast<std::size_t>(c)];
            cs.rect = child.rect;
            cs.rep = child.rep; // pure representative again
            cs.own = child.weight;
            cs.acc = child.weight;
            child_slots.push_back(slots.size());
            slots.push_back(std::move(cs));
        }
        for (auto& e : edges) {
            if (e.target != s) continue;
            std::size_t best_child = child_slots[0];
            std::size_t best_area = 0;
            for (std::size_t cs : child_slots) {
                const std::size_t area = rect_intersection_area(e.rect, slots[cs].rect);
                if (area > best_area) {
                    best_area = area;
                    best_child = cs;
                }
            }
            e.target = best_child;
            slots[best_child].acc += e.weight;
        }
        slots[s].alive = false;
        alive_count += static_cast<std::size_t>(node.num_children) - 1;
    }

    // Final assembly in raster order per frame.
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (slots[s].alive) order.push_back(s);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::make_tuple(slots[a].frame, slots[a].rect.row_lo, slots[a].rect.col_lo) <
               std::make_tuple(slots[b].frame, slots[b].rect.row_lo, slots[b].rect.col_lo);
    });
    std::vector<long> final_index(slots.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) {
        final_index[order[i]] = static_cast<long>(i);
    }

    VideoCompressionResult result;
    result.frames = nframes;
    result.patches_per_frame = patches;
    result.heterogeneity = heterogeneity;
    result.window_lo = window_lo;
    result.window_hi = window_hi;
    result.r_v_pre_clamp = r_v_pre;
    result.survivors.reserve(order.size());
    result.merged_reps = Matrix(order.size(), dim);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& slot = slots[order[i]];
        SurvivorNode surv;
        surv.frame = slot.frame;
        surv.node = slot.node;
        surv.rect = slot.rect;
        surv.rep = slot.rep;
        surv.own_weight = slot.own;
        surv.acc_weight = slot.acc;
        result.survivors.push_back(std::move(surv));
        for (std::size_t d = 0; d < dim; ++d) {
            result.merged_reps.at(i, d) = slot.rep[d];
        }
    }
    for (const auto& e : edges) {
        if (final_index[e.target] < 0) {
            throw InvariantError("compress_video_chunk: merge edge targets a dead slot");
        }
        result.merges.push_back(MergeEdge{e.frame, e.node, e.rect, e.weight,
                                          static_cast<std::size_t>(final_index[e.target])});
    }

    result.token_mask.assign(total, 0);
    result.representative_of.assign(total, -1);
    const auto cover = [&](int frame, const Rect& rect, std::size_t rep_index) {
        for (std::size_t r = rect.row_lo; r <= rect.row_hi; ++r) {
            for (std::size_t c = rect.col_lo; c <= rect.col_hi; ++c) {
                const std::size_t pos =
                    static_cast<std::size_t>(frame) * patches + r * video.grid_w + c;
                if (result.representative_of[pos] != -1) {
                    throw InvariantError("compress_video_chunk: patch covered twice");
                }
                result.representative_of[pos] = static_cast<int>(rep_index);
            }
        }
    };
    for (std::size_t i = 0; i < result.survivors.size(); ++i) {
        const auto& surv = result.survivors[i];
        cover(surv.frame, surv.rect, i);
        result.token_mask[static_cast<std::size_t>(surv.frame) * patches +
                          surv.rect.row_lo * video.grid_w + surv.rect.col_lo] = 1;
    }
    for (const auto& e : result.merges) {
        cover(e.frame, e.rect, e.target);
    }
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (result.representative_of[pos] == -1) {
            throw InvariantError("compress_video_chunk: uncovered patch");
        }
    }

    result.r_v = static_cast<double>(result.survivors.size()) / static_cast<double>(total);
    if (result.r_v < window_lo || result.r_v > window_hi) {
        result.bound_infeasible = true;
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "retention %.6f outside achievable window [%.6f, %.6f]", result.r_v,
                      window_lo, window_hi);
        result.note = buf;
    }
    return result;
}

} // namespace orf
