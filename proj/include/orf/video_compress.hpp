#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orf/types.hpp"

namespace orf {

// Inclusive patch rectangle.
struct Rect {
    std::size_t row_lo = 0, row_hi = 0, col_lo = 0, col_hi = 0;

    std::size_t height() const { return row_hi - row_lo + 1; }
    std::size_t width() const { return col_hi - col_lo + 1; }
    std::size_t area() const { return height() * width(); }
    bool operator==(const Rect&) const = default;
};

std::size_t rect_intersection_area(const Rect& a, const Rect& b);

// Per-frame spatial hierarchy. Node 0 is the root; children tile the parent
// by halving rows and columns (ceil/floor for odd extents; an extent-1
// dimension does not split). Representatives are bottom-up token means.
struct QuadTree {
    struct Node {
        Rect rect;
        int parent = -1;
        int level = 0;
        std::array<int, 4> child{{-1, -1, -1, -1}};
        int num_children = 0;
        std::vector<double> rep;
        std::size_t weight = 0;       // patch tokens under this node
        double min_child_cos = 1.0;   // min cosine(rep, child rep); 1 at leaves
        double sum_child_cos = 0.0;   // for heterogeneity aggregation
    };

    std::size_t grid_h = 0, grid_w = 0, dim = 0;
    std::vector<Node> nodes;

    bool is_leaf(int id) const { return nodes[id].num_children == 0; }
};

// frame_tokens: grid_h*grid_w rows of length dim, row-major.
QuadTree build_hierarchy(std::span<const float> frame_tokens,
                         std::size_t grid_h, std::size_t grid_w, std::size_t dim);

// Top-down selection: retain a node when every child stays within tau_s of
// it, otherwise descend. Returned ids tile the grid, in traversal order.
std::vector<int> spatial_select(const QuadTree& tree, double tau_s);

// A retained node, possibly enriched by temporal merging. own_weight is the
// pure token count of its rect; acc_weight adds everything absorbed into it.
struct SurvivorNode {
    int frame = 0; // chunk-relative
    int node = 0;  // id within its frame's tree
    Rect rect;
    std::vector<double> rep;
    std::size_t own_weight = 0;
    std::size_t acc_weight = 0;
};

struct MergeEdge {
    int frame = 0;       // chunk-relative frame of the absorbed node
    int node = 0;
    Rect rect;
    std::size_t weight = 0; // absorbed node's own weight
    std::size_t target = 0; // survivor index
};

struct TemporalMergeResult {
    std::vector<SurvivorNode> survivors;
    std::vector<MergeEdge> merges;
};

// Frame-order sweep: a node merges into the best previous-frame survivor
// whose rect intersects it with cosine >= tau_t (largest intersection, then
// larger cosine, then earlier raster position, then earlier creation).
// Merging chains only through survivors still active at the previous frame.
TemporalMergeResult temporal_merge(const std::vector<QuadTree>& trees,
                                   const std::vector<std::vector<int>>& selected,
                                   double tau_t);

struct VideoCompressionResult {
    std::vector<SurvivorNode> survivors;   // ordered by (frame, row_lo, col_lo)
    std::vector<MergeEdge> merges;         // targets index `survivors`
    std::vector<std::uint8_t> token_mask;  // F_chunk*P; 1 at survivor anchors
    std::vector<int> representative_of;    // F_chunk*P -> survivor index
    Matrix merged_reps;                    // one row per survivor
    double r_v_pre_clamp = 0.0;
    double r_v = 0.0;
    double heterogeneity = 0.0;            // mean parent-child dissimilarity
    double window_lo = 0.0, window_hi = 0.0;
    bool bound_infeasible = false;
    std::string note;

    std::size_t frames = 0, patches_per_frame = 0;
};

// Full video-side compression of chunk frames [f_begin, f_end): per-frame
// hierarchy + spatial selection, temporal merging, then retention clamping
// into the (alpha-tilted) [v_min, v_max] window. Coarsens least-lossy sibling
// groups when above the window, splits most heterogeneous survivors when
// below. Reports nearest-achievable with a note when the chunk is too small
// to express a bound.
VideoCompressionResult compress_video_chunk(const VideoStream& video,
                                            std::size_t f_begin, std::size_t f_end,
                                            const HyperParams& params);

} // namespace orf
