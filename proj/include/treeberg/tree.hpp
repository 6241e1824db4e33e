#pragma once

#include <cstdint>
#include <vector>

#include "treeberg/branching.hpp"

namespace treeberg {

using vertex_t = std::int64_t;

// Contiguous vertex index range at a fixed level, [begin, end).
struct LevelRange {
    int level;
    vertex_t begin;
    vertex_t end;
};

/// Depth-L truncation of a radial tree. Vertices are indexed breadth-first,
/// children of each vertex contiguous, so parent/child/level lookups are O(1).
class RadialTree {
public:
    static constexpr vertex_t kDefaultVertexCap = 1'000'000;

    RadialTree(BranchingSpec spec, int depth, vertex_t vertex_cap = kDefaultVertexCap);

    vertex_t size() const { return n_; }
    int depth() const { return depth_; }
    const BranchingSpec& branching() const { return spec_; }

    int q_at_level(int level) const { return q_[level]; }  // 0 <= level < depth
    int level(vertex_t v) const { return level_[v]; }
    vertex_t parent(vertex_t v) const { return parent_[v]; }  // -1 for root
    vertex_t level_begin(int l) const { return offsets_[l]; }
    vertex_t level_end(int l) const { return offsets_[l + 1]; }
    vertex_t level_size(int l) const { return offsets_[l + 1] - offsets_[l]; }

    bool is_leaf(vertex_t v) const { return level_[v] == depth_; }
    vertex_t child_begin(vertex_t v) const;
    vertex_t child_end(vertex_t v) const;

    // Geodesic ancestor at level |v|-k; throws if k > |v|.
    vertex_t ancestor(vertex_t v, int k) const;
    // Deepest common ancestor of x and y.
    vertex_t confluent(vertex_t x, vertex_t y) const;
    // Index of the child branch of `anc` containing v (v strictly below anc).
    int child_branch(vertex_t anc, vertex_t v) const;

    // Descendant index ranges of v, level by level (first range is {v} itself).
    std::vector<LevelRange> sector_ranges(vertex_t v) const;
    std::vector<vertex_t> sector(vertex_t v) const;
    vertex_t sector_size(vertex_t v) const;

    // ν_j^k = ∏_{l=j}^{k} 1/q̃(l); equals 1 when j > k.
    double nu(int j, int k) const;

    void check_vertex(vertex_t v) const;

private:
    BranchingSpec spec_;
    int depth_;
    vertex_t n_;
    std::vector<int> q_;               // q̃(l) for l = 0..depth-1
    std::vector<vertex_t> offsets_;    // size depth+2
    std::vector<std::int32_t> level_;
    std::vector<vertex_t> parent_;
};

}  // namespace treeberg
