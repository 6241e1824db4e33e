#include "treeberg/tree.hpp"

#include <stdexcept>
#include <string>

namespace treeberg {

RadialTree::RadialTree(BranchingSpec spec, int depth, vertex_t vertex_cap)
    : spec_(std::move(spec)), depth_(depth) {
    if (depth < 1) throw std::invalid_argument("branching violation: depth must be >= 1");
    q_.resize(depth_);
    for (int l = 0; l < depth_; ++l) q_[l] = spec_(l);  // throws if q̃ < 2

    offsets_.assign(depth_ + 2, 0);
    vertex_t count = 1;
    offsets_[1] = 1;
    for (int l = 0; l < depth_; ++l) {
        count *= q_[l];
        offsets_[l + 2] = offsets_[l + 1] + count;
        if (offsets_[l + 2] > vertex_cap)
            throw std::length_error("tree exceeds vertex cap of " + std::to_string(vertex_cap));
    }
    n_ = offsets_[depth_ + 1];

    level_.resize(n_);
    parent_.resize(n_);
    level_[0] = 0;
    parent_[0] = -1;
    for (int l = 0; l < depth_; ++l) {
        const vertex_t b = offsets_[l], e = offsets_[l + 1];
        const int q = q_[l];
        for (vertex_t v = b; v < e; ++v) {
            const vertex_t cb = offsets_[l + 1] + (v - b) * q;
            for (int c = 0; c < q; ++c) {
                level_[cb + c] = l + 1;
                parent_[cb + c] = v;
            }
        }
    }
}

vertex_t RadialTree::child_begin(vertex_t v) const {
    const int l = level_[v];
    if (l == depth_) return 0;
    return offsets_[l + 1] + (v - offsets_[l]) * q_[l];
}

vertex_t RadialTree::child_end(vertex_t v) const {
    const int l = level_[v];
    if (l == depth_) return 0;
    return child_begin(v) + q_[l];
}

vertex_t RadialTree::ancestor(vertex_t v, int k) const {
    check_vertex(v);
    if (k < 0 || k > level_[v]) throw std::out_of_range("ancestor: k exceeds vertex level");
    while (k-- > 0) v = parent_[v];
    return v;
}

vertex_t RadialTree::confluent(vertex_t x, vertex_t y) const {
    check_vertex(x);
    check_vertex(y);
    while (level_[x] > level_[y]) x = parent_[x];
    while (level_[y] > level_[x]) y = parent_[y];
    while (x != y) {
        x = parent_[x];
        y = parent_[y];
    }
    return x;
}

int RadialTree::child_branch(vertex_t anc, vertex_t v) const {
    while (parent_[v] != anc) v = parent_[v];
    return static_cast<int>(v - child_begin(anc));
}

std::vector<LevelRange> RadialTree::sector_ranges(vertex_t v) const {
    check_vertex(v);
    std::vector<LevelRange> out;
    out.reserve(depth_ - level_[v] + 1);
    vertex_t b = v, e = v + 1;
    for (int l = level_[v]; l <= depth_; ++l) {
        out.push_back({l, b, e});
        if (l == depth_) break;
        const int q = q_[l];
        const vertex_t lb = offsets_[l];
        b = offsets_[l + 1] + (b - lb) * q;
        e = offsets_[l + 1] + (e - lb) * q;
    }
    return out;
}

std::vector<vertex_t> RadialTree::sector(vertex_t v) const {
    std::vector<vertex_t> out;
    for (const auto& r : sector_ranges(v))
        for (vertex_t x = r.begin; x < r.end; ++x) out.push_back(x);
    return out;
}

vertex_t RadialTree::sector_size(vertex_t v) const {
    vertex_t total = 0;
    for (const auto& r : sector_ranges(v)) total += r.end - r.begin;
    return total;
}

double RadialTree::nu(int j, int k) const {
    if (j > k) return 1.0;
    if (j < 0 || k >= depth_) throw std::out_of_range("nu: level out of range");
    double p = 1.0;
    for (int l = j; l <= k; ++l) p /= q_[l];
    return p;
}

void RadialTree::check_vertex(vertex_t v) const {
    if (v < 0 || v >= n_) throw std::out_of_range("vertex index out of range");
}

}  // namespace treeberg
