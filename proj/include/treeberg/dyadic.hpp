#pragma once

#include <vector>

#include "treeberg/measure.hpp"
#include "treeberg/tree.hpp"

namespace treeberg {

using cube_t = std::int64_t;
using GridFunction = std::vector<double>;

/// The dyadic system: for k >= 1, D_k = {{x}: |x| < k} ∪ {S_y: |y| = k};
/// D_0 = {X}. Each cube is stored once, at its canonical (smallest) generation.
///
/// Cube ids: id v in [0, n) is the sector cube S_v (id 0 is X); id n + v is
/// the singleton {v}, present only for non-leaf v (a leaf's singleton set is
/// already the sector cube S_leaf at generation L).
class DyadicSystem {
public:
    DyadicSystem(const RadialTree& tree, const MeasureVector& mu);

    const RadialTree& tree() const { return *tree_; }
    const MeasureVector& mu() const { return *mu_; }

    cube_t root_cube() const { return 0; }
    cube_t num_cubes() const { return static_cast<cube_t>(order_.size()); }
    // All cube ids, deterministic order (sectors by vertex, then singletons).
    const std::vector<cube_t>& cubes() const { return order_; }

    bool valid(cube_t id) const;
    bool is_sector(cube_t id) const { return id < n_; }
    bool is_singleton(cube_t id) const { return id >= n_; }
    // True when the cube is a single-point set (singleton or leaf sector).
    bool is_point_set(cube_t id) const;

    vertex_t base_vertex(cube_t id) const { return is_sector(id) ? id : id - n_; }
    int generation(cube_t id) const;
    cube_t parent(cube_t id) const;          // -1 for X
    cube_t ancestor(cube_t id, int s) const; // Q^{(s)}
    cube_t closure(cube_t id) const;         // Q̄: smallest sector containing Q
    std::vector<cube_t> children(cube_t id) const;

    // The element of D_k containing vertex v, as a canonical cube id.
    cube_t cube_at(int k, vertex_t v) const;
    bool contains(cube_t id, vertex_t v) const;
    // Q ⊆ R as sets.
    bool subset(cube_t q, cube_t r) const;

    double mass(cube_t id) const;
    vertex_t cardinality(cube_t id) const;
    std::vector<LevelRange> ranges(cube_t id) const;
    std::vector<vertex_t> vertices(cube_t id) const;

    // Σ_{x in Q} f(x) μ(x) and the μ-average over Q.
    double integral(const GridFunction& f, cube_t id) const;
    double average(const GridFunction& f, cube_t id) const;

    // Per-vertex sector integrals Σ_{y in S_v} f(y) μ(y), computed bottom-up.
    std::vector<double> sector_integrals(const GridFunction& f) const;

private:
    const RadialTree* tree_;
    const MeasureVector* mu_;
    vertex_t n_;
    std::vector<double> sector_mass_;
    std::vector<vertex_t> sector_card_;
    std::vector<cube_t> order_;
};

}  // namespace treeberg
