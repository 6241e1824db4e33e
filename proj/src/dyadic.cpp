#include "treeberg/dyadic.hpp"

#include <stdexcept>

namespace treeberg {

DyadicSystem::DyadicSystem(const RadialTree& tree, const MeasureVector& mu)
    : tree_(&tree), mu_(&mu), n_(tree.size()) {
    sector_mass_.resize(n_);
    sector_card_.resize(n_);
    // Bottom-up accumulation; children have larger indices than parents.
    for (vertex_t v = n_ - 1; v >= 0; --v) {
        sector_mass_[v] = mu.at(v);
        sector_card_[v] = 1;
        if (!tree.is_leaf(v)) {
            for (vertex_t c = tree.child_begin(v); c < tree.child_end(v); ++c) {
                sector_mass_[v] += sector_mass_[c];
                sector_card_[v] += sector_card_[c];
            }
        }
    }
    order_.reserve(2 * n_);
    for (vertex_t v = 0; v < n_; ++v) order_.push_back(v);
    for (vertex_t v = 0; v < n_; ++v)
        if (!tree.is_leaf(v)) order_.push_back(n_ + v);
}

bool DyadicSystem::valid(cube_t id) const {
    if (id < 0 || id >= 2 * n_) return false;
    if (id >= n_ && tree_->is_leaf(id - n_)) return false;
    return true;
}

bool DyadicSystem::is_point_set(cube_t id) const {
    return is_singleton(id) || tree_->is_leaf(id);
}

int DyadicSystem::generation(cube_t id) const {
    const vertex_t v = base_vertex(id);
    return tree_->level(v) + (is_singleton(id) ? 1 : 0);
}

cube_t DyadicSystem::parent(cube_t id) const {
    if (is_singleton(id)) return id - n_;  // parent of {v} in D_{|v|} is S_v
    if (id == 0) return -1;
    return tree_->parent(id);
}

cube_t DyadicSystem::ancestor(cube_t id, int s) const {
    cube_t q = id;
    while (s-- > 0) {
        q = parent(q);
        if (q < 0) throw std::out_of_range("cube ancestor beyond X");
    }
    return q;
}

cube_t DyadicSystem::closure(cube_t id) const {
    return is_singleton(id) ? id - n_ : id;
}

std::vector<cube_t> DyadicSystem::children(cube_t id) const {
    std::vector<cube_t> out;
    if (is_singleton(id)) return out;
    const vertex_t v = id;
    if (tree_->is_leaf(v)) return out;
    out.push_back(n_ + v);
    for (vertex_t c = tree_->child_begin(v); c < tree_->child_end(v); ++c)
        out.push_back(c);
    return out;
}

cube_t DyadicSystem::cube_at(int k, vertex_t v) const {
    tree_->check_vertex(v);
    if (k < 0 || k > tree_->depth()) throw std::out_of_range("generation out of range");
    const int l = tree_->level(v);
    if (l < k) return n_ + v;  // {v}; v is not a leaf since l < k <= L
    return tree_->ancestor(v, l - k);
}

bool DyadicSystem::contains(cube_t id, vertex_t v) const {
    const vertex_t b = base_vertex(id);
    if (is_singleton(id)) return v == b;
    vertex_t x = v;
    while (tree_->level(x) > tree_->level(b)) x = tree_->parent(x);
    return x == b;
}

bool DyadicSystem::subset(cube_t q, cube_t r) const {
    if (is_singleton(r) || tree_->is_leaf(base_vertex(r)))
        return is_point_set(q) && base_vertex(q) == base_vertex(r);
    // r is a sector with more than one point: q ⊆ r iff base of q lies in r,
    // except the singleton {x_r} vs sector distinction is irrelevant here.
    return contains(r, base_vertex(q));
}

double DyadicSystem::mass(cube_t id) const {
    return is_singleton(id) ? mu_->at(id - n_) : sector_mass_[id];
}

vertex_t DyadicSystem::cardinality(cube_t id) const {
    return is_singleton(id) ? 1 : sector_card_[id];
}

std::vector<LevelRange> DyadicSystem::ranges(cube_t id) const {
    if (is_singleton(id)) {
        const vertex_t v = id - n_;
        return {{tree_->level(v), v, v + 1}};
    }
    return tree_->sector_ranges(id);
}

std::vector<vertex_t> DyadicSystem::vertices(cube_t id) const {
    if (is_singleton(id)) return {id - n_};
    return tree_->sector(id);
}

double DyadicSystem::integral(const GridFunction& f, cube_t id) const {
    double s = 0.0;
    for (const auto& r : ranges(id)) {
        double lvl = 0.0;
        for (vertex_t x = r.begin; x < r.end; ++x) lvl += f[x];
        s += lvl * mu_->level_value(r.level);
    }
    return s;
}

double DyadicSystem::average(const GridFunction& f, cube_t id) const {
    return integral(f, id) / mass(id);
}

std::vector<double> DyadicSystem::sector_integrals(const GridFunction& f) const {
    std::vector<double> s(n_);
    for (vertex_t v = n_ - 1; v >= 0; --v) {
        s[v] = f[v] * mu_->at(v);
        if (!tree_->is_leaf(v))
            for (vertex_t c = tree_->child_begin(v); c < tree_->child_end(v); ++c)
                s[v] += s[c];
    }
    return s;
}

}  // namespace treeberg
