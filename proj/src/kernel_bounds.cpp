#include "treeberg/kernel_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treeberg {

KernelOperator projector_kernel(const BergmanModel& model) {
    return {[&model](vertex_t x, vertex_t y) { return model.kernel_full(x, y); }, true};
}

KernelOperator singular_control_kernel(const DyadicSystem& ds) {
    const RadialTree* t = &ds.tree();
    const MeasureVector* mu = &ds.mu();
    return {[t, mu](vertex_t x, vertex_t y) {
                const double m = mu->at(t->confluent(x, y));
                return 1.0 / (m * m);
            },
            true};
}

double BoundReport::max_ratio() const {
    double m = 0.0;
    for (const auto& c : cases) m = std::max(m, c.ratio);
    return m;
}

namespace {

// Representative vertices inside a cube: the base vertex plus the first
// vertex of every child sector at every level.
std::vector<vertex_t> cube_candidates(const DyadicSystem& ds, cube_t q) {
    if (ds.is_point_set(q)) return {ds.base_vertex(q)};
    const RadialTree& t = ds.tree();
    const vertex_t b = ds.base_vertex(q);
    std::vector<vertex_t> out = {b};
    for (vertex_t c = t.child_begin(b); c < t.child_end(b); ++c)
        for (const auto& r : t.sector_ranges(c)) out.push_back(r.begin);
    return out;
}

std::vector<cube_t> scan_cubes(const DyadicSystem& ds, SupMode mode) {
    if (mode == SupMode::Exhaustive) return ds.cubes();
    const RadialTree& t = ds.tree();
    std::vector<cube_t> out;
    for (int l = 0; l <= t.depth(); ++l) {
        out.push_back(t.level_begin(l));  // sector representative
        if (l < t.depth()) out.push_back(t.size() + t.level_begin(l));
    }
    return out;
}

std::vector<vertex_t> cube_vertices_for(const DyadicSystem& ds, cube_t q, SupMode mode) {
    return mode == SupMode::Exhaustive ? ds.vertices(q) : cube_candidates(ds, q);
}

// nu_j^k straight from the branching function; unlike RadialTree::nu this
// admits upper index k = depth (needed when the cube generation hits the
// truncation boundary).
double nu_any(const RadialTree& t, int j, int k) {
    double p = 1.0;
    for (int l = std::max(j, 0); l <= k; ++l) p /= t.branching()(l);
    return p;
}

}  // namespace

double hormander_constant(const KernelOperator& op, const DyadicSystem& ds, SupMode mode) {
    const RadialTree& t = ds.tree();
    const vertex_t n = t.size();
    double best = 0.0;
    for (cube_t q : scan_cubes(ds, mode)) {
        if (ds.is_point_set(q)) continue;
        const auto cands = cube_vertices_for(ds, q, mode);
        if (cands.size() < 2) continue;
        std::vector<char> in(n, 0);
        for (const auto& r : ds.ranges(q))
            for (vertex_t z = r.begin; z < r.end; ++z) in[z] = 1;
        // One kernel column per candidate, then cheap pair scans.
        std::vector<std::vector<double>> col(cands.size(), std::vector<double>(n));
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (vertex_t z = 0; z < n; ++z) col[i][z] = op.K(z, cands[i]);
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                double s = 0.0;
                for (vertex_t z = 0; z < n; ++z)
                    if (!in[z]) s += std::abs(col[i][z] - col[j][z]) * ds.mu().at(z);
                best = std::max(best, s);
            }
    }
    return best;
}

double size_constant(const KernelOperator& op, const DyadicSystem& ds, SupMode mode) {
    double best = 0.0;
    for (cube_t q : scan_cubes(ds, mode)) {
        const cube_t p = ds.parent(q);
        if (p < 0) continue;
        // The ring Q^{(1)} \ Q.
        std::vector<vertex_t> ring;
        for (const auto& r : ds.ranges(p))
            for (vertex_t z = r.begin; z < r.end; ++z)
                if (!ds.contains(q, z)) ring.push_back(z);
        for (vertex_t x : cube_vertices_for(ds, q, mode)) {
            double s = 0.0;
            for (vertex_t z : ring) s += std::abs(op.K(x, z)) * ds.mu().at(z);
            best = std::max(best, s);
        }
    }
    return best;
}

BoundReport verify_krestf1(const BergmanModel& model, cube_t q, int ell) {
    const DyadicSystem& ds = model.system();
    const RadialTree& t = ds.tree();
    if (!ds.valid(q) || ds.is_point_set(q))
        throw std::invalid_argument("cube must contain more than one point");
    const vertex_t b = ds.base_vertex(q);
    const int k = t.level(b);
    if (ell < 1 || ell > k) throw std::invalid_argument("ancestor distance out of range");

    const vertex_t anc_l = t.ancestor(b, ell);
    const vertex_t anc_lm1 = t.ancestor(b, ell - 1);
    const auto cands = cube_candidates(ds, q);
    const vertex_t n = t.size();
    std::vector<char> inner(n, 0);
    for (const auto& r : t.sector_ranges(anc_lm1))
        for (vertex_t z = r.begin; z < r.end; ++z) inner[z] = 1;

    double lhs_in = 0.0, lhs_out = 0.0;
    std::vector<double> col(cands.size());
    for (const auto& r : t.sector_ranges(anc_l)) {
        for (vertex_t z = r.begin; z < r.end; ++z) {
            for (std::size_t i = 0; i < cands.size(); ++i)
                col[i] = model.kernel_cube(anc_l, z, cands[i]);
            double d = 0.0;
            for (std::size_t i = 0; i < cands.size(); ++i)
                for (std::size_t j = i + 1; j < cands.size(); ++j)
                    d = std::max(d, std::abs(col[i] - col[j]));
            (inner[z] ? lhs_in : lhs_out) = std::max(inner[z] ? lhs_in : lhs_out, d);
        }
    }
    const double mass = ds.mass(ds.ancestor(q, ell - 1));
    const double rhs_in = nu_any(t, k - ell + 1, k) / mass;
    const double rhs_out = nu_any(t, k - ell, k) / mass;
    BoundReport rep;
    rep.cases.push_back({"krestf1_in", k, ell, lhs_in, rhs_in, lhs_in / rhs_in});
    rep.cases.push_back({"krestf1_out", k, ell, lhs_out, rhs_out, lhs_out / rhs_out});
    return rep;
}

BoundReport verify_krestf2(const BergmanModel& model, cube_t q) {
    const DyadicSystem& ds = model.system();
    const RadialTree& t = ds.tree();
    if (!ds.valid(q) || ds.is_point_set(q))
        throw std::invalid_argument("cube must contain more than one point");
    const vertex_t b = ds.base_vertex(q);
    if (b == 0) throw std::invalid_argument("cube needs a parent");
    const int k = t.level(b);
    const vertex_t p = t.parent(b);

    // Candidates span Q^{(1)} minus its base vertex.
    std::vector<vertex_t> cands;
    for (vertex_t c = t.child_begin(p); c < t.child_end(p); ++c)
        for (const auto& r : t.sector_ranges(c)) cands.push_back(r.begin);

    double lhs_same = 0.0, lhs_split = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i)
        for (std::size_t j = i; j < cands.size(); ++j) {
            const double v = std::abs(model.kernel_cube(p, cands[i], cands[j]));
            if (t.confluent(cands[i], cands[j]) == p)
                lhs_split = std::max(lhs_split, v);
            else
                lhs_same = std::max(lhs_same, v);
        }
    const double mq = ds.mass(q);
    const double rhs_same = 1.0 / mq;
    const double rhs_split = 1.0 / (t.q_at_level(k - 1) * mq);
    BoundReport rep;
    rep.cases.push_back({"krestf2_same_branch", k, 1, lhs_same, rhs_same, lhs_same / rhs_same});
    rep.cases.push_back({"krestf2_split", k, 1, lhs_split, rhs_split, lhs_split / rhs_split});
    return rep;
}

BoundReport verify_krest(const BergmanModel& model, cube_t q, const std::vector<cube_t>& F,
                         cube_t q0) {
    const DyadicSystem& ds = model.system();
    const RadialTree& t = ds.tree();
    if (!ds.valid(q) || ds.is_point_set(q))
        throw std::invalid_argument("cube must contain more than one point");
    if (!ds.subset(q, q0)) throw std::invalid_argument("cube not inside the host cube");
    for (cube_t r : F)
        if (ds.subset(q, r)) throw std::invalid_argument("cube lies inside the excluded family");
    const vertex_t b = ds.base_vertex(q);
    const int k = t.level(b);
    const auto cands = cube_candidates(ds, q);

    BoundReport rep;
    for (int ell = 1; ell <= k; ++ell) {
        const vertex_t anc_l = t.ancestor(b, ell);
        const vertex_t anc_lm1 = t.ancestor(b, ell - 1);
        std::vector<char> inner(t.size(), 0);
        for (const auto& r : t.sector_ranges(anc_lm1))
            for (vertex_t z = r.begin; z < r.end; ++z) inner[z] = 1;

        double lhs_base = 0.0, lhs_annulus = 0.0;
        std::vector<double> col(cands.size());
        for (const auto& r : t.sector_ranges(anc_l))
            for (vertex_t z = r.begin; z < r.end; ++z) {
                if (inner[z]) continue;  // annulus only
                for (std::size_t i = 0; i < cands.size(); ++i)
                    col[i] = model.kernel_truncated(F, q0, z, cands[i]);
                double d = 0.0;
                for (std::size_t i = 0; i < cands.size(); ++i)
                    for (std::size_t j = i + 1; j < cands.size(); ++j)
                        d = std::max(d, std::abs(col[i] - col[j]));
                if (z == anc_l)
                    lhs_base = std::max(lhs_base, d);
                else
                    lhs_annulus = std::max(lhs_annulus, d);
            }
        const double nu = nu_any(t, k - ell, k);
        const double rhs_base = nu / ds.mass(anc_l);
        const double rhs_annulus = nu / ds.mass(anc_lm1);
        rep.cases.push_back(
            {"krest_base", k, ell, lhs_base, rhs_base, lhs_base / rhs_base});
        rep.cases.push_back(
            {"krest_annulus", k, ell, lhs_annulus, rhs_annulus, lhs_annulus / rhs_annulus});
    }
    return rep;
}

BoundReport verify_diff_bounds(const BergmanModel& model, const SimpleAtomicBlock& b, int ell) {
    const DyadicSystem& ds = model.system();
    const RadialTree& t = ds.tree();
    const vertex_t base = ds.base_vertex(b.cube);
    const int k = ds.generation(b.cube);
    if (ell < 1 || ell > t.level(base))
        throw std::invalid_argument("ancestor distance out of range");

    const vertex_t cl = ds.base_vertex(ds.closure(b.cube));
    const vertex_t anc_l = t.ancestor(cl, ell);
    const vertex_t anc_lm1 = t.ancestor(cl, ell - 1);
    GridFunction d = model.apply_diff(anc_l, b.values);

    std::vector<char> inner(t.size(), 0);
    for (const auto& r : t.sector_ranges(anc_lm1))
        for (vertex_t z = r.begin; z < r.end; ++z) inner[z] = 1;
    double lhs_in = 0.0, lhs_out = 0.0;
    for (const auto& r : t.sector_ranges(anc_l))
        for (vertex_t z = r.begin; z < r.end; ++z)
            (inner[z] ? lhs_in : lhs_out) =
                std::max(inner[z] ? lhs_in : lhs_out, std::abs(d[z]));

    double l1 = 0.0;
    for (vertex_t v = 0; v < t.size(); ++v) l1 += std::abs(b.values[v]) * ds.mu().at(v);
    const double mass = ds.mass(ds.ancestor(b.cube, ell - 1));
    const double rhs_in = nu_any(t, k - ell + 1, k) * l1 / mass;
    const double rhs_out = nu_any(t, k - ell, k) * l1 / mass;
    BoundReport rep;
    const int lvl = t.level(base);
    rep.cases.push_back({"diff_in", lvl, ell, lhs_in, rhs_in,
                         rhs_in > 0 ? lhs_in / rhs_in : 0.0});
    rep.cases.push_back({"diff_out", lvl, ell, lhs_out, rhs_out,
                         rhs_out > 0 ? lhs_out / rhs_out : 0.0});
    return rep;
}

}  // namespace treeberg
