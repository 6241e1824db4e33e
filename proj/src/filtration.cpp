#include "treeberg/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treeberg {

GridFunction conditional_expectation(const DyadicSystem& ds, const GridFunction& f, int k) {
    const RadialTree& tree = ds.tree();
    if (k < 0 || k > tree.depth()) throw std::out_of_range("generation out of range");
    const vertex_t n = tree.size();
    GridFunction out(n);
    if (k == 0) {
        double total = 0.0;
        for (vertex_t v = 0; v < n; ++v) total += f[v] * ds.mu().at(v);
        const double avg = total / ds.mu().total_mass();
        std::fill(out.begin(), out.end(), avg);
        return out;
    }
    // Singletons above the cut keep their value; sectors at level k get averaged.
    for (vertex_t v = tree.level_begin(0); v < tree.level_begin(k); ++v) out[v] = f[v];
    auto si = ds.sector_integrals(f);
    for (vertex_t v = tree.level_begin(k); v < tree.level_end(k); ++v) {
        const double avg = si[v] / ds.mass(v);
        for (const auto& r : tree.sector_ranges(v))
            for (vertex_t x = r.begin; x < r.end; ++x) out[x] = avg;
    }
    return out;
}

GridFunction martingale_difference(const DyadicSystem& ds, const GridFunction& f, int k) {
    if (k < 1) throw std::out_of_range("martingale difference needs k >= 1");
    GridFunction ek = conditional_expectation(ds, f, k);
    GridFunction ekm = conditional_expectation(ds, f, k - 1);
    for (vertex_t v = 0; v < static_cast<vertex_t>(ek.size()); ++v) ek[v] -= ekm[v];
    return ek;
}

GridFunction maximal_function(const DyadicSystem& ds, const GridFunction& f) {
    const RadialTree& tree = ds.tree();
    const vertex_t n = tree.size();
    GridFunction absf(n);
    for (vertex_t v = 0; v < n; ++v) absf[v] = std::abs(f[v]);
    auto si = ds.sector_integrals(absf);
    // best[v] = max over sector cubes S_a, a ancestor-or-self of v.
    GridFunction out(n);
    for (vertex_t v = 0; v < n; ++v) {
        double best = si[v] / ds.mass(v);
        if (v > 0) best = std::max(best, out[tree.parent(v)]);
        out[v] = best;
    }
    // Singleton cube {v} contributes |f(v)|.
    for (vertex_t v = 0; v < n; ++v) out[v] = std::max(out[v], absf[v]);
    return out;
}

BmoTerms bmo_terms(const DyadicSystem& ds, const GridFunction& f) {
    const RadialTree& tree = ds.tree();
    const MeasureVector& mu = ds.mu();
    auto si = ds.sector_integrals(f);

    auto avg_of = [&](cube_t q) {
        return ds.is_singleton(q) ? f[ds.base_vertex(q)] : si[q] / ds.mass(q);
    };

    double osc = 0.0, jump = 0.0;
    for (cube_t q : ds.cubes()) {
        const double aq = avg_of(q);
        if (!ds.is_point_set(q)) {
            double dev = 0.0;
            for (const auto& r : tree.sector_ranges(q)) {
                double lvl = 0.0;
                for (vertex_t x = r.begin; x < r.end; ++x) lvl += std::abs(f[x] - aq);
                dev += lvl * mu.level_value(r.level);
            }
            osc = std::max(osc, dev / ds.mass(q));
        }
        const cube_t p = ds.parent(q);
        if (p >= 0) jump = std::max(jump, std::abs(aq - avg_of(p)));
    }
    return {osc, jump, std::abs(si[0])};
}

double bmo_norm(const DyadicSystem& ds, const GridFunction& f) {
    const BmoTerms t = bmo_terms(ds, f);
    return t.oscillation + t.parent_jump + t.mean;
}

double bmo_norm_filtration(const DyadicSystem& ds, const GridFunction& f) {
    const vertex_t n = ds.tree().size();
    GridFunction e0 = conditional_expectation(ds, f, 0);
    double out = std::abs(e0[0]);
    for (int k = 1; k <= ds.tree().depth(); ++k) {
        GridFunction ekm = conditional_expectation(ds, f, k - 1);
        GridFunction g(n);
        for (vertex_t v = 0; v < n; ++v) g[v] = std::abs(f[v] - ekm[v]);
        GridFunction ek = conditional_expectation(ds, g, k);
        double m = 0.0;
        for (vertex_t v = 0; v < n; ++v) m = std::max(m, std::abs(ek[v]));
        out = std::max(out, std::abs(e0[0]) + m);
    }
    return out;
}

double h1_norm(const DyadicSystem& ds, const GridFunction& f) {
    const vertex_t n = ds.tree().size();
    const int L = ds.tree().depth();
    GridFunction sq(n, 0.0);
    GridFunction prev = conditional_expectation(ds, f, 0);
    for (int k = 1; k <= L; ++k) {
        GridFunction cur = conditional_expectation(ds, f, k);
        for (vertex_t v = 0; v < n; ++v) {
            const double d = cur[v] - prev[v];
            sq[v] += d * d;
        }
        prev = std::move(cur);
    }
    double out = 0.0;
    for (vertex_t v = 0; v < n; ++v) out += std::sqrt(sq[v]) * ds.mu().at(v);
    return out;
}

namespace {

// Assembles s = a - <a>_{Q^{(1)}} 1_{Q^{(1)}} without the size-bound rescale.
SimpleAtomicBlock assemble_block(const DyadicSystem& ds, cube_t cube, GridFunction a,
                                 double scale) {
    const cube_t parent = ds.parent(cube);
    const double avg = ds.average(a, parent);
    GridFunction s = a;
    for (const auto& r : ds.ranges(parent))
        for (vertex_t x = r.begin; x < r.end; ++x) s[x] -= avg;
    return {cube, parent, std::move(a), std::move(s), scale};
}

}  // namespace

SimpleAtomicBlock make_simple_block(const DyadicSystem& ds, cube_t cube, const GridFunction& a) {
    if (!ds.valid(cube)) throw std::invalid_argument("invalid cube id");
    if (ds.parent(cube) < 0) throw std::invalid_argument("simple block needs a cube with a parent");
    GridFunction inner(ds.tree().size(), 0.0);
    double amax = 0.0;
    for (vertex_t v = 0; v < static_cast<vertex_t>(a.size()); ++v) {
        if (a[v] != 0.0 && !ds.contains(cube, v))
            throw std::invalid_argument("inner function not supported in the cube");
        inner[v] = a[v];
        amax = std::max(amax, std::abs(a[v]));
    }
    const double bound = 1.0 / ds.mass(cube);
    double scale = 1.0;
    if (amax > bound * (1.0 + 1e-12)) {
        scale = bound / amax;
        for (auto& v : inner) v *= scale;
    }
    return assemble_block(ds, cube, std::move(inner), scale);
}

BlockDecomposition decompose_block(const DyadicSystem& ds, cube_t support_cube,
                                   const std::vector<Subatom>& subatoms) {
    if (!ds.valid(support_cube) || ds.parent(support_cube) < 0)
        throw std::invalid_argument("block support cube must be a proper cube with a parent");
    const int k = ds.generation(support_cube);

    double mean = 0.0, l1 = 0.0, coeff_in = 0.0;
    for (const auto& sa : subatoms) {
        if (!ds.subset(sa.cube, support_cube))
            throw std::invalid_argument("subatom cube not contained in the support cube");
        if (ds.generation(sa.cube) < k)
            throw std::invalid_argument("subatom generation below the block generation");
        double integral = 0.0;
        for (vertex_t v = 0; v < static_cast<vertex_t>(sa.a.size()); ++v) {
            if (sa.a[v] != 0.0 && !ds.contains(sa.cube, v))
                throw std::invalid_argument("subatom not supported in its cube");
            integral += sa.a[v] * ds.mu().at(v);
        }
        mean += sa.lambda * integral;
        l1 += std::abs(sa.lambda) * std::abs(integral);
        coeff_in += std::abs(sa.lambda);
    }
    if (std::abs(mean) > 1e-10 * std::max(1.0, l1))
        throw std::invalid_argument("block mean is not zero");

    BlockDecomposition out;
    out.coefficient_sum_in = coeff_in;
    out.coefficient_sum_out = 0.0;
    const vertex_t n = ds.tree().size();
    for (const auto& sa : subatoms) {
        const int d = ds.generation(sa.cube) - k;
        GridFunction a0(n, 0.0);
        for (vertex_t v = 0; v < static_cast<vertex_t>(sa.a.size()); ++v) a0[v] = sa.a[v];
        out.blocks.emplace_back(sa.lambda, assemble_block(ds, sa.cube, std::move(a0), 1.0));
        out.coefficient_sum_out += std::abs(sa.lambda);
        // Telescoping chain from Q_i up to the support cube; each piece is a
        // simple block on an ancestor, coefficient λ/(d+1).
        cube_t c = sa.cube;
        for (int l = 1; l <= d; ++l) {
            c = ds.parent(c);
            const double avg = ds.average(sa.a, c);
            GridFunction al(n, 0.0);
            for (const auto& r : ds.ranges(c))
                for (vertex_t x = r.begin; x < r.end; ++x) al[x] = (d + 1) * avg;
            out.blocks.emplace_back(sa.lambda / (d + 1), assemble_block(ds, c, std::move(al), 1.0));
            out.coefficient_sum_out += std::abs(sa.lambda) / (d + 1);
        }
    }
    return out;
}

}  // namespace treeberg
