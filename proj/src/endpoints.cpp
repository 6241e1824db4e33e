#include "treeberg/endpoints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "treeberg/filtration.hpp"

namespace treeberg {

namespace {

double l1(const DyadicSystem& ds, const GridFunction& f) {
    double s = 0.0;
    for (vertex_t v = 0; v < ds.tree().size(); ++v) s += std::abs(f[v]) * ds.mu().at(v);
    return s;
}

double linf(const GridFunction& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

std::string tag(const char* prefix, long long a, long long b = -1) {
    char buf[64];
    if (b < 0)
        std::snprintf(buf, sizeof buf, "%s%lld", prefix, a);
    else
        std::snprintf(buf, sizeof buf, "%s%lld_%lld", prefix, a, b);
    return buf;
}

// Deterministic representative cubes: one sector per level (first and last)
// plus one singleton per level with non-leaf vertices.
std::vector<cube_t> representative_cubes(const DyadicSystem& ds) {
    const RadialTree& t = ds.tree();
    std::vector<cube_t> out;
    for (int l = 0; l <= t.depth(); ++l) {
        out.push_back(t.level_begin(l));
        if (t.level_size(l) > 1) out.push_back(t.level_end(l) - 1);
        if (l < t.depth()) out.push_back(t.size() + t.level_begin(l));
    }
    return out;
}

// sup over lambda in {|g(x)|} of lambda * mu(|g| > lambda).
double level_set_sup(const DyadicSystem& ds, const GridFunction& g) {
    const vertex_t n = ds.tree().size();
    std::vector<std::pair<double, double>> vals(n);
    for (vertex_t v = 0; v < n; ++v) vals[v] = {std::abs(g[v]), ds.mu().at(v)};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = 0.0, mass_above = 0.0;
    vertex_t i = 0;
    while (i < n) {
        const double lam = vals[i].first;
        best = std::max(best, lam * mass_above);
        while (i < n && vals[i].first == lam) mass_above += vals[i++].second;
    }
    return best;
}

// Unit-certified simple atomic blocks over the representative cubes:
// inner functions bounded by 1/mu(Q) with constant, alternating, and seeded
// random sign patterns.
std::vector<std::pair<std::string, SimpleAtomicBlock>> block_candidates(
    const DyadicSystem& ds, std::uint64_t seed, int random_trials) {
    std::vector<std::pair<std::string, SimpleAtomicBlock>> out;
    const vertex_t n = ds.tree().size();
    std::mt19937_64 rng(seed);
    std::vector<cube_t> cubes;
    for (cube_t q : representative_cubes(ds))
        if (q != ds.root_cube()) cubes.push_back(q);
    for (cube_t q : cubes) {
        const double h = 1.0 / ds.mass(q);
        const std::vector<vertex_t> verts = ds.vertices(q);
        GridFunction a(n, 0.0);
        for (vertex_t v : verts) a[v] = h;
        out.emplace_back(tag("blk_const_", q), make_simple_block(ds, q, a));
        if (verts.size() > 1) {
            int sgn = 1;
            for (vertex_t v : verts) {
                a[v] = sgn * h;
                sgn = -sgn;
            }
            out.emplace_back(tag("blk_alt_", q), make_simple_block(ds, q, a));
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, cubes.size() - 1);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int trial = 0; trial < random_trials; ++trial) {
        const cube_t q = cubes[pick(rng)];
        const double h = 1.0 / ds.mass(q);
        GridFunction a(n, 0.0);
        for (vertex_t v : ds.vertices(q)) a[v] = amp(rng) * h;
        bool nonzero = false;
        for (double x : a) nonzero |= (x != 0.0);
        if (!nonzero) continue;
        out.emplace_back(tag("blk_rand_", trial), make_simple_block(ds, q, a));
    }
    return out;
}

}  // namespace

double EndpointReport::max_ratio() const {
    double m = 0.0;
    for (const auto& r : ratios) m = std::max(m, r.ratio);
    return m;
}

Operator projector_operator(const BergmanModel& model) {
    return [&model](const GridFunction& f) { return model.project(f); };
}

Operator kernel_apply(const KernelOperator& op, const DyadicSystem& ds) {
    return [op, &ds](const GridFunction& f) {
        const vertex_t n = ds.tree().size();
        GridFunction out(n, 0.0);
        for (vertex_t x = 0; x < n; ++x) {
            double s = 0.0;
            for (vertex_t y = 0; y < n; ++y) s += op.K(x, y) * f[y] * ds.mu().at(y);
            out[x] = s;
        }
        return out;
    };
}

EndpointReport weak11_ratio(const DyadicSystem& ds, const Operator& T, std::uint64_t seed,
                            int random_trials) {
    const vertex_t n = ds.tree().size();
    EndpointReport rep;
    rep.estimator = "weak11";
    rep.family = "point masses, cube indicators, seeded sparse nonnegative";

    auto consider = [&](const std::string& id, const GridFunction& f) {
        const double den = l1(ds, f);
        if (den == 0.0) return;
        rep.ratios.push_back({id, level_set_sup(ds, T(f)) / den});
    };

    const RadialTree& t = ds.tree();
    for (int l = 0; l <= t.depth(); ++l) {
        for (vertex_t v : {t.level_begin(l), t.level_end(l) - 1}) {
            GridFunction f(n, 0.0);
            f[v] = 1.0 / ds.mu().at(v);
            consider(tag("pm_", l, v), f);
            if (t.level_size(l) == 1) break;
        }
    }
    for (cube_t q : representative_cubes(ds)) {
        GridFunction f(n, 0.0);
        for (vertex_t v : ds.vertices(q)) f[v] = 1.0;
        consider(tag("ind_", q), f);
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<vertex_t> pick(0, n - 1);
    std::uniform_real_distribution<double> amp(0.1, 1.0);
    const vertex_t support = std::min<vertex_t>(n, 16);
    for (int trial = 0; trial < random_trials; ++trial) {
        GridFunction f(n, 0.0);
        for (vertex_t k = 0; k < support; ++k) f[pick(rng)] = amp(rng);
        consider(tag("rand_", trial), f);
    }
    return rep;
}

EndpointReport endpoint_ratios(const DyadicSystem& ds, const Operator& T, EndpointKind which,
                               std::uint64_t seed, int random_trials) {
    const vertex_t n = ds.tree().size();
    EndpointReport rep;

    if (which == EndpointKind::LinfToBmo) {
        rep.estimator = "linf_to_bmo";
        rep.family = "constant, cube sign patterns, seeded random signs";
        auto consider = [&](const std::string& id, const GridFunction& f) {
            rep.ratios.push_back({id, bmo_norm(ds, T(f)) / linf(f)});
        };
        consider("const", GridFunction(n, 1.0));
        for (cube_t q : representative_cubes(ds)) {
            if (q == ds.root_cube()) continue;
            GridFunction f(n, -1.0);
            for (vertex_t v : ds.vertices(q)) f[v] = 1.0;
            consider(tag("sign_", q), f);
        }
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(0.5);
        for (int trial = 0; trial < random_trials; ++trial) {
            GridFunction f(n);
            for (auto& x : f) x = coin(rng) ? 1.0 : -1.0;
            consider(tag("rad_", trial), f);
        }
        return rep;
    }

    rep.estimator = "h1_to_l1";
    rep.family = "unit-certified simple atomic blocks";
    for (const auto& [id, blk] : block_candidates(ds, seed, random_trials))
        rep.ratios.push_back({id, l1(ds, T(blk.values))});
    return rep;
}

EndpointReport strong_endpoint_ratios(const BergmanModel& model, StrongEndpointKind which,
                                      std::uint64_t seed, int random_trials) {
    const DyadicSystem& ds = model.system();
    const vertex_t n = ds.tree().size();
    EndpointReport rep;

    if (which == StrongEndpointKind::H1ToH1) {
        rep.estimator = "h1_to_h1";
        rep.family = "unit-certified simple atomic blocks";
        for (const auto& [id, blk] : block_candidates(ds, seed, random_trials))
            rep.ratios.push_back({id, h1_norm(ds, model.project(blk.values))});
        return rep;
    }

    rep.estimator = "bmo_to_bmo";
    rep.family = "constant, martingale differences, block sums, indicators, random bounded";
    auto consider = [&](const std::string& id, const GridFunction& f) {
        const double den = bmo_norm(ds, f);
        if (den < 1e-12) return;  // skip degenerate candidates
        rep.ratios.push_back({id, bmo_norm(ds, model.project(f)) / den});
    };
    consider("const", GridFunction(n, 1.0));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int k = 1; k <= ds.tree().depth(); ++k) {
        GridFunction g(n);
        for (auto& x : g) x = amp(rng);
        consider(tag("mdiff_", k), martingale_difference(ds, g, k));
    }
    for (cube_t q : representative_cubes(ds)) {
        GridFunction f(n, 0.0);
        for (vertex_t v : ds.vertices(q)) f[v] = 1.0;
        consider(tag("ind_", q), f);
    }
    {
        GridFunction sum(n, 0.0);
        for (const auto& [id, blk] : block_candidates(ds, seed + 1, 0)) {
            (void)id;
            for (vertex_t v = 0; v < n; ++v) sum[v] += blk.values[v];
        }
        consider("block_sum", sum);
    }
    for (int trial = 0; trial < random_trials; ++trial) {
        GridFunction f(n);
        for (auto& x : f) x = amp(rng);
        consider(tag("bounded_", trial), f);
    }
    return rep;
}

}  // namespace treeberg
