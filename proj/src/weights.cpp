#include "treeberg/weights.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace treeberg {

namespace {

void check_p(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("weight characteristic: need 1 < p < inf");
}

double conjugate(double p) { return p / (p - 1.0); }

// Per-cube averages of w and of the dual weight w^{-p'/p}, via one bottom-up
// sweep each.
struct DualAverages {
    std::vector<double> w_int;      // sector integrals of w
    std::vector<double> s_int;      // sector integrals of w^{-p'/p}
    GridFunction sigma;
    double avg_w(const DyadicSystem& ds, const Weight& w, cube_t q) const {
        vertex_t v = ds.base_vertex(q);
        if (ds.is_singleton(q) || ds.is_point_set(q)) return w[v];
        return w_int[v] / ds.mass(q);
    }
    double avg_sigma(const DyadicSystem& ds, cube_t q) const {
        vertex_t v = ds.base_vertex(q);
        if (ds.is_singleton(q) || ds.is_point_set(q)) return sigma[v];
        return s_int[v] / ds.mass(q);
    }
};

DualAverages dual_averages(const DyadicSystem& ds, const Weight& w, double p) {
    DualAverages da;
    const double pp = conjugate(p);
    da.sigma.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) da.sigma[i] = std::pow(w[i], -pp / p);
    da.w_int = ds.sector_integrals(w);
    da.s_int = ds.sector_integrals(da.sigma);
    return da;
}

double lp_norm(const DyadicSystem& ds, const GridFunction& f, const Weight& w, double p) {
    double s = 0.0;
    for (vertex_t v = 0; v < ds.tree().size(); ++v)
        s += std::pow(std::abs(f[v]), p) * w[v] * ds.mu().at(v);
    return std::pow(s, 1.0 / p);
}

}  // namespace

Weight make_weight(const RadialTree& tree, const nlohmann::json& spec) {
    const vertex_t n = tree.size();
    Weight w(n, 1.0);
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "radial_geometric") {
        const double beta = spec.at("beta").get<double>();
        if (!(beta > 0.0)) throw std::invalid_argument("make_weight: beta must be positive");
        for (vertex_t v = 0; v < n; ++v) w[v] = std::pow(beta, tree.level(v));
    } else if (kind == "sector_bump") {
        const int level = spec.at("level").get<int>();
        const vertex_t child = spec.at("child").get<vertex_t>();
        const double factor = spec.at("factor").get<double>();
        if (level < 0 || level > tree.depth() ||
            child >= tree.level_size(level))
            throw std::invalid_argument("make_weight: bump location out of range");
        if (!(factor > 0.0))
            throw std::invalid_argument("make_weight: factor must be positive");
        const vertex_t root = tree.level_begin(level) + child;
        for (const auto& r : tree.sector_ranges(root))
            for (vertex_t v = r.begin; v < r.end; ++v) w[v] = factor;
    } else if (kind == "random") {
        const std::uint64_t seed = spec.at("seed").get<std::uint64_t>();
        const double r = spec.at("log_range").get<double>();
        if (!(r >= 0.0)) throw std::invalid_argument("make_weight: bad log_range");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-r, r);
        for (vertex_t v = 0; v < n; ++v) w[v] = std::pow(10.0, dist(rng));
    } else {
        throw std::invalid_argument("make_weight: unknown kind '" + kind + "'");
    }
    return w;
}

double bp_characteristic(const DyadicSystem& ds, const Weight& w, double p) {
    check_p(p);
    const double pp = conjugate(p);
    const DualAverages da = dual_averages(ds, w, p);
    double best = 0.0;
    for (cube_t q : ds.cubes()) {
        if (ds.is_point_set(q) || ds.is_singleton(q)) {
            best = std::max(best, 1.0);  // point cubes contribute exactly 1
            continue;
        }
        const double val =
            da.avg_w(ds, w, q) * std::pow(da.avg_sigma(ds, q), p / pp);
        best = std::max(best, val);
    }
    return best;
}

double tilde_bp_characteristic(const DyadicSystem& ds, const Weight& w, double p) {
    check_p(p);
    const double pp = conjugate(p);
    const DualAverages da = dual_averages(ds, w, p);
    // Pair sup factorizes per sibling group: max <w>_Q times max <sigma>_R.
    std::unordered_map<cube_t, std::pair<double, double>> group;
    for (cube_t q : ds.cubes()) {
        if (q == ds.root_cube()) continue;
        const cube_t par = ds.parent(q);
        auto& g = group.try_emplace(par, 0.0, 0.0).first->second;
        g.first = std::max(g.first, da.avg_w(ds, w, q));
        g.second = std::max(g.second, da.avg_sigma(ds, q));
    }
    double best = 0.0;
    for (const auto& [par, g] : group)
        best = std::max(best, g.first * std::pow(g.second, p / pp));
    return best;
}

OpNormResult weighted_opnorm_lowerbound(const BergmanModel& model, const Weight& w, double p,
                                        OpNormStrategy strategy, double tol, int max_iter) {
    check_p(p);
    const DyadicSystem& ds = model.system();
    const vertex_t n = ds.tree().size();

    if (strategy == OpNormStrategy::PowerIteration) {
        if (p != 2.0)
            throw std::invalid_argument("power iteration requires p = 2");
        std::vector<double> sw(n);
        for (vertex_t v = 0; v < n; ++v) sw[v] = std::sqrt(w[v]);
        // A = T* T with T = D_sw P D_{1/sw}; the L2(w) norm of P is
        // sqrt(lambda_max(A)), computed matrix-free.
        auto apply_A = [&](const GridFunction& x) {
            GridFunction t(n);
            for (vertex_t v = 0; v < n; ++v) t[v] = x[v] / sw[v];
            t = model.project(t);
            for (vertex_t v = 0; v < n; ++v) t[v] *= w[v];
            t = model.project(t);
            for (vertex_t v = 0; v < n; ++v) t[v] /= sw[v];
            return t;
        };
        std::mt19937_64 rng(20260823);
        std::uniform_real_distribution<double> dist(0.1, 1.0);
        GridFunction x(n);
        for (auto& v : x) v = dist(rng);
        auto dot = [&](const GridFunction& a, const GridFunction& b) {
            double s = 0.0;
            for (vertex_t v = 0; v < n; ++v) s += a[v] * b[v] * ds.mu().at(v);
            return s;
        };
        double lam = 0.0;
        OpNormResult res{0.0, false, 0};
        for (int it = 1; it <= max_iter; ++it) {
            GridFunction y = apply_A(x);
            const double xx = dot(x, x);
            const double new_lam = dot(x, y) / xx;
            const double yn = std::sqrt(dot(y, y));
            if (yn == 0.0) {  // landed in the kernel; restart deterministically
                for (auto& v : x) v = dist(rng);
                continue;
            }
            for (vertex_t v = 0; v < n; ++v) x[v] = y[v] / yn;
            res.iterations = it;
            if (it > 1 && std::abs(new_lam - lam) <= tol * std::max(1.0, new_lam)) {
                lam = new_lam;
                res.converged = true;
                break;
            }
            lam = new_lam;
        }
        res.value = std::sqrt(std::max(lam, 0.0));
        return res;
    }

    // Candidate search: Rayleigh ratios over structured and random inputs.
    double best = 0.0;
    auto consider = [&](const GridFunction& f) {
        const double den = lp_norm(ds, f, w, p);
        if (den == 0.0) return;
        best = std::max(best, lp_norm(ds, model.project(f), w, p) / den);
    };
    consider(GridFunction(n, 1.0));
    for (cube_t q : ds.cubes()) {
        GridFunction f(n, 0.0);
        for (vertex_t v : ds.vertices(q)) f[v] = 1.0;
        consider(f);
    }
    for (vertex_t v = 0; v < n; ++v) {
        GridFunction f(n, 0.0);
        f[v] = 1.0 / ds.mu().at(v);
        consider(f);
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 64; ++trial) {
        GridFunction f(n);
        for (auto& v : f) v = dist(rng);
        consider(f);
    }
    return {best, true, 0};
}

TheoremBCheck theoremB_check(const BergmanModel& model, const Weight& w, double p) {
    check_p(p);
    const double pp = conjugate(p);
    TheoremBCheck out;
    out.bp = bp_characteristic(model.system(), w, p);
    out.tilde_bp = tilde_bp_characteristic(model.system(), w, p);
    const OpNormStrategy strat =
        p == 2.0 ? OpNormStrategy::PowerIteration : OpNormStrategy::RandomSearch;
    out.norm_lb = weighted_opnorm_lowerbound(model, w, p, strat).value;
    out.bound = std::pow(out.tilde_bp, 1.0 / p) *
                std::pow(out.bp, pp / (p * p) + 1.0 / pp);
    out.ratio = out.norm_lb / out.bound;
    return out;
}

double ap_sparse_constant(const DyadicSystem& ds, const SparseFamily& s, const Weight& w,
                          double p) {
    const double bp = bp_characteristic(ds, w, p);
    double worst = 0.0;
    for (const SparseEntry& e : s.entries) {
        double wq = 0.0;
        for (vertex_t v : ds.vertices(e.cube)) wq += w[v] * ds.mu().at(v);
        double we = 0.0;
        for (vertex_t v : e.exceptional) we += w[v] * ds.mu().at(v);
        if (we <= 0.0) throw std::invalid_argument("ap_sparse_constant: empty E_Q");
        worst = std::max(worst, wq / (bp * we));
    }
    return worst;
}

}  // namespace treeberg
