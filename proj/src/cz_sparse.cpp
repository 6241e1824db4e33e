#include "treeberg/cz_sparse.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>

#include "treeberg/filtration.hpp"

namespace treeberg {

namespace {

double l1_norm(const DyadicSystem& ds, const GridFunction& f) {
    const MeasureVector& mu = ds.mu();
    double s = 0.0;
    for (vertex_t v = 0; v < ds.tree().size(); ++v) s += std::abs(f[v]) * mu.at(v);
    return s;
}

// Average over a cube using precomputed sector integrals.
double fast_average(const DyadicSystem& ds, const GridFunction& f,
                    const std::vector<double>& si, cube_t q) {
    const vertex_t v = ds.base_vertex(q);
    if (ds.is_singleton(q) || ds.is_point_set(q)) return f[v];
    return si[v] / ds.mass(q);
}

}  // namespace

GridFunction CZDecomposition::bad_part(const DyadicSystem& ds, const GridFunction& f,
                                       std::size_t j) const {
    const CZBadPart& p = bad.at(j);
    GridFunction b(ds.tree().size(), 0.0);
    for (vertex_t v : ds.vertices(p.cube)) b[v] += f[v];
    for (vertex_t v : ds.vertices(ds.parent(p.cube))) b[v] -= p.avg;
    return b;
}

CZDecomposition cz_decompose(const DyadicSystem& ds, const GridFunction& f, double lambda,
                             cube_t r) {
    if (!ds.valid(r)) throw std::invalid_argument("cz_decompose: invalid cube");
    const std::vector<double> si = ds.sector_integrals(f);
    if (lambda <= fast_average(ds, f, si, r))
        throw std::invalid_argument("cz_decompose: height must exceed the base average");

    CZDecomposition dec;
    dec.lambda = lambda;
    dec.restricting_cube = r;

    // Stopping time: descend from r, stop at the first cube whose average
    // exceeds lambda. Those cubes are maximal by construction.
    std::vector<cube_t> stack{r};
    while (!stack.empty()) {
        const cube_t q = stack.back();
        stack.pop_back();
        for (cube_t c : ds.children(q)) {
            if (fast_average(ds, f, si, c) > lambda) {
                const double avg = ds.integral(f, c) / ds.mass(ds.parent(c));
                dec.bad.push_back({c, avg});
            } else {
                stack.push_back(c);
            }
        }
    }

    dec.good = f;
    std::vector<char> covered(ds.tree().size(), 0);
    for (const CZBadPart& p : dec.bad) {
        for (vertex_t v : ds.vertices(p.cube)) {
            dec.good[v] -= f[v];
            covered[v] = 1;
        }
        for (vertex_t v : ds.vertices(ds.parent(p.cube))) dec.good[v] += p.avg;
    }

    dec.parents_escape = true;
    for (const CZBadPart& p : dec.bad) {
        bool escapes = false;
        for (vertex_t v : ds.vertices(ds.parent(p.cube)))
            if (!covered[v]) {
                escapes = true;
                break;
            }
        if (!escapes) {
            dec.parents_escape = false;
            break;
        }
    }
    return dec;
}

CZConstants cz_constants(const DyadicSystem& ds, const CZDecomposition& dec,
                         const GridFunction& f) {
    const MeasureVector& mu = ds.mu();
    const double f1 = l1_norm(ds, f);
    CZConstants c{};
    c.g_l1 = l1_norm(ds, dec.good) / f1;

    double bsum = 0.0;
    for (const CZBadPart& p : dec.bad) {
        // |b| = |f - avg| on Q and avg on the rest of the parent.
        for (vertex_t v : ds.vertices(p.cube))
            bsum += std::abs(f[v] - p.avg) * mu.at(v);
        bsum += std::abs(p.avg) * (ds.mass(ds.parent(p.cube)) - ds.mass(p.cube));
    }
    c.b_l1_sum = bsum / f1;

    double g2 = 0.0;
    for (vertex_t v = 0; v < ds.tree().size(); ++v)
        g2 += dec.good[v] * dec.good[v] * mu.at(v);
    c.g_l2 = g2 / (dec.lambda * f1);
    c.g_bmo = bmo_norm(ds, dec.good) / dec.lambda;
    return c;
}

namespace {

// One pass of the stopping-time construction rooted at q0. Restriction to q0
// is implicit: every cube examined lies inside q0, where the restricted and
// the original functions agree.
void sparse_recurse(const DyadicSystem& ds, const std::vector<double>& si1,
                    const std::vector<double>& si2, const GridFunction& f1,
                    const GridFunction& f2, cube_t q0, std::vector<char>& removed,
                    SparseFamily& out) {
    const double t1 = 4.0 * fast_average(ds, f1, si1, q0);
    const double t2 = 4.0 * fast_average(ds, f2, si2, q0);

    std::vector<cube_t> stopped;
    std::vector<cube_t> stack{q0};
    while (!stack.empty()) {
        const cube_t q = stack.back();
        stack.pop_back();
        for (cube_t c : ds.children(q)) {
            if (fast_average(ds, f1, si1, c) > t1 || fast_average(ds, f2, si2, c) > t2)
                stopped.push_back(c);
            else
                stack.push_back(c);
        }
    }

    SparseEntry e;
    e.cube = q0;
    for (cube_t c : stopped)
        for (vertex_t v : ds.vertices(c)) removed[v] = 1;
    double emass = 0.0;
    for (vertex_t v : ds.vertices(q0))
        if (!removed[v]) {
            e.exceptional.push_back(v);
            emass += ds.mu().at(v);
        }
    for (cube_t c : stopped)
        for (vertex_t v : ds.vertices(c)) removed[v] = 0;
    e.exceptional_mass = emass;
    if (emass < 0.5 * ds.mass(q0) * (1.0 - 1e-12))
        throw std::logic_error("sparse_family: half-density invariant failed");
    out.entries.push_back(std::move(e));

    for (cube_t c : stopped) sparse_recurse(ds, si1, si2, f1, f2, c, removed, out);
}

}  // namespace

SparseFamily sparse_family(const DyadicSystem& ds, const GridFunction& f1,
                           const GridFunction& f2) {
    const std::vector<double> si1 = ds.sector_integrals(f1);
    const std::vector<double> si2 = ds.sector_integrals(f2);
    if (si1[0] <= 0.0 || si2[0] <= 0.0)
        throw std::invalid_argument("sparse_family: inputs must have positive mass");
    SparseFamily s;
    std::vector<char> removed(ds.tree().size(), 0);
    sparse_recurse(ds, si1, si2, f1, f2, ds.root_cube(), removed, s);
    return s;
}

SparseForms sparse_forms(const DyadicSystem& ds, const SparseFamily& s,
                         const GridFunction& f1, const GridFunction& f2) {
    const std::vector<double> si1 = ds.sector_integrals(f1);
    const std::vector<double> si2 = ds.sector_integrals(f2);

    SparseForms out{0.0, 0.0};
    // Second-argument averages of sector members, grouped by dyadic parent.
    std::unordered_map<cube_t, double> sibling_sum;
    for (const SparseEntry& e : s.entries) {
        if (!ds.valid(e.cube)) throw std::invalid_argument("sparse_forms: invalid cube");
        out.a_form += fast_average(ds, f1, si1, e.cube) *
                      fast_average(ds, f2, si2, e.cube) * ds.mass(e.cube);
        if (ds.is_sector(e.cube) && e.cube != ds.root_cube())
            sibling_sum[ds.parent(e.cube)] += fast_average(ds, f2, si2, e.cube);
    }
    for (const SparseEntry& e : s.entries) {
        if (!ds.is_sector(e.cube) || e.cube == ds.root_cube()) continue;
        const cube_t par = ds.parent(e.cube);
        const int q = ds.tree().q_at_level(ds.tree().level(ds.base_vertex(par)));
        out.e_form += fast_average(ds, f1, si1, e.cube) * (1.0 / q) *
                      sibling_sum.at(par) * ds.mass(e.cube);
    }
    return out;
}

DominationReport domination_report(const BergmanModel& model, const GridFunction& f1,
                                   const GridFunction& f2) {
    const DyadicSystem& ds = model.system();
    const GridFunction pf = model.project(f1);
    double lhs = 0.0;
    for (vertex_t v = 0; v < ds.tree().size(); ++v) lhs += pf[v] * f2[v] * ds.mu().at(v);
    lhs = std::abs(lhs);

    const SparseFamily s = sparse_family(ds, f1, f2);
    const SparseForms forms = sparse_forms(ds, s, f1, f2);
    DominationReport r;
    r.lhs = lhs;
    r.a_form = forms.a_form;
    r.e_form = forms.e_form;
    r.ratio = lhs / (forms.a_form + forms.e_form);
    return r;
}

nlohmann::json sparse_family_json(const DyadicSystem& ds, const SparseFamily& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SparseEntry& e : s.entries) {
        arr.push_back({{"cube", e.cube},
                       {"generation", ds.generation(e.cube)},
                       {"is_sector", ds.is_sector(e.cube)},
                       {"exceptional_mass", e.exceptional_mass},
                       {"parent", ds.parent(e.cube)}});
    }
    return arr;
}

}  // namespace treeberg
