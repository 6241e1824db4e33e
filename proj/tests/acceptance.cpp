// Acceptance gate: nine grid-wide criteria, one pass/fail line each.
// Exit status = number of failed criteria. The first CLI argument must be the
// path to the experiment-runner binary (used by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "treeberg/cz_sparse.hpp"
#include "treeberg/endpoints.hpp"
#include "treeberg/kernel_bounds.hpp"
#include "treeberg/weights.hpp"

using namespace treeberg;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int num, bool pass, const std::string& what, const std::string& detail,
            double secs) {
    std::printf("criterion %d [%s] %s — %s (%.1fs)\n", num, pass ? "PASS" : "FAIL",
                what.c_str(), detail.c_str(), secs);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct SpecEntry {
    BranchingSpec spec;
    std::string label;
};

std::vector<SpecEntry> grid_specs() {
    return {{BranchingSpec::constant(2), "const2"},
            {BranchingSpec::constant(3), "const3"},
            {BranchingSpec::constant(4), "const4"},
            {BranchingSpec::constant(5), "const5"},
            {BranchingSpec::affine(2, 1, 6), "affine2_1c6"}};
}

const std::vector<double> kAlphas = {1.25, 2.0, 3.0};
constexpr vertex_t kVertexCap = 100000;
constexpr int kMinDepth = 3, kMaxDepth = 6;

struct Built {
    RadialTree tree;
    MeasureVector mu;
    DyadicSystem ds;
    BergmanModel model;
    Built(const BranchingSpec& s, int depth, double alpha)
        : tree(s, depth),
          mu(build_measure(tree, alpha, true)),
          ds(tree, mu),
          model(ds) {}
};

bool within_cap(const BranchingSpec& s, int depth) {
    double n = 1.0, lvl = 1.0;
    for (int l = 0; l < depth; ++l) {
        lvl *= s(l);
        n += lvl;
    }
    return n <= static_cast<double>(kVertexCap);
}

std::string fmt(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.3g", x);
    return b;
}

// --------------------------------------------------------------------------

void criterion1_basis() {
    Timer t;
    double worst = 0.0;
    for (const auto& se : grid_specs())
        for (double a : kAlphas)
            for (int L = kMinDepth; L <= kMaxDepth; ++L) {
                if (!within_cap(se.spec, L)) continue;
                Built b(se.spec, L, a);
                auto dev = b.model.gram_deviation();
                worst = std::max({worst, dev.max_offdiag, dev.max_diag_dev});
            }
    const double secs = t.secs();
    report(1, worst <= 1e-10 && secs <= 120.0, "basis Gram identity on the full grid",
           "max deviation " + fmt(worst), secs);
}

void criterion2_projector() {
    Timer t;
    double id_err = 0.0, proj_err = 0.0, adj_err = 0.0, harm_err = 0.0, dense_err = 0.0;
    std::uint64_t seed = 1000;
    for (const auto& se : grid_specs())
        for (double a : kAlphas)
            for (int L = kMinDepth; L <= kMaxDepth; ++L) {
                if (!within_cap(se.spec, L)) continue;
                Built b(se.spec, L, a);
                const vertex_t n = b.tree.size();

                GridFunction ones(n, 1.0);
                id_err = std::max(
                    id_err, oracles::max_abs_diff(b.model.project(ones), ones));

                for (int trial = 0; trial < 100; ++trial) {
                    GridFunction f = oracles::random_function(n, seed++);
                    GridFunction g = oracles::random_function(n, seed++);
                    GridFunction pf = b.model.project(f);
                    proj_err = std::max(
                        proj_err, oracles::max_abs_diff(b.model.project(pf), pf));
                    adj_err = std::max(adj_err,
                                       std::abs(oracles::inner(b.ds, pf, g) -
                                                oracles::inner(b.ds, f, b.model.project(g))));
                    if (trial == 0) {
                        double fmax = 0.0;
                        for (double x : f) fmax = std::max(fmax, std::abs(x));
                        GridFunction lap = b.model.laplacian(pf);
                        double h = 0.0;
                        for (vertex_t v = 0; v < n; ++v)
                            if (!b.tree.is_leaf(v)) h = std::max(h, std::abs(lap[v]));
                        harm_err = std::max(harm_err, h / fmax);
                    }
                }
                if (n <= 2000) {
                    auto P = oracles::dense_projector(b.model);
                    for (int trial = 0; trial < 5; ++trial) {
                        GridFunction f = oracles::random_function(n, seed++);
                        dense_err = std::max(
                            dense_err, oracles::max_abs_diff(b.model.project(f),
                                                             oracles::dense_apply(P, f)));
                    }
                }
            }
    const bool pass = id_err <= 1e-12 && proj_err <= 1e-10 && adj_err <= 1e-10 &&
                      harm_err <= 1e-10 && dense_err <= 1e-10;
    report(2, pass, "projector identities and dense-oracle agreement",
           "P1 " + fmt(id_err) + ", P^2 " + fmt(proj_err) + ", adjoint " + fmt(adj_err) +
               ", harmonic " + fmt(harm_err) + ", dense " + fmt(dense_err),
           t.secs());
}

void criterion3_anchors() {
    Timer t;
    bool pass = true;
    std::string detail = "all anchors exact";
    {
        Built b(BranchingSpec::constant(2), 6, 2.0);
        for (int k = 1; k <= 6 && pass; ++k)
            for (int m = 0; m + k <= 6; ++m)
                if (b.model.phi(k, k + m) != 2.0 - std::ldexp(1.0, -m)) {
                    pass = false;
                    detail = "phi closed form violated on const2";
                }
    }
    for (const auto& se : grid_specs()) {
        Built b(se.spec, 3, 2.0);
        const int q = b.tree.q_at_level(0);
        const double ck = b.model.child_norm2(1);
        const vertex_t c0 = b.tree.child_begin(0);
        const double diag = b.model.kernel_cube(0, c0, c0) * ck;
        const double off = b.model.kernel_cube(0, c0, c0 + 1) * ck;
        if (std::abs(diag - (1.0 - 1.0 / q)) > 1e-12 || std::abs(off + 1.0 / q) > 1e-12) {
            pass = false;
            detail = "cube-kernel factors wrong on " + se.label;
        }
        for (int j = 0; j <= 2; ++j)
            for (int m = j; m <= 2; ++m)
                for (int k = m; k <= 2; ++k) {
                    const double lhs = b.tree.nu(j, k);
                    const double rhs = b.tree.nu(j, m) * b.tree.nu(m + 1, k);
                    if (std::abs(lhs - rhs) > 1e-12 * std::abs(lhs)) {
                        pass = false;
                        detail = "nu multiplicativity violated on " + se.label;
                    }
                }
        if (b.tree.nu(2, 1) != 1.0) {
            pass = false;
            detail = "empty-range nu convention violated";
        }
    }
    report(3, pass, "closed-form anchors (phi, cube-kernel factors, nu)", detail, t.secs());
}

void criterion4_cz() {
    Timer t;
    double struct_err = 0.0, cmax = 0.0;
    std::uint64_t seed = 40000;
    for (const auto& se : grid_specs())
        for (double a : kAlphas)
            for (int L = kMinDepth; L <= kMaxDepth; ++L) {
                if (!within_cap(se.spec, L)) continue;
                Built b(se.spec, L, a);
                const vertex_t n = b.tree.size();
                for (int trial = 0; trial < 100; ++trial) {
                    GridFunction f = oracles::random_function(n, seed++, 0.01, 1.0);
                    const double lam =
                        (1.5 + 0.05 * (trial % 10)) * b.ds.average(f, b.ds.root_cube());
                    auto dec = cz_decompose(b.ds, f, lam, b.ds.root_cube());
                    if (!dec.parents_escape) struct_err = std::max(struct_err, 1.0);
                    GridFunction acc = dec.good;
                    for (const auto& p : dec.bad) {
                        for (vertex_t v : b.ds.vertices(p.cube)) acc[v] += f[v];
                        for (vertex_t v : b.ds.vertices(b.ds.parent(p.cube))) acc[v] -= p.avg;
                        struct_err = std::max(
                            struct_err,
                            std::abs(b.ds.integral(f, p.cube) -
                                     p.avg * b.ds.mass(b.ds.parent(p.cube))));
                    }
                    struct_err = std::max(struct_err, oracles::max_abs_diff(acc, f));
                    auto cst = cz_constants(b.ds, dec, f);
                    cmax = std::max({cmax, cst.g_l1, cst.b_l1_sum, cst.g_l2, cst.g_bmo});
                }
            }
    report(4, struct_err <= 1e-12 && std::isfinite(cmax) && cmax < 50.0,
           "CZ decomposition exactness and bounded constants",
           "structure " + fmt(struct_err) + ", grid-wide constant " + fmt(cmax), t.secs());
}

void criterion5_sparse() {
    Timer t;
    bool exact_ok = true, stable = true;
    double cmax = 0.0;
    std::uint64_t seed = 50000;
    for (const auto& se : grid_specs()) {
        double per_depth_min = 1e300, per_depth_max = 0.0;
        for (int L = kMinDepth; L <= kMaxDepth; ++L) {
            if (!within_cap(se.spec, L)) continue;
            double depth_c = 0.0;
            for (double a : kAlphas) {
                Built b(se.spec, L, a);
                const vertex_t n = b.tree.size();
                std::vector<char> seen(n, 0);
                for (int trial = 0; trial < 1000; ++trial) {
                    GridFunction f1 = oracles::random_function(n, seed++, 0.01, 1.0);
                    GridFunction f2 = oracles::random_function(n, seed++, 0.01, 1.0);
                    auto fam = sparse_family(b.ds, f1, f2);  // throws if density fails
                    if (trial % 50 == 0) {
                        std::fill(seen.begin(), seen.end(), 0);
                        for (const auto& e : fam.entries) {
                            if (e.exceptional_mass <
                                0.5 * b.ds.mass(e.cube) * (1 - 1e-12))
                                exact_ok = false;
                            for (vertex_t v : e.exceptional) {
                                if (seen[v]) exact_ok = false;
                                seen[v] = 1;
                            }
                        }
                    }
                    auto forms = sparse_forms(b.ds, fam, f1, f2);
                    double lhs = 0.0;
                    GridFunction pf = b.model.project(f1);
                    for (vertex_t v = 0; v < n; ++v) lhs += pf[v] * f2[v] * b.mu.at(v);
                    const double ratio = std::abs(lhs) / (forms.a_form + forms.e_form);
                    depth_c = std::max(depth_c, ratio);
                }
            }
            per_depth_min = std::min(per_depth_min, depth_c);
            per_depth_max = std::max(per_depth_max, depth_c);
            cmax = std::max(cmax, depth_c);
        }
        if (per_depth_max > 2.0 * per_depth_min) stable = false;
    }
    const double secs = t.secs();
    report(5, exact_ok && stable && std::isfinite(cmax) && secs <= 600.0,
           "sparse domination with exact density and depth-stable constant",
           "grid-wide C " + fmt(cmax) + (stable ? ", stable" : ", UNSTABLE"), secs);
}

void criterion6_weights() {
    Timer t;
    using nlohmann::json;
    double dual_err = 0.0, unit_err = 0.0, cmax = 0.0;
    for (const auto& se : grid_specs())
        for (double a : kAlphas) {
            const int L = 4;
            Built b(se.spec, L, a);
            Weight ones(b.tree.size(), 1.0);
            auto r1 = weighted_opnorm_lowerbound(b.model, ones, 2.0,
                                                 OpNormStrategy::PowerIteration);
            unit_err = std::max(unit_err, std::abs(r1.value - 1.0));
            if (!r1.converged) unit_err = std::max(unit_err, 1.0);

            std::vector<Weight> ws = {
                make_weight(b.tree, json{{"kind", "radial_geometric"}, {"beta", 0.5}}),
                make_weight(b.tree, json{{"kind", "radial_geometric"}, {"beta", 2.0}}),
                make_weight(b.tree, json{{"kind", "sector_bump"},
                                         {"level", 1},
                                         {"child", 0},
                                         {"factor", 4.0}}),
                make_weight(b.tree, json{{"kind", "random"}, {"seed", 11}, {"log_range", 1.5}}),
            };
            for (const Weight& w : ws) {
                for (double p : {1.5, 2.0, 3.0}) {
                    const double pp = p / (p - 1.0);
                    Weight dual(w.size());
                    for (std::size_t i = 0; i < w.size(); ++i)
                        dual[i] = std::pow(w[i], -pp / p);
                    const double lhs = bp_characteristic(b.ds, dual, pp);
                    const double rhs = std::pow(bp_characteristic(b.ds, w, p), pp / p);
                    dual_err = std::max(dual_err,
                                        std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
                }
                auto chk = theoremB_check(b.model, w, 2.0);
                cmax = std::max(cmax, chk.ratio);
            }
        }
    report(6, dual_err <= 1e-10 && unit_err <= 1e-8 && std::isfinite(cmax) && cmax < 10.0,
           "weight duality, unit-weight norm, and the norm bound",
           "duality " + fmt(dual_err) + ", unit " + fmt(unit_err) + ", grid-wide C " +
               fmt(cmax),
           t.secs());
}

void criterion7_kernels() {
    Timer t;
    bool pass = true;
    double hmax = 0.0;
    for (const auto& se : grid_specs())
        for (double a : kAlphas) {
            double prev_h = -1.0, prev_s = -1.0, prev_ctrl = -1.0;
            for (int L = kMinDepth; L <= kMaxDepth; ++L) {
                if (!within_cap(se.spec, L)) continue;
                Built b(se.spec, L, a);
                auto K = projector_kernel(b.model);
                const double h = hormander_constant(K, b.ds, SupMode::RadialCandidates);
                const double s = size_constant(K, b.ds, SupMode::RadialCandidates);
                auto C = singular_control_kernel(b.ds);
                const double ctrl = size_constant(C, b.ds, SupMode::RadialCandidates);
                if (prev_h >= 0.0 && (h > 2.0 * prev_h + 1e-12 || s > 2.0 * prev_s + 1e-12))
                    pass = false;
                if (prev_ctrl >= 0.0 && ctrl <= prev_ctrl) pass = false;  // non-vacuity
                prev_h = h;
                prev_s = s;
                prev_ctrl = ctrl;
                hmax = std::max({hmax, h, s});
            }
        }
    report(7, pass && std::isfinite(hmax),
           "kernel integral conditions bounded in depth, control diverging",
           "max constant " + fmt(hmax), t.secs());
}

void criterion8_endpoints() {
    Timer t;
    bool pass = true;
    std::string detail;
    const char* names[5] = {"weak11", "h1_to_l1", "linf_to_bmo", "h1_to_h1", "bmo_to_bmo"};
    for (int which = 0; which < 5; ++which) {
        Timer ts;
        double emax = 0.0;
        std::uint64_t seed = 80000 + 977 * which;
        for (const auto& se : grid_specs())
            for (double a : kAlphas)
                for (int L = kMinDepth; L <= kMaxDepth; ++L) {
                    if (!within_cap(se.spec, L)) continue;
                    Built b(se.spec, L, a);
                    auto T = projector_operator(b.model);
                    EndpointReport rep;
                    switch (which) {
                        case 0: rep = weak11_ratio(b.ds, T, seed++, 16); break;
                        case 1:
                            rep = endpoint_ratios(b.ds, T, EndpointKind::H1ToL1, seed++, 16);
                            break;
                        case 2:
                            rep = endpoint_ratios(b.ds, T, EndpointKind::LinfToBmo, seed++, 16);
                            break;
                        case 3:
                            rep = strong_endpoint_ratios(b.model, StrongEndpointKind::H1ToH1,
                                                         seed++, 16);
                            break;
                        default:
                            rep = strong_endpoint_ratios(b.model, StrongEndpointKind::BmoToBmo,
                                                         seed++, 16);
                    }
                    for (const auto& c : rep.ratios)
                        if (!std::isfinite(c.ratio) || c.ratio < 0.0) pass = false;
                    emax = std::max(emax, rep.max_ratio());
                }
        if (!(emax < 100.0) || ts.secs() > 300.0) pass = false;
        detail += std::string(names[which]) + " " + fmt(emax) + " ";
    }
    report(8, pass, "endpoint estimator maxima bounded on the full grid", detail, t.secs());
}

void criterion9_determinism(const char* cli_path) {
    Timer t;
    if (!cli_path || !fs::exists(cli_path)) {
        report(9, false, "CSV determinism", "runner binary path missing", t.secs());
        return;
    }
    const fs::path work = fs::temp_directory_path() / "treeberg_accept9";
    fs::remove_all(work);
    fs::create_directories(work);
    {
        std::ofstream cfg(work / "cfg.json");
        cfg << R"({"trees":[{"kind":"constant","q":3,"depth":4}],"alphas":[2.0],)"
            << R"("suites":["sparse","cz","endpoints"],"seed":7,)"
            << R"("trials":{"cz":25,"sparse":100,"endpoints":8}})" << "\n";
    }
    auto run_once = [&](const std::string& out) {
        const std::string cmd = std::string("\"") + cli_path + "\" run --config \"" +
                                (work / "cfg.json").string() + "\" --out \"" +
                                (work / out).string() + "\" > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool pass = run_once("a") && run_once("b");
    if (pass)
        for (const char* s : {"sparse", "cz", "endpoints"}) {
            std::ifstream fa(work / "a" / (std::string(s) + ".csv"), std::ios::binary);
            std::ifstream fb(work / "b" / (std::string(s) + ".csv"), std::ios::binary);
            std::stringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            if (sa.str().empty() || sa.str() != sb.str()) pass = false;
        }
    report(9, pass, "suite CSVs byte-identical across reruns", "3 suites compared", t.secs());
}

}  // namespace

int main(int argc, char** argv) {
    criterion1_basis();
    criterion2_projector();
    criterion3_anchors();
    criterion4_cz();
    criterion5_sparse();
    criterion6_weights();
    criterion7_kernels();
    criterion8_endpoints();
    criterion9_determinism(argc > 1 ? argv[1] : nullptr);
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
