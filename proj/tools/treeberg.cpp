// Experiment runner: builds the configured trees, runs the requested suites,
// and writes one CSV per suite plus a JSON summary. All randomness is seeded
// per grid point, all iteration orders are fixed, and doubles are printed
// with a fixed format, so identical configs yield byte-identical CSVs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeberg/cz_sparse.hpp"
#include "treeberg/endpoints.hpp"
#include "treeberg/kernel_bounds.hpp"
#include "treeberg/weights.hpp"

using namespace treeberg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

struct GridPoint {
    BranchingSpec spec;
    std::string label;
    int depth;
    double alpha;
};

struct Config {
    std::vector<GridPoint> points;
    bool normalized = true;
    std::vector<std::string> suites;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int cz_trials = 100;
    int sparse_trials = 100;
    int endpoint_trials = 32;
    std::vector<double> p_values{2.0};
    std::vector<json> weight_specs;
    vertex_t vertex_cap = 100000;
};

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
    throw std::runtime_error("config error at '" + field + "': " + msg);
}

Config parse_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
    }

    Config cfg;
    if (!j.contains("trees") || !j["trees"].is_array() || j["trees"].empty())
        config_error("trees", "a non-empty array of tree specs is required");
    if (!j.contains("alphas") || !j["alphas"].is_array() || j["alphas"].empty())
        config_error("alphas", "a non-empty array of exponents is required");

    std::vector<std::pair<BranchingSpec, int>> trees;
    for (std::size_t i = 0; i < j["trees"].size(); ++i) {
        const json& t = j["trees"][i];
        const std::string field = "trees[" + std::to_string(i) + "]";
        BranchingSpec spec = BranchingSpec::constant(2);
        try {
            spec = BranchingSpec::from_json(t);
        } catch (const std::exception& e) {
            config_error(field, e.what());
        }
        if (!t.contains("depth")) config_error(field + ".depth", "missing");
        const int depth = t["depth"].get<int>();
        if (depth < 1) config_error(field + ".depth", "must be >= 1");
        trees.emplace_back(spec, depth);
    }
    std::vector<double> alphas;
    for (std::size_t i = 0; i < j["alphas"].size(); ++i) {
        const double a = j["alphas"][i].get<double>();
        if (!(a > 1.0))
            config_error("alphas[" + std::to_string(i) + "]",
                         "must be > 1 (got " + fmt(a) + ")");
        alphas.push_back(a);
    }
    for (const auto& [spec, depth] : trees)
        for (double a : alphas) cfg.points.push_back({spec, spec.label(), depth, a});

    cfg.normalized = j.value("normalized", true);
    if (!j.contains("suites") || !j["suites"].is_array() || j["suites"].empty())
        config_error("suites", "a non-empty array is required");
    for (const auto& s : j["suites"]) {
        const std::string name = s.get<std::string>();
        if (name != "basis" && name != "kernels" && name != "cz" && name != "sparse" &&
            name != "weights" && name != "endpoints")
            config_error("suites", "unknown suite '" + name + "'");
        cfg.suites.push_back(name);
    }
    if (j.contains("seed")) {
        cfg.seed = j["seed"].get<std::uint64_t>();
        cfg.has_seed = true;
    }
    for (const auto& s : cfg.suites)
        if ((s == "cz" || s == "sparse" || s == "endpoints") && !cfg.has_seed)
            config_error("seed", "required when randomized suite '" + s + "' is requested");
    if (j.contains("trials")) {
        cfg.cz_trials = j["trials"].value("cz", cfg.cz_trials);
        cfg.sparse_trials = j["trials"].value("sparse", cfg.sparse_trials);
        cfg.endpoint_trials = j["trials"].value("endpoints", cfg.endpoint_trials);
    }
    if (j.contains("p_values")) {
        cfg.p_values.clear();
        for (std::size_t i = 0; i < j["p_values"].size(); ++i) {
            const double p = j["p_values"][i].get<double>();
            if (!(p > 1.0)) config_error("p_values[" + std::to_string(i) + "]", "must be > 1");
            cfg.p_values.push_back(p);
        }
    }
    if (j.contains("weights"))
        for (const auto& w : j["weights"]) cfg.weight_specs.push_back(w);
    if (cfg.weight_specs.empty())
        cfg.weight_specs = {json{{"kind", "radial_geometric"}, {"beta", 2.0}}};
    cfg.vertex_cap = j.value("vertex_cap", cfg.vertex_cap);
    return cfg;
}

struct Built {
    RadialTree tree;
    MeasureVector mu;
    DyadicSystem ds;
    BergmanModel model;
    Built(const GridPoint& gp, bool normalized)
        : tree(gp.spec, gp.depth),
          mu(build_measure(tree, gp.alpha, normalized)),
          ds(tree, mu),
          model(ds) {}
};

struct SuiteResult {
    std::string csv;     // row block for this grid point (no header)
    bool pass = true;
    double max_ratio = 0.0;
};

std::string point_prefix(const GridPoint& gp) {
    return gp.label + "," + fmt(gp.alpha) + "," + std::to_string(gp.depth);
}

GridFunction seeded_nonneg(vertex_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.01, 1.0);
    GridFunction f(n);
    for (auto& x : f) x = dist(rng);
    return f;
}

// ---------------------------------------------------------------- suites ---

SuiteResult run_basis(const GridPoint& gp, const Built& b, const Config&) {
    SuiteResult r;
    const auto dev = b.model.gram_deviation();
    r.csv = point_prefix(gp) + "," + std::to_string(b.model.basis_size()) + "," +
            fmt(dev.max_offdiag) + "," + fmt(dev.max_diag_dev) + "\n";
    r.max_ratio = std::max(dev.max_offdiag, dev.max_diag_dev);
    r.pass = r.max_ratio <= 1e-10;
    return r;
}

SuiteResult run_kernels(const GridPoint& gp, const Built& b, const Config&) {
    SuiteResult r;
    std::ostringstream out;
    const std::string pre = point_prefix(gp);
    auto K = projector_kernel(b.model);
    const double h = hormander_constant(K, b.ds, SupMode::RadialCandidates);
    const double s = size_constant(K, b.ds, SupMode::RadialCandidates);
    out << pre << ",hormander,-1,0," << fmt(h) << ",1," << fmt(h) << "\n";
    out << pre << ",size,-1,0," << fmt(s) << ",1," << fmt(s) << "\n";
    r.max_ratio = std::max(h, s);
    // Leaf-level sectors are single points and carry no difference bounds.
    for (int l = 2; l <= gp.depth - 1; ++l) {
        const cube_t q = b.tree.level_begin(l);
        std::vector<BoundReport> reps;
        for (int ell = 1; ell <= std::min(l, 3); ++ell)
            reps.push_back(verify_krestf1(b.model, q, ell));
        reps.push_back(verify_krestf2(b.model, q));
        reps.push_back(verify_krest(b.model, q, {}, b.ds.root_cube()));
        for (const auto& rep : reps)
            for (const auto& c : rep.cases) {
                out << pre << "," << c.name << "," << c.cube_level << "," << c.ell << ","
                    << fmt(c.lhs) << "," << fmt(c.rhs_shape) << "," << fmt(c.ratio) << "\n";
                r.max_ratio = std::max(r.max_ratio, c.ratio);
            }
    }
    r.csv = out.str();
    return r;
}

SuiteResult run_cz(const GridPoint& gp, const Built& b, const Config& cfg,
                   std::uint64_t point_seed) {
    SuiteResult r;
    std::ostringstream out;
    const vertex_t n = b.tree.size();
    for (int trial = 0; trial < cfg.cz_trials; ++trial) {
        GridFunction f = seeded_nonneg(n, point_seed + trial);
        const double lam = 2.0 * b.ds.average(f, b.ds.root_cube());
        auto dec = cz_decompose(b.ds, f, lam, b.ds.root_cube());
        auto cst = cz_constants(b.ds, dec, f);

        // Reconstruction f = g + sum b_j and per-part mean-zero, directly.
        GridFunction acc = dec.good;
        double mean_err = 0.0;
        for (const auto& p : dec.bad) {
            for (vertex_t v : b.ds.vertices(p.cube)) acc[v] += f[v];
            for (vertex_t v : b.ds.vertices(b.ds.parent(p.cube))) acc[v] -= p.avg;
            mean_err = std::max(
                mean_err, std::abs(b.ds.integral(f, p.cube) -
                                   p.avg * b.ds.mass(b.ds.parent(p.cube))));
        }
        double recon = 0.0;
        for (vertex_t v = 0; v < n; ++v) recon = std::max(recon, std::abs(acc[v] - f[v]));
        recon = std::max(recon, mean_err);

        out << point_prefix(gp) << "," << trial << "," << dec.bad.size() << ","
            << fmt(cst.g_l1) << "," << fmt(cst.b_l1_sum) << "," << fmt(cst.g_l2) << ","
            << fmt(cst.g_bmo) << "," << fmt(recon) << "," << (dec.parents_escape ? 1 : 0)
            << "\n";
        r.max_ratio = std::max({r.max_ratio, cst.g_l1, cst.b_l1_sum, cst.g_l2, cst.g_bmo});
        if (recon > 1e-12 || !dec.parents_escape) r.pass = false;
    }
    r.csv = out.str();
    return r;
}

SuiteResult run_sparse(const GridPoint& gp, const Built& b, const Config& cfg,
                       std::uint64_t point_seed) {
    SuiteResult r;
    std::ostringstream out;
    const vertex_t n = b.tree.size();
    std::vector<char> seen(n, 0);
    for (int trial = 0; trial < cfg.sparse_trials; ++trial) {
        GridFunction f1 = seeded_nonneg(n, point_seed + 2 * trial);
        GridFunction f2 = seeded_nonneg(n, point_seed + 2 * trial + 1);
        try {
            auto rep = domination_report(b.model, f1, f2);
            // Exact disjointness of the exceptional sets.
            auto fam = sparse_family(b.ds, f1, f2);
            std::fill(seen.begin(), seen.end(), 0);
            for (const auto& e : fam.entries)
                for (vertex_t v : e.exceptional) {
                    if (seen[v]) r.pass = false;
                    seen[v] = 1;
                }
            out << point_prefix(gp) << "," << trial << "," << fmt(rep.lhs) << ","
                << fmt(rep.a_form) << "," << fmt(rep.e_form) << "," << fmt(rep.ratio)
                << "\n";
            r.max_ratio = std::max(r.max_ratio, rep.ratio);
        } catch (const std::logic_error&) {
            // Half-density violation inside the library is a hard failure.
            r.pass = false;
        }
    }
    r.csv = out.str();
    return r;
}

SuiteResult run_weights(const GridPoint& gp, const Built& b, const Config& cfg) {
    SuiteResult r;
    std::ostringstream out;
    for (std::size_t wi = 0; wi < cfg.weight_specs.size(); ++wi) {
        Weight w = make_weight(b.tree, cfg.weight_specs[wi]);
        const std::string wname = cfg.weight_specs[wi].value("kind", "?") + "#" +
                                  std::to_string(wi);
        for (double p : cfg.p_values) {
            auto chk = theoremB_check(b.model, w, p);
            const double pp = p / (p - 1.0);
            Weight dual(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) dual[i] = std::pow(w[i], -pp / p);
            const double dual_lhs = bp_characteristic(b.ds, dual, pp);
            const double dual_rhs = std::pow(chk.bp, pp / p);
            const double duality_err =
                std::abs(dual_lhs - dual_rhs) / std::max(1.0, std::abs(dual_rhs));
            out << point_prefix(gp) << "," << wname << "," << fmt(p) << "," << fmt(chk.bp)
                << "," << fmt(chk.tilde_bp) << "," << fmt(chk.norm_lb) << ","
                << fmt(chk.bound) << "," << fmt(chk.ratio) << "," << fmt(duality_err)
                << "\n";
            r.max_ratio = std::max(r.max_ratio, chk.ratio);
            if (duality_err > 1e-10) r.pass = false;
        }
    }
    r.csv = out.str();
    return r;
}

SuiteResult run_endpoints(const GridPoint& gp, const Built& b, const Config& cfg,
                          std::uint64_t point_seed) {
    SuiteResult r;
    std::ostringstream out;
    auto T = projector_operator(b.model);
    std::vector<EndpointReport> reps;
    reps.push_back(weak11_ratio(b.ds, T, point_seed, cfg.endpoint_trials));
    reps.push_back(
        endpoint_ratios(b.ds, T, EndpointKind::LinfToBmo, point_seed, cfg.endpoint_trials));
    reps.push_back(
        endpoint_ratios(b.ds, T, EndpointKind::H1ToL1, point_seed, cfg.endpoint_trials));
    reps.push_back(strong_endpoint_ratios(b.model, StrongEndpointKind::H1ToH1, point_seed,
                                          cfg.endpoint_trials));
    reps.push_back(strong_endpoint_ratios(b.model, StrongEndpointKind::BmoToBmo, point_seed,
                                          cfg.endpoint_trials));
    for (const auto& rep : reps) {
        for (const auto& c : rep.ratios)
            out << point_prefix(gp) << "," << rep.estimator << "," << c.candidate_id << ","
                << fmt(c.ratio) << "\n";
        out << point_prefix(gp) << "," << rep.estimator << ",MAX," << fmt(rep.max_ratio())
            << "\n";
        r.max_ratio = std::max(r.max_ratio, rep.max_ratio());
    }
    r.csv = out.str();
    return r;
}

const std::map<std::string, std::string> kCsvHeaders = {
    {"basis", "spec,alpha,depth,basis_size,gram_max_offdiag,gram_max_diag_dev"},
    {"kernels", "spec,alpha,depth,case,cube_level,ell,lhs,rhs_shape,ratio"},
    {"cz", "spec,alpha,depth,trial,num_cubes,g_l1,b_l1_sum,g_l2,g_bmo,recon_err,parents_escape"},
    {"sparse", "spec,alpha,depth,trial,lhs,a_form,e_form,ratio"},
    {"weights", "spec,alpha,depth,weight,p,bp,tilde_bp,norm_lb,bound,ratio,duality_err"},
    {"endpoints", "spec,alpha,depth,estimator,candidate_id,ratio"},
};

int do_run(const fs::path& config_path, const fs::path& out_dir, int parallel) {
    Config cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    fs::create_directories(out_dir);

    // Build each grid point once and validate the size cap.
    std::vector<std::unique_ptr<Built>> built;
    for (const auto& gp : cfg.points) {
        auto b = std::make_unique<Built>(gp, cfg.normalized);
        if (b->tree.size() > cfg.vertex_cap) {
            std::cerr << "config error at 'vertex_cap': tree " << gp.label << " depth "
                      << gp.depth << " has " << b->tree.size() << " vertices (cap "
                      << cfg.vertex_cap << ")\n";
            return 2;
        }
        built.push_back(std::move(b));
    }

    bool all_pass = true;
    json summary = json::array();
    for (const auto& suite : cfg.suites) {
        const auto t0 = std::chrono::steady_clock::now();
        const int np = static_cast<int>(cfg.points.size());
        std::vector<SuiteResult> results(np);
        std::vector<std::string> errors(np);
#ifdef _OPENMP
#pragma omp parallel for num_threads(parallel > 1 ? parallel : 1) schedule(dynamic)
#endif
        for (int i = 0; i < np; ++i) {
            const GridPoint& gp = cfg.points[i];
            const Built& b = *built[i];
            // Per-point seed block: stable regardless of execution order.
            const std::uint64_t ps = cfg.seed * 1000003ull + 10007ull * i;
            try {
                if (suite == "basis")
                    results[i] = run_basis(gp, b, cfg);
                else if (suite == "kernels")
                    results[i] = run_kernels(gp, b, cfg);
                else if (suite == "cz")
                    results[i] = run_cz(gp, b, cfg, ps);
                else if (suite == "sparse")
                    results[i] = run_sparse(gp, b, cfg, ps);
                else if (suite == "weights")
                    results[i] = run_weights(gp, b, cfg);
                else
                    results[i] = run_endpoints(gp, b, cfg, ps);
            } catch (const std::exception& e) {
                results[i].pass = false;
                errors[i] = e.what();
            }
        }
        for (int i = 0; i < np; ++i)
            if (!errors[i].empty())
                std::cerr << suite << " failed at " << point_prefix(cfg.points[i]) << ": "
                          << errors[i] << "\n";
        std::ofstream csv(out_dir / (suite + ".csv"), std::ios::binary);
        csv << kCsvHeaders.at(suite) << "\n";
        bool pass = true;
        double max_ratio = 0.0;
        for (const auto& res : results) {  // deterministic merge in point order
            csv << res.csv;
            pass = pass && res.pass;
            max_ratio = std::max(max_ratio, res.max_ratio);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summary.push_back({{"suite", suite},
                           {"pass", pass},
                           {"max_ratio", max_ratio},
                           {"tolerances",
                            {{"gram", 1e-10}, {"reconstruction", 1e-12}, {"duality", 1e-10}}},
                           {"runtime_sec", secs}});
        all_pass = all_pass && pass;
        std::cout << suite << ": " << (pass ? "pass" : "FAIL")
                  << " max_ratio=" << fmt(max_ratio) << " (" << fmt(secs) << "s)\n";
    }
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
    return all_pass ? 0 : 1;
}

// ------------------------------------------------------------- plotdata ---

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

int do_plotdata(const fs::path& in_dir, const fs::path& out_file) {
    // One long-format table: the value column is the suite's headline ratio,
    // aggregated by max over repeated keys (trials, candidates, cube cases).
    struct Pick {
        std::string suite;
        std::size_t label_col;  // size_t(-1): use the fixed label below
        std::string fixed_label;
        std::size_t value_col;
    };
    const std::vector<Pick> picks = {
        {"basis", static_cast<std::size_t>(-1), "gram_max_offdiag", 4},
        {"kernels", 3, "", 8},
        {"cz", static_cast<std::size_t>(-1), "g_bmo", 8},
        {"sparse", static_cast<std::size_t>(-1), "ratio", 7},
        {"weights", 3, "", 9},
        {"endpoints", 3, "", 5},
    };
    bool any = false;
    std::map<std::string, double> agg;  // key "suite,spec,alpha,depth,label" -> max value
    for (const auto& pk : picks) {
        const fs::path p = in_dir / (pk.suite + ".csv");
        if (!fs::exists(p)) continue;
        any = true;
        auto rows = read_csv(p);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.size() <= pk.value_col) continue;
            // Endpoint rows: only the per-estimator MAX summary rows.
            if (pk.suite == "endpoints" && r[4] != "MAX") continue;
            const std::string label =
                pk.label_col == static_cast<std::size_t>(-1) ? pk.fixed_label : r[pk.label_col];
            const std::string key =
                pk.suite + "," + r[0] + "," + r[1] + "," + r[2] + "," + label;
            const double v = std::strtod(r[pk.value_col].c_str(), nullptr);
            auto it = agg.find(key);
            if (it == agg.end())
                agg[key] = v;
            else
                it->second = std::max(it->second, v);
        }
    }
    if (!any) {
        std::cerr << "plotdata: no suite CSV files found in " << in_dir << "\n";
        return 2;
    }
    std::ofstream out(out_file, std::ios::binary);
    out << "suite,spec,alpha,depth,label,value\n";
    for (const auto& [key, v] : agg) out << key << "," << fmt(v) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial-tree projector experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "reports", in_dir, out_file;
    int parallel = 1;

    auto* run = app.add_subcommand("run", "execute the configured suites");
    run->add_option("--config", config_path, "config JSON path")->required();
    run->add_option("--parallel", parallel, "worker threads across grid points");
    run->add_option("--out", out_dir, "output directory");

    auto* plot = app.add_subcommand("plotdata", "reshape reports into one long-format CSV");
    plot->add_option("--in", in_dir, "directory holding suite CSVs")->required();
    plot->add_option("--out", out_file, "output CSV file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return do_run(config_path, out_dir, parallel);
        return do_plotdata(in_dir, out_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
