#include "treeberg/bergman.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace treeberg {

std::vector<double> helmert_vector(int q, int ell) {
    if (ell < 1 || ell >= q) throw std::out_of_range("helmert index out of range");
    std::vector<double> e(q, 0.0);
    const double s = 1.0 / std::sqrt(static_cast<double>(ell) * (ell + 1));
    for (int j = 0; j < ell; ++j) e[j] = s;
    e[ell] = -ell * s;
    return e;
}

BergmanModel::BergmanModel(const DyadicSystem& ds) : ds_(&ds) {
    const RadialTree& t = ds.tree();
    const int L = t.depth();
    phi_.resize(L + 1);
    for (int k = 0; k <= L; ++k) {
        auto& p = phi_[k];
        p.resize(L - k + 1);
        p[0] = 1.0;
        double nu = 1.0;  // nu_k^{m-1}
        for (int m = k + 1; m <= L; ++m) {
            nu /= t.q_at_level(m - 1);
            p[m - k] = p[m - k - 1] + nu;
        }
    }
    c_.assign(L + 1, 0.0);
    for (int k = 1; k <= L; ++k) {
        double count = 1.0, sum = 0.0;
        for (int m = k; m <= L; ++m) {
            const double p = phi_[k][m - k];
            sum += count * p * p * ds.mu().level_value(m);
            if (m < L) count *= t.q_at_level(m);
        }
        c_[k] = sum;
    }
}

double BergmanModel::phi(int k, int m) const {
    if (k < 0 || m > tree().depth()) throw std::out_of_range("phi arguments out of range");
    if (m < k) return 0.0;
    return phi_[k][m - k];
}

GridFunction BergmanModel::apply_diff(cube_t q, const GridFunction& f) const {
    const RadialTree& t = tree();
    GridFunction out(t.size(), 0.0);
    if (!ds_->valid(q)) throw std::invalid_argument("invalid cube id");
    if (ds_->is_singleton(q) || ds_->is_point_set(q)) return out;
    const vertex_t a = q;
    const int k = t.level(a) + 1;
    const int nq = t.q_at_level(k - 1);
    std::vector<double> u(nq);
    double ubar = 0.0;
    for (int j = 0; j < nq; ++j) {
        const vertex_t c = t.child_begin(a) + j;
        double s = 0.0;
        for (const auto& r : t.sector_ranges(c)) {
            double lvl = 0.0;
            for (vertex_t z = r.begin; z < r.end; ++z) lvl += f[z];
            s += lvl * phi_[k][r.level - k] * ds_->mu().level_value(r.level);
        }
        u[j] = s;
        ubar += s;
    }
    ubar /= nq;
    for (int j = 0; j < nq; ++j) {
        const double coef = (u[j] - ubar) / c_[k];
        const vertex_t c = t.child_begin(a) + j;
        for (const auto& r : t.sector_ranges(c))
            for (vertex_t z = r.begin; z < r.end; ++z) out[z] += phi_[k][r.level - k] * coef;
    }
    return out;
}

void BergmanModel::accumulate_diffs_masked(const GridFunction& f, vertex_t root,
                                           const std::vector<char>* skip,
                                           GridFunction& out) const {
    const RadialTree& t = tree();
    const int L = t.depth();
    const int r0 = t.level(root);
    const auto ranges = t.sector_ranges(root);
    std::vector<double> s(t.size());
    for (int k = r0 + 1; k <= L; ++k) {
        // s[v] = sum over the sector of v of f * phi_k * mu, for |v| >= k.
        for (int lev = L; lev >= k; --lev) {
            const auto& r = ranges[lev - r0];
            const double w = phi_[k][lev - k] * ds_->mu().level_value(lev);
            for (vertex_t v = r.begin; v < r.end; ++v) {
                double acc = f[v] * w;
                if (lev < L)
                    for (vertex_t c = t.child_begin(v); c < t.child_end(v); ++c) acc += s[c];
                s[v] = acc;
            }
        }
        const auto& pr = ranges[k - 1 - r0];
        for (vertex_t a = pr.begin; a < pr.end; ++a) {
            if (skip && (*skip)[a]) continue;
            const int nq = t.q_at_level(k - 1);
            double ubar = 0.0;
            for (vertex_t c = t.child_begin(a); c < t.child_end(a); ++c) ubar += s[c];
            ubar /= nq;
            for (vertex_t c = t.child_begin(a); c < t.child_end(a); ++c) {
                const double coef = (s[c] - ubar) / c_[k];
                for (const auto& cr : t.sector_ranges(c))
                    for (vertex_t z = cr.begin; z < cr.end; ++z)
                        out[z] += phi_[k][cr.level - k] * coef;
            }
        }
    }
}

void BergmanModel::accumulate_diffs(const GridFunction& f, vertex_t root, int threads,
                                    GridFunction& out) const {
    if (threads <= 1) {
        accumulate_diffs_masked(f, root, nullptr, out);
        return;
    }
    const RadialTree& t = tree();
    const int L = t.depth();
    const int r0 = t.level(root);
    const auto ranges = t.sector_ranges(root);
    std::vector<double> s(t.size());
    for (int k = r0 + 1; k <= L; ++k) {
        for (int lev = L; lev >= k; --lev) {
            const auto& r = ranges[lev - r0];
            const double w = phi_[k][lev - k] * ds_->mu().level_value(lev);
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
            for (vertex_t v = r.begin; v < r.end; ++v) {
                double acc = f[v] * w;
                if (lev < L)
                    for (vertex_t c = t.child_begin(v); c < t.child_end(v); ++c) acc += s[c];
                s[v] = acc;
            }
        }
        const auto& pr = ranges[k - 1 - r0];
        // Parents at level k-1 own disjoint sectors, so the writes below never
        // collide and the result is identical to the serial sweep.
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
        for (vertex_t a = pr.begin; a < pr.end; ++a) {
            const int nq = t.q_at_level(k - 1);
            double ubar = 0.0;
            for (vertex_t c = t.child_begin(a); c < t.child_end(a); ++c) ubar += s[c];
            ubar /= nq;
            for (vertex_t c = t.child_begin(a); c < t.child_end(a); ++c) {
                const double coef = (s[c] - ubar) / c_[k];
                for (const auto& cr : t.sector_ranges(c))
                    for (vertex_t z = cr.begin; z < cr.end; ++z)
                        out[z] += phi_[k][cr.level - k] * coef;
            }
        }
    }
}

GridFunction BergmanModel::project(const GridFunction& f, int threads) const {
    const vertex_t n = tree().size();
    double total = 0.0;
    for (vertex_t v = 0; v < n; ++v) total += f[v] * ds_->mu().at(v);
    GridFunction out(n, total / ds_->mu().total_mass());
    accumulate_diffs(f, 0, threads, out);
    return out;
}

GridFunction BergmanModel::project_reference(const GridFunction& f) const {
    const RadialTree& t = tree();
    const vertex_t n = t.size();
    double total = 0.0;
    for (vertex_t v = 0; v < n; ++v) total += f[v] * ds_->mu().at(v);
    GridFunction out(n, total / ds_->mu().total_mass());
    for (vertex_t v = 0; v < n; ++v) {
        if (t.is_leaf(v)) continue;
        GridFunction d = apply_diff(v, f);
        for (const auto& r : t.sector_ranges(v))
            for (vertex_t z = r.begin; z < r.end; ++z) out[z] += d[z];
    }
    return out;
}

GridFunction BergmanModel::project_localized(const GridFunction& f, cube_t r) const {
    GridFunction out(tree().size(), 0.0);
    if (!ds_->valid(r)) throw std::invalid_argument("invalid cube id");
    if (ds_->is_singleton(r) || ds_->is_point_set(r)) return out;
    // The sweep covers every cube rooted inside the sector, r itself included.
    accumulate_diffs_masked(f, ds_->base_vertex(r), nullptr, out);
    return out;
}

GridFunction BergmanModel::project_outside(const GridFunction& f, const std::vector<cube_t>& F,
                                           cube_t q0) const {
    const RadialTree& t = tree();
    const vertex_t n = t.size();
    if (!ds_->valid(q0)) throw std::invalid_argument("invalid cube id");
    std::vector<char> covered(n, 0);  // point-disjointness of F
    std::vector<char> skip(n, 0);     // vertex v: the cube rooted at v is inside F
    for (cube_t r : F) {
        if (!ds_->valid(r) || !ds_->subset(r, q0))
            throw std::invalid_argument("family member not a cube inside the host cube");
        for (const auto& rr : ds_->ranges(r))
            for (vertex_t z = rr.begin; z < rr.end; ++z) {
                if (covered[z]) throw std::invalid_argument("overlapping cube family");
                covered[z] = 1;
            }
        if (ds_->is_sector(r)) {
            for (const auto& rr : t.sector_ranges(r))
                for (vertex_t z = rr.begin; z < rr.end; ++z) skip[z] = 1;
        } else if (t.is_leaf(ds_->base_vertex(r))) {
            skip[ds_->base_vertex(r)] = 1;
        }
    }
    GridFunction out(n, 0.0);
    if (q0 == ds_->root_cube()) {
        double total = 0.0;
        for (vertex_t v = 0; v < n; ++v) total += f[v] * ds_->mu().at(v);
        const double avg = total / ds_->mu().total_mass();
        for (vertex_t v = 0; v < n; ++v) out[v] = avg;
    }
    if (!ds_->is_singleton(q0) && !ds_->is_point_set(q0))
        accumulate_diffs_masked(f, ds_->base_vertex(q0), &skip, out);
    return out;
}

double BergmanModel::cube_kernel_term(vertex_t a, vertex_t x, vertex_t y) const {
    const RadialTree& t = tree();
    const int k = t.level(a) + 1;
    const int q = t.q_at_level(k - 1);
    const bool same = t.child_branch(a, x) == t.child_branch(a, y);
    const double kq = (same ? 1.0 : 0.0) - 1.0 / q;
    return phi_[k][t.level(x) - k] * phi_[k][t.level(y) - k] * kq / c_[k];
}

double BergmanModel::kernel_cube(cube_t q, vertex_t x, vertex_t y) const {
    const RadialTree& t = tree();
    if (!ds_->valid(q)) throw std::invalid_argument("invalid cube id");
    if (ds_->is_singleton(q) || ds_->is_point_set(q)) return 0.0;
    const vertex_t a = q;
    const int la = t.level(a);
    if (t.level(x) <= la || t.level(y) <= la) return 0.0;
    if (t.ancestor(x, t.level(x) - la) != a || t.ancestor(y, t.level(y) - la) != a) return 0.0;
    return cube_kernel_term(a, x, y);
}

double BergmanModel::kernel_full(vertex_t x, vertex_t y) const {
    const RadialTree& t = tree();
    double sum = 1.0 / ds_->mu().total_mass();
    const vertex_t m = t.confluent(x, y);
    // Only sector cubes rooted strictly above both x and y contribute; those
    // are the ancestors of the confluent (including it, when proper).
    vertex_t a = m;
    while (true) {
        if (t.level(a) < t.level(x) && t.level(a) < t.level(y)) sum += cube_kernel_term(a, x, y);
        if (a == 0) break;
        a = t.parent(a);
    }
    return sum;
}

double BergmanModel::kernel_truncated(const std::vector<cube_t>& F, cube_t q0, vertex_t x,
                                      vertex_t y) const {
    const RadialTree& t = tree();
    double sum = (q0 == ds_->root_cube()) ? 1.0 / ds_->mu().total_mass() : 0.0;
    vertex_t a = t.confluent(x, y);
    while (true) {
        if (t.level(a) < t.level(x) && t.level(a) < t.level(y) && ds_->subset(a, q0)) {
            bool inside = false;
            for (cube_t r : F)
                if (ds_->subset(a, r)) {
                    inside = true;
                    break;
                }
            if (!inside) sum += cube_kernel_term(a, x, y);
        }
        if (a == 0) break;
        a = t.parent(a);
    }
    return sum;
}

GridFunction BergmanModel::laplacian(const GridFunction& f) const {
    const RadialTree& t = tree();
    GridFunction out(t.size(), 0.0);
    for (vertex_t v = 0; v < t.size(); ++v) {
        if (t.is_leaf(v)) continue;
        const int q = t.q_at_level(t.level(v));
        double sum = 0.0;
        int deg = q;
        if (v != 0) {
            sum += f[t.parent(v)];
            deg += 1;
        }
        for (vertex_t c = t.child_begin(v); c < t.child_end(v); ++c) sum += f[c];
        out[v] = f[v] - sum / deg;
    }
    return out;
}

BergmanModel::GramDeviation BergmanModel::gram_deviation() const {
    const RadialTree& t = tree();
    const MeasureVector& mu = ds_->mu();
    const int L = t.depth();
    GramDeviation dev{0.0, 0.0};

    // Constant atom against itself: total mass recomputed vertex by vertex.
    double total = 0.0;
    for (vertex_t v = 0; v < t.size(); ++v) total += mu.at(v);
    dev.max_diag_dev = std::abs(total / mu.total_mass() - 1.0);

    // Per level k: Helmert Gram scaled by the directly-summed radial factor.
    // Atoms on distinct cubes of the same level have disjoint supports, so
    // those entries are structural zeros.
    std::vector<double> max_abs_e(L + 1, 0.0), max_abs_sum_e(L + 1, 0.0);
    for (int k = 1; k <= L; ++k) {
        const int q = t.q_at_level(k - 1);
        const vertex_t child = t.child_begin(t.level_begin(k - 1));
        double r_k = 0.0, y_k = 0.0;
        for (const auto& r : t.sector_ranges(child)) {
            const double w = mu.level_value(r.level);
            r_k += (r.end - r.begin) * phi_[k][r.level - k] * phi_[k][r.level - k] * w;
            y_k += (r.end - r.begin) * phi_[k][r.level - k] * w;
        }
        std::vector<std::vector<double>> e(q);
        for (int ell = 1; ell < q; ++ell) {
            e[ell] = helmert_vector(q, ell);
            double sum = 0.0;
            for (double x : e[ell]) {
                sum += x;
                max_abs_e[k] = std::max(max_abs_e[k], std::abs(x));
            }
            max_abs_sum_e[k] = std::max(max_abs_sum_e[k], std::abs(sum));
        }
        for (int a = 1; a < q; ++a)
            for (int b = a; b < q; ++b) {
                double dot = 0.0;
                for (int j = 0; j < q; ++j) dot += e[a][j] * e[b][j];
                const double entry = dot * r_k / c_[k];
                if (a == b)
                    dev.max_diag_dev = std::max(dev.max_diag_dev, std::abs(entry - 1.0));
                else
                    dev.max_offdiag = std::max(dev.max_offdiag, std::abs(entry));
            }
        // Against the constant atom: per-branch radial sum times sum of the
        // child-vector entries.
        dev.max_offdiag =
            std::max(dev.max_offdiag, max_abs_sum_e[k] * y_k /
                                          (std::sqrt(mu.total_mass()) * std::sqrt(c_[k])));
    }

    // Nested pairs k < kp: the shallow atom is radial on the deep atom's
    // support, so the entry factors into component bounds times the directly
    // summed cross profile over one child sector at level kp.
    for (int k = 1; k <= L; ++k) {
        for (int kp = k + 1; kp <= L; ++kp) {
            // First vertex at level kp - 1 below a level-(k) child, then its
            // first child: representative deep support.
            const vertex_t shallow_child = t.child_begin(t.level_begin(k - 1));
            vertex_t a = shallow_child;
            for (int l = k; l < kp - 1; ++l) a = t.child_begin(a);
            const vertex_t deep_child = t.child_begin(a);
            double x = 0.0;
            for (const auto& r : t.sector_ranges(deep_child))
                x += (r.end - r.begin) * phi_[k][r.level - k] * phi_[kp][r.level - kp] *
                     mu.level_value(r.level);
            const double entry = max_abs_e[k] * max_abs_sum_e[kp] * std::abs(x) /
                                 (std::sqrt(c_[k]) * std::sqrt(c_[kp]));
            dev.max_offdiag = std::max(dev.max_offdiag, entry);
        }
    }
    return dev;
}

std::vector<BasisAtom> BergmanModel::enumerate_basis() const {
    const RadialTree& t = tree();
    std::vector<BasisAtom> out;
    for (vertex_t v = 0; v < t.size(); ++v) {
        if (t.is_leaf(v)) continue;
        const int k = t.level(v) + 1;
        const int q = t.q_at_level(k - 1);
        for (int ell = 1; ell < q; ++ell)
            out.push_back({v, ell, helmert_vector(q, ell), std::sqrt(c_[k])});
    }
    return out;
}

vertex_t BergmanModel::basis_size() const {
    const RadialTree& t = tree();
    vertex_t count = 1;
    for (int l = 0; l < t.depth(); ++l)
        count += t.level_size(l) * (t.q_at_level(l) - 1);
    return count;
}

GridFunction BergmanModel::materialize(const BasisAtom& atom) const {
    const RadialTree& t = tree();
    GridFunction g(t.size(), 0.0);
    const vertex_t a = atom.cube;
    const int k = t.level(a) + 1;
    for (vertex_t c = t.child_begin(a); c < t.child_end(a); ++c) {
        const double e = atom.child_vector[c - t.child_begin(a)] / atom.norm;
        for (const auto& r : t.sector_ranges(c))
            for (vertex_t z = r.begin; z < r.end; ++z) g[z] = phi_[k][r.level - k] * e;
    }
    return g;
}

nlohmann::json BergmanModel::basis_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& atom : enumerate_basis())
        arr.push_back({{"cube", atom.cube},
                       {"ell", atom.ell},
                       {"child_vector", atom.child_vector},
                       {"norm", atom.norm}});
    return arr;
}

}  // namespace treeberg
