#pragma once

#include <vector>

#include <json.hpp>

#include "treeberg/dyadic.hpp"

namespace treeberg {

/// One basis function beyond the constant: attached to a sector cube Q with
/// non-leaf base vertex, index ell in 1..q-1, stored in factored form
/// h(z) = phi_k(|z|) * child_vector[branch(z)] / norm on the child sectors.
struct BasisAtom {
    cube_t cube;
    int ell;
    std::vector<double> child_vector;
    double norm;
};

/// Radial harmonic machinery on a fixed tree + measure: profiles phi_k, the
/// orthonormal basis of the harmonic subspace, the projector P applied
/// matrix-free, its truncations, kernel evaluation, and the graph Laplacian.
class BergmanModel {
public:
    explicit BergmanModel(const DyadicSystem& ds);

    const DyadicSystem& system() const { return *ds_; }
    const RadialTree& tree() const { return ds_->tree(); }

    // phi_k(m): 1 at m = k, increasing to a limit < 2; 0 for m < k (support
    // convention). Throws for m > depth or k < 0.
    double phi(int k, int m) const;

    // c_k = squared L2 norm of the radial extension of a unit child value,
    // summed over one child sector rooted at level k (k = 1..depth).
    double child_norm2(int k) const { return c_.at(k); }

    // Orthogonal projection onto the span of the atoms attached to cube q.
    // Zero for singletons and single-point sectors.
    GridFunction apply_diff(cube_t q, const GridFunction& f) const;

    // P f = <f>_X 1_X + sum over cubes of apply_diff. `threads` <= 1 runs the
    // fused serial sweep; > 1 parallelizes over disjoint sectors per level
    // (bitwise identical output: write sets are disjoint, sums fixed-order).
    GridFunction project(const GridFunction& f, int threads = 1) const;
    // Straightforward cube-by-cube accumulation; the reference the fused
    // sweep is tested against.
    GridFunction project_reference(const GridFunction& f) const;

    // Sum of apply_diff over all cubes contained in r (no constant term).
    GridFunction project_localized(const GridFunction& f, cube_t r) const;

    // Sum over cubes Q with Q subset of q0 and Q not inside any member of the
    // disjoint family F; the constant term enters only when q0 is X.
    GridFunction project_outside(const GridFunction& f, const std::vector<cube_t>& F,
                                 cube_t q0) const;

    // Kernel of the single-cube projection; zero unless x and y lie strictly
    // below the base vertex of q.
    double kernel_cube(cube_t q, vertex_t x, vertex_t y) const;
    // Kernel of P, constant term 1/mu(X) included. O(depth) per pair.
    double kernel_full(vertex_t x, vertex_t y) const;
    // Kernel of project_outside.
    double kernel_truncated(const std::vector<cube_t>& F, cube_t q0, vertex_t x,
                            vertex_t y) const;

    // Delta f(x) = f(x) - mean of f over the neighbors of x, at vertices with
    // children (the root has no parent edge); zero is reported at leaves.
    GridFunction laplacian(const GridFunction& f) const;

    struct GramDeviation {
        double max_offdiag;
        double max_diag_dev;
    };
    // Deviation of the basis Gram matrix from the identity, evaluated through
    // the radial factorization of the inner products (one representative pair
    // per level pair; identical values at every position by radiality) with
    // all radial sums recomputed by direct vertex loops. O(n * depth^2).
    GramDeviation gram_deviation() const;

    std::vector<BasisAtom> enumerate_basis() const;
    // 1 (constant) + sum over levels l <= depth-1 of n_l * (q(l) - 1).
    vertex_t basis_size() const;
    // Dense vertex values of one atom (test/oracle path).
    GridFunction materialize(const BasisAtom& atom) const;
    nlohmann::json basis_json() const;

private:
    void accumulate_diffs(const GridFunction& f, vertex_t root, int threads,
                          GridFunction& out) const;
    void accumulate_diffs_masked(const GridFunction& f, vertex_t root,
                                 const std::vector<char>* skip, GridFunction& out) const;
    double cube_kernel_term(vertex_t a, vertex_t x, vertex_t y) const;

    const DyadicSystem* ds_;
    std::vector<std::vector<double>> phi_;  // phi_[k][m-k] for m = k..depth
    std::vector<double> c_;                 // c_[k], k = 1..depth; c_[0] unused
};

// Mean-zero orthonormal family in R^q: vector ell has ell leading entries
// 1/sqrt(ell(ell+1)) and then -ell/sqrt(ell(ell+1)).
std::vector<double> helmert_vector(int q, int ell);

}  // namespace treeberg
