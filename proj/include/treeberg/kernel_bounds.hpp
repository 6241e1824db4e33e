#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treeberg/bergman.hpp"
#include "treeberg/filtration.hpp"

namespace treeberg {

/// Generic symmetric integral-operator kernel over a fixed tree + measure.
struct KernelOperator {
    std::function<double(vertex_t, vertex_t)> K;
    bool symmetric = true;
};

// Kernel of the full projector attached to a model.
KernelOperator projector_kernel(const BergmanModel& model);
// Deliberately singular negative control: K(x,y) = 1 / mu(x^y)^2, whose
// integral conditions blow up with depth.
KernelOperator singular_control_kernel(const DyadicSystem& ds);

/// Sup strategy for the cube/vertex scans. Exhaustive visits every cube and
/// every vertex pair (intended for trees with <= 500 vertices).
/// RadialCandidates visits one representative cube per level and, inside each
/// cube, the base vertex plus one vertex per child sector per level — exact
/// for kernels that depend only on levels and branch splits, which all the
/// kernels built here do.
enum class SupMode { Exhaustive, RadialCandidates };

// sup over non-point cubes Q and x,y in Q of
// sum_{z outside Q} |K(z,x) - K(z,y)| mu(z).
double hormander_constant(const KernelOperator& op, const DyadicSystem& ds, SupMode mode);

// sup over cubes Q with a parent and x in Q of
// sum_{z in Q^{(1)} \ Q} |K(x,z)| mu(z).
double size_constant(const KernelOperator& op, const DyadicSystem& ds, SupMode mode);

struct BoundCase {
    std::string name;
    int cube_level;
    int ell;
    double lhs;
    double rhs_shape;
    double ratio;  // lhs / rhs_shape, the empirically implied constant
};

struct BoundReport {
    std::vector<BoundCase> cases;
    double max_ratio() const;
};

// Single-cube kernel-difference bounds at distance ell above cube q:
// sup_{x,y in q} |K_{q^{(ell)}}(z,x) - K_{q^{(ell)}}(z,y)|, z split between
// q^{(ell-1)} and its complement, against nu-over-measure shapes.
BoundReport verify_krestf1(const BergmanModel& model, cube_t q, int ell);

// Plain size of the parent-cube kernel on q^{(1)} minus its base vertex,
// split by whether the pair meets at the base vertex (extra 1/q factor).
BoundReport verify_krestf2(const BergmanModel& model, cube_t q);

// Truncated-kernel differences: for each ell, z ranges over the annulus
// q^{(ell)} \ q^{(ell-1)}, with the z = base-of-q^{(ell)} case separated.
BoundReport verify_krest(const BergmanModel& model, cube_t q, const std::vector<cube_t>& F,
                         cube_t q0);

// Pointwise bounds on D_{closure(Q)^{(ell)}} b for a simple block b: inside
// closure(Q)^{(ell-1)} and on the surrounding annulus.
BoundReport verify_diff_bounds(const BergmanModel& model, const SimpleAtomicBlock& b, int ell);

}  // namespace treeberg
