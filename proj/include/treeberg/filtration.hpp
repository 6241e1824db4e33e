#pragma once

#include <utility>
#include <vector>

#include "treeberg/dyadic.hpp"

namespace treeberg {

// E_k f = Σ_{Q in D_k} <f>_Q 1_Q. k ranges over 0..depth.
GridFunction conditional_expectation(const DyadicSystem& ds, const GridFunction& f, int k);

// D_k f = E_k f - E_{k-1} f, k >= 1.
GridFunction martingale_difference(const DyadicSystem& ds, const GridFunction& f, int k);

// Dyadic maximal function M f(x) = max_{Q ∋ x} <|f|>_Q.
GridFunction maximal_function(const DyadicSystem& ds, const GridFunction& f);

// Three-term BMO norm: oscillation sup, parent-jump sup, and |∫ f dμ|.
double bmo_norm(const DyadicSystem& ds, const GridFunction& f);
struct BmoTerms {
    double oscillation;
    double parent_jump;
    double mean;
};
BmoTerms bmo_terms(const DyadicSystem& ds, const GridFunction& f);
// The filtration-form diagnostic ||E_0 f||_∞ + sup_k ||E_k|f - E_{k-1}f|||_∞.
double bmo_norm_filtration(const DyadicSystem& ds, const GridFunction& f);

// H¹ martingale square-function norm ‖(Σ_k |D_k f|²)^{1/2}‖_1.
double h1_norm(const DyadicSystem& ds, const GridFunction& f);

/// Simple atomic block s = a - <a>_{Q^{(1)}} 1_{Q^{(1)}} with supp(a) ⊆ Q
/// and ‖a‖_∞ ≤ μ(Q)^{-1}.
struct SimpleAtomicBlock {
    cube_t cube;         // Q
    cube_t parent_cube;  // Q^{(1)}
    GridFunction inner;  // a, after any rescale
    GridFunction values; // s
    double scale;        // rescale factor applied to meet the size bound
};

// Builds the block; rescales a (reporting the factor) if ‖a‖_∞ > μ(Q)^{-1}.
// Q must have a parent and a must vanish outside Q.
SimpleAtomicBlock make_simple_block(const DyadicSystem& ds, cube_t cube, const GridFunction& a);

struct Subatom {
    double lambda;
    cube_t cube;      // Q_i, must satisfy Q_i ⊆ Q and generation >= gen(Q)
    GridFunction a;   // supported in Q_i, ‖a‖_∞ ≤ μ(Q_i)^{-1}/(k_i - k + 1)
};

struct BlockDecomposition {
    std::vector<std::pair<double, SimpleAtomicBlock>> blocks;
    double coefficient_sum_in;
    double coefficient_sum_out;
};

// Telescopes an atomic block (support cube Q, given as subatoms) into simple
// atomic blocks summing exactly to it. Requires Q != X and zero total mean.
BlockDecomposition decompose_block(const DyadicSystem& ds, cube_t support_cube,
                                   const std::vector<Subatom>& subatoms);

}  // namespace treeberg
