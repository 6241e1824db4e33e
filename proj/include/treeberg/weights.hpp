#pragma once

#include <json.hpp>

#include "treeberg/bergman.hpp"
#include "treeberg/cz_sparse.hpp"

namespace treeberg {

using Weight = GridFunction;  // strictly positive per-vertex values

// Builds a weight from a JSON spec:
//   {"kind":"radial_geometric","beta":2.0}           w(x) = beta^{|x|}
//   {"kind":"sector_bump","level":1,"child":0,"factor":4}
//       w = factor on the sector rooted at the child-th vertex of the level,
//       1 elsewhere
//   {"kind":"random","seed":1,"log_range":3}         w = 10^{U(-r, r)}, seeded
Weight make_weight(const RadialTree& tree, const nlohmann::json& spec);

// sup over all cubes Q of <w>_Q <w^{-p'/p}>_Q^{p/p'}; point cubes give 1.
double bp_characteristic(const DyadicSystem& ds, const Weight& w, double p);

// sup over cube pairs with the same dyadic parent (Q = R allowed, root
// excluded) of <w>_Q <w^{-p'/p}>_R^{p/p'}.
double tilde_bp_characteristic(const DyadicSystem& ds, const Weight& w, double p);

enum class OpNormStrategy { PowerIteration, RandomSearch };

struct OpNormResult {
    double value;     // certified lower bound on the L^p(w) operator norm
    bool converged;   // power iteration only; candidate search always true
    int iterations;
};

// Lower bound on ||P||_{L^p(w) -> L^p(w)}. p = 2 + PowerIteration runs the
// symmetrized matrix-free iteration to relative tolerance `tol`; RandomSearch
// maximizes the Rayleigh ratio over structured + seeded random candidates.
OpNormResult weighted_opnorm_lowerbound(const BergmanModel& model, const Weight& w, double p,
                                        OpNormStrategy strategy, double tol = 1e-8,
                                        int max_iter = 20000);

struct TheoremBCheck {
    double norm_lb;
    double bp;
    double tilde_bp;
    double bound;  // tilde^{1/p} * bp^{p'/p^2 + 1/p'}
    double ratio;  // norm_lb / bound
};
TheoremBCheck theoremB_check(const BergmanModel& model, const Weight& w, double p);

// max over family members of w(Q) / ([w]_{B_p} w(E_Q)) — the constant in the
// comparison w(Q) <= C [w]_{B_p} w(E_Q).
double ap_sparse_constant(const DyadicSystem& ds, const SparseFamily& s, const Weight& w,
                          double p);

}  // namespace treeberg
