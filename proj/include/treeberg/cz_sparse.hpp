#pragma once

#include <vector>

#include "treeberg/bergman.hpp"
#include "treeberg/dyadic.hpp"

namespace treeberg {

/// One bad part of the decomposition, stored in factored form:
/// b(x) = f(x) 1_Q(x) - avg * 1_{Q^{(1)}}(x), avg = <f 1_Q>_{Q^{(1)}}.
struct CZBadPart {
    cube_t cube;
    double avg;
};

struct CZDecomposition {
    double lambda;
    cube_t restricting_cube;
    std::vector<CZBadPart> bad;
    GridFunction good;
    bool parents_escape;  // Q_j^{(1)} not inside the union of the Q_l

    GridFunction bad_part(const DyadicSystem& ds, const GridFunction& f,
                          std::size_t j) const;
};

// Maximal cubes Q inside r with <f>_Q > lambda; f >= 0 supported in r,
// lambda > <f>_r required.
CZDecomposition cz_decompose(const DyadicSystem& ds, const GridFunction& f, double lambda,
                             cube_t r);

/// Observed constants of the decomposition, all normalized so that the
/// statement being checked is "bounded by an absolute constant".
struct CZConstants {
    double g_l1;      // ||g||_1 / ||f||_1
    double b_l1_sum;  // sum_j ||b_j||_1 / ||f||_1
    double g_l2;      // ||g||_2^2 / (lambda ||f||_1)
    double g_bmo;     // ||g||_BMO / lambda
};
CZConstants cz_constants(const DyadicSystem& ds, const CZDecomposition& dec,
                         const GridFunction& f);

struct SparseEntry {
    cube_t cube;
    std::vector<vertex_t> exceptional;  // E_Q
    double exceptional_mass;
};

struct SparseFamily {
    std::vector<SparseEntry> entries;
};

// Stopping-time family of Theorem-A type: at each active cube, children of
// the superlevel set {<f_i>_Q > 4 <f_i>_{Q0}} for either function become the
// next generation; E_{Q0} is what remains.
SparseFamily sparse_family(const DyadicSystem& ds, const GridFunction& f1,
                           const GridFunction& f2);

struct SparseForms {
    double a_form;  // sum <f1>_Q <f2>_Q mu(Q)
    double e_form;  // sibling-interaction form; order of arguments matters
};
SparseForms sparse_forms(const DyadicSystem& ds, const SparseFamily& s,
                         const GridFunction& f1, const GridFunction& f2);

struct DominationReport {
    double lhs;  // |<P f1, f2>|
    double a_form;
    double e_form;
    double ratio;  // lhs / (a_form + e_form)
};
DominationReport domination_report(const BergmanModel& model, const GridFunction& f1,
                                   const GridFunction& f2);

// Export: list of (cube, generation, is_sector, exceptional mass, parent).
nlohmann::json sparse_family_json(const DyadicSystem& ds, const SparseFamily& s);

}  // namespace treeberg
