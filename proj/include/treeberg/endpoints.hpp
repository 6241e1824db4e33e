#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treeberg/kernel_bounds.hpp"

namespace treeberg {

/// A candidate-based lower-bound estimator result: one ratio per candidate,
/// the estimate being their maximum.
struct CandidateRatio {
    std::string candidate_id;
    double ratio;
};

struct EndpointReport {
    std::string estimator;
    std::string family;  // human-readable candidate family description
    std::vector<CandidateRatio> ratios;
    double max_ratio() const;
};

/// Abstract linear operator on grid functions.
using Operator = std::function<GridFunction(const GridFunction&)>;

Operator projector_operator(const BergmanModel& model);
// Dense application of a generic kernel: (Tf)(x) = sum_y K(x,y) f(y) mu(y).
Operator kernel_apply(const KernelOperator& op, const DyadicSystem& ds);

// Weak (1,1): for each candidate f, the exact sup over the finite level set
// {|Tf(x)|} of lambda * mu(|Tf| > lambda) / ||f||_1. Candidates: normalized
// point masses, cube indicators, seeded sparse nonnegative functions.
EndpointReport weak11_ratio(const DyadicSystem& ds, const Operator& T,
                            std::uint64_t seed = 1, int random_trials = 32);

enum class EndpointKind { LinfToBmo, H1ToL1 };
// linf_to_bmo: bmo(Tf) over sign patterns with ||f||_inf = 1.
// h1_to_l1: ||Tb||_1 over simple atomic blocks with unit-certified norm.
EndpointReport endpoint_ratios(const DyadicSystem& ds, const Operator& T, EndpointKind which,
                               std::uint64_t seed = 1, int random_trials = 32);

enum class StrongEndpointKind { H1ToH1, BmoToBmo };
// h1_to_h1: h1_norm(P b) over unit-certified simple blocks.
// bmo_to_bmo: bmo(P f)/bmo(f) over anchored BMO candidates; near-degenerate
// candidates (bmo < 1e-12) are skipped.
EndpointReport strong_endpoint_ratios(const BergmanModel& model, StrongEndpointKind which,
                                      std::uint64_t seed = 1, int random_trials = 32);

}  // namespace treeberg
