#pragma once

#include <vector>

#include "treeberg/tree.hpp"

namespace treeberg {

/// μ(x) = ∏_{l<|x|} q̃(l)^{-α}, α > 1. Radial, so one value per level.
/// Raw mode has μ(root) = 1; normalized mode rescales to total mass 1.
class MeasureVector {
public:
    MeasureVector(const RadialTree& tree, double alpha, bool normalize);

    double alpha() const { return alpha_; }
    bool normalized() const { return normalized_; }
    double total_mass() const { return total_mass_; }

    double at(vertex_t v) const { return level_value_[tree_->level(v)]; }
    double operator()(vertex_t v) const { return at(v); }
    double level_value(int l) const { return level_value_[l]; }

    const RadialTree& tree() const { return *tree_; }

    double sum_over(const std::vector<LevelRange>& ranges) const;

private:
    const RadialTree* tree_;
    double alpha_;
    bool normalized_;
    double total_mass_;
    std::vector<double> level_value_;
};

MeasureVector build_measure(const RadialTree& tree, double alpha, bool normalize);

// Σ_{y in S_x} μ(y).
double sector_measure(const RadialTree& tree, const MeasureVector& mu, vertex_t x);

}  // namespace treeberg
