#include "treeberg/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace treeberg {

MeasureVector::MeasureVector(const RadialTree& tree, double alpha, bool normalize)
    : tree_(&tree), alpha_(alpha), normalized_(normalize) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("alpha must be > 1 (the regimes alpha <= 1 are out of scope)");
    const int L = tree.depth();
    level_value_.resize(L + 1);
    level_value_[0] = 1.0;
    for (int l = 1; l <= L; ++l)
        level_value_[l] = level_value_[l - 1] / std::pow(tree.q_at_level(l - 1), alpha);

    double total = 0.0;
    for (int l = 0; l <= L; ++l)
        total += static_cast<double>(tree.level_size(l)) * level_value_[l];
    total_mass_ = total;
    if (normalize) {
        for (auto& v : level_value_) v /= total;
        total_mass_ = 1.0;
    }
}

double MeasureVector::sum_over(const std::vector<LevelRange>& ranges) const {
    double s = 0.0;
    for (const auto& r : ranges)
        s += static_cast<double>(r.end - r.begin) * level_value_[r.level];
    return s;
}

MeasureVector build_measure(const RadialTree& tree, double alpha, bool normalize) {
    return MeasureVector(tree, alpha, normalize);
}

double sector_measure(const RadialTree& tree, const MeasureVector& mu, vertex_t x) {
    tree.check_vertex(x);
    return mu.sum_over(tree.sector_ranges(x));
}

}  // namespace treeberg
