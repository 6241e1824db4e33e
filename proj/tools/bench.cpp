// Micro-benchmark: fused projector sweep vs the cube-by-cube reference, and
// the parallel sweep at several thread counts (output verified bitwise equal).

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "treeberg/bergman.hpp"

using namespace treeberg;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count() /
           reps;
}

}  // namespace

int main(int argc, char** argv) {
    int q = 3, depth = 8;
    if (argc > 1) q = std::atoi(argv[1]);
    if (argc > 2) depth = std::atoi(argv[2]);

    RadialTree tree(BranchingSpec::constant(q), depth);
    MeasureVector mu = build_measure(tree, 2.0, true);
    DyadicSystem ds(tree, mu);
    BergmanModel model(ds);
    const vertex_t n = tree.size();
    std::printf("tree: constant(%d) depth %d, %lld vertices\n", q, depth,
                static_cast<long long>(n));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction f(n);
    for (auto& x : f) x = dist(rng);

    const int reps = n > 100000 ? 3 : 10;
    GridFunction serial = model.project(f);
    std::printf("%-28s %10.3f ms\n", "fused serial sweep",
                time_ms(reps, [&] { model.project(f); }));
    if (n <= 50000)
        std::printf("%-28s %10.3f ms\n", "cube-by-cube reference",
                    time_ms(1, [&] { model.project_reference(f); }));
    for (int threads : {2, 4}) {
        GridFunction par = model.project(f, threads);
        bool identical = par == serial;
        std::printf("%-28s %10.3f ms  (bitwise %s)\n",
                    ("parallel sweep x" + std::to_string(threads)).c_str(),
                    time_ms(reps, [&] { model.project(f, threads); }),
                    identical ? "equal" : "DIFFERENT");
    }
    return 0;
}
