#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cusplab/kernellab/kernel_field.hpp"

namespace cusplab::oracles {

struct FiniteDifferenceReport {
    std::vector<double> steps;
    std::vector<double> max_rel_error;  // per step, over all sample points
    std::vector<double> orders;         // log2 ratios of consecutive errors (for halving steps)
};

/// Compares the gradient kernel against central differences of psi in x at
/// seeded random points with |t - x| >= min_separation.
inline FiniteDifferenceReport finite_difference_check(const kernellab::PairExpansion& pe, const std::vector<double>& steps, std::size_t samples = 64,
                                                      std::uint64_t seed = 11, double radius = 1.0, double min_separation = 0.2) {
    if (steps.size() < 2) throw ParameterError("finite-difference check needs at least two steps");
    const auto K = kernellab::gradient_kernel(pe);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-radius, radius);
    std::vector<std::pair<Vec3, Vec3>> pts;
    while (pts.size() < samples) {
        const Vec3 t{U(rng), U(rng), U(rng)}, x{U(rng), U(rng), U(rng)};
        if (norm(t - x) >= min_separation) pts.push_back({t, x});
    }
    FiniteDifferenceReport r;
    r.steps = steps;
    for (double h : steps) {
        double worst = 0.0;
        for (const auto& [t, x] : pts) {
            const auto exact = K.eval(t, x).value;
            double num = 0.0, den = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                Vec3 xp = x, xm = x;
                xp[c] += h;
                xm[c] -= h;
                const double fd = (pe.psi(t, xp) - pe.psi(t, xm)) / (2.0 * h);
                num += (fd - exact[c]) * (fd - exact[c]);
                den += exact[c] * exact[c];
            }
            if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
        }
        r.max_rel_error.push_back(worst);
    }
    for (std::size_t i = 1; i < steps.size(); ++i)
        r.orders.push_back(std::log(r.max_rel_error[i - 1] / r.max_rel_error[i]) / std::log(steps[i - 1] / steps[i]));
    return r;
}

}  // namespace cusplab::oracles
