#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/quadrature.hpp"
#include "cusplab/kernellab/smooth_field.hpp"

namespace cusplab::asymptotics {

using kernellab::Box;
using kernellab::QuadratureRule;
using kernellab::SmoothField;

struct WeightFunctionals {
    double kappa = 0.0;
    double R = 0.0;  // cell-sum functional of the weight a
    double M = 0.0;  // exponentially weighted L2 norm of b
};

namespace detail {

inline Box field_box(const SmoothField& f, const QuadratureRule& rule) {
    if (f.support()) return *f.support();
    return Box::cube(f.dim(), -rule.domain, rule.domain);
}

}  // namespace detail

/// Local L3 norm of `a` on the unit cell (0,1)^3 + n.
inline double cell_l3_norm(const SmoothField& a, const std::vector<long>& n, const QuadratureRule& rule) {
    const Box s = detail::field_box(a, rule);
    Box c{std::vector<double>(a.dim()), std::vector<double>(a.dim())};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        c.lo[i] = std::max(s.lo[i], static_cast<double>(n[i]));
        c.hi[i] = std::min(s.hi[i], static_cast<double>(n[i]) + 1.0);
        if (!(c.hi[i] > c.lo[i])) return 0.0;
    }
    auto f = [&](std::span<const double> z) { return std::pow(std::abs(a.value(z)), 3); };
    return std::cbrt(kernellab::integrate_adaptive(f, c, rule).value);
}

/// [sum_n exp(-kappa |n|_1 / 2) ||a||_{L3(C_n)}^{1/2}]^2 over the unit cells
/// meeting the support of a.
inline double weight_R(const SmoothField& a, double kappa, const QuadratureRule& rule = {}) {
    if (!(kappa > 0.0)) throw ParameterError("weight functionals need kappa > 0");
    const Box s = detail::field_box(a, rule);
    const std::size_t d = a.dim();
    std::vector<long> lo(d), hi(d), n(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = static_cast<long>(std::floor(s.lo[i]));
        hi[i] = static_cast<long>(std::ceil(s.hi[i])) - 1;
        if (hi[i] < lo[i]) hi[i] = lo[i];
    }
    n = lo;
    double sum = 0.0;
    for (;;) {
        long l1 = 0;
        for (long v : n) l1 += std::labs(v);
        sum += std::exp(-0.5 * kappa * static_cast<double>(l1)) * std::sqrt(cell_l3_norm(a, n, rule));
        std::size_t i = 0;
        for (; i < d; ++i) {
            if (++n[i] <= hi[i]) break;
            n[i] = lo[i];
        }
        if (i == d) break;
    }
    return sum * sum;
}

/// [integral of |b|^2 exp(-2 kappa |x|_1)]^{1/2}; the box is split at the
/// coordinate planes so each piece has a smooth integrand.
inline double weight_M(const SmoothField& b, double kappa, const QuadratureRule& rule = {}) {
    if (!(kappa > 0.0)) throw ParameterError("weight functionals need kappa > 0");
    const Box s = detail::field_box(b, rule);
    const std::size_t d = b.dim();
    auto f = [&](std::span<const double> z) {
        double l1 = 0.0;
        for (double v : z) l1 += std::abs(v);
        const double v = b.value(z);
        return v * v * std::exp(-2.0 * kappa * l1);
    };
    double total = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Box piece = s;
        bool empty = false;
        for (std::size_t i = 0; i < d; ++i) {
            if (mask >> i & 1U)
                piece.lo[i] = std::max(piece.lo[i], 0.0);
            else
                piece.hi[i] = std::min(piece.hi[i], 0.0);
            if (!(piece.hi[i] > piece.lo[i])) empty = true;
        }
        if (!empty) total += kernellab::integrate_adaptive(f, piece, rule).value;
    }
    return std::sqrt(total);
}

inline WeightFunctionals weight_functionals(const SmoothField& a, const SmoothField& b, double kappa, const QuadratureRule& rule = {}) {
    return {kappa, weight_R(a, kappa, rule), weight_M(b, kappa, rule)};
}

}  // namespace cusplab::asymptotics
