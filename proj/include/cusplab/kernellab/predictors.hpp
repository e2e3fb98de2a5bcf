#pragma once

#include <cmath>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/kernel_field.hpp"
#include "cusplab/kernellab/quadrature.hpp"

namespace cusplab::kernellab {

/// eta coefficient of the cusp between particles j < k (0-based) of an
/// N-particle function; eta lives on R^{3N} with particle blocks in order.
struct PairCoefficient {
    std::size_t j = 0;
    std::size_t k = 1;
    SmoothField eta;
};

namespace detail {

inline Box block_box(const std::optional<Box>& support, std::size_t block, double domain) {
    if (!support) return Box::cube(3, -domain, domain);
    Box b;
    for (std::size_t a = 0; a < 3; ++a) {
        b.lo.push_back(support->lo[3 * block + a]);
        b.hi.push_back(support->hi[3 * block + a]);
    }
    return b;
}

inline Box intersect(const Box& a, const Box& b) {
    Box r = a;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        r.lo[i] = std::max(a.lo[i], b.lo[i]);
        r.hi[i] = std::min(a.hi[i], b.hi[i]);
        if (r.hi[i] < r.lo[i]) r.hi[i] = r.lo[i];
    }
    return r;
}

inline Box hull(const Box& a, const Box& b) {
    Box r = a;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        r.lo[i] = std::min(a.lo[i], b.lo[i]);
        r.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return r;
}

inline Box concat(const std::vector<Box>& parts) {
    Box r;
    for (const auto& p : parts) {
        r.lo.insert(r.lo.end(), p.lo.begin(), p.lo.end());
        r.hi.insert(r.hi.end(), p.hi.begin(), p.hi.end());
    }
    return r;
}

inline double volume(const Box& b) {
    double v = 1.0;
    for (std::size_t i = 0; i < b.dim(); ++i) v *= b.hi[i] - b.lo[i];
    return v;
}

// Squared coalescence density of one pair at x: integral over the remaining
// particles of |eta(..., x at j, ..., x at k, ...)|^2.
inline double pair_density_sq(const PairCoefficient& pc, std::size_t N, const Vec3& x, const QuadratureRule& rule) {
    std::vector<std::size_t> others;
    for (std::size_t p = 0; p < N; ++p)
        if (p != pc.j && p != pc.k) others.push_back(p);
    std::vector<double> z(3 * N);
    auto place = [&](std::span<const double> rest) {
        for (std::size_t a = 0; a < 3; ++a) {
            z[3 * pc.j + a] = x[a];
            z[3 * pc.k + a] = x[a];
        }
        for (std::size_t o = 0; o < others.size(); ++o)
            for (std::size_t a = 0; a < 3; ++a) z[3 * others[o] + a] = rest[3 * o + a];
    };
    if (others.empty()) {
        place({});
        const double v = pc.eta.value(z);
        return v * v;
    }
    std::vector<Box> parts;
    for (auto o : others) parts.push_back(block_box(pc.eta.support(), o, rule.domain));
    const Box inner = concat(parts);
    if (volume(inner) == 0.0) return 0.0;
    return integrate_adaptive(
               [&](std::span<const double> rest) {
                   place(rest);
                   const double v = pc.eta.value(z);
                   return v * v;
               },
               inner, rule)
        .value;
}

inline Box coalescence_box(const std::vector<PairCoefficient>& pairs, const QuadratureRule& rule) {
    std::optional<Box> box;
    for (const auto& pc : pairs) {
        const Box b = intersect(block_box(pc.eta.support(), pc.j, rule.domain), block_box(pc.eta.support(), pc.k, rule.domain));
        box = box ? hull(*box, b) : b;
    }
    return box ? *box : Box::cube(3, 0.0, 0.0);
}

inline double integrate_H_power(const std::vector<PairCoefficient>& pairs, std::size_t N, double power, const QuadratureRule& rule) {
    if (N < 2) throw ParameterError("particle count must be at least 2");
    bool all_zero = true;
    for (const auto& pc : pairs) {
        if (pc.j >= pc.k || pc.k >= N) throw ParameterError("pair indices must satisfy j < k < N");
        if (pc.eta.dim() != 3 * N) throw ParameterError("pair coefficient eta must live on R^{3N}");
        all_zero = all_zero && pc.eta.is_zero();
    }
    if (pairs.empty() || all_zero) return 0.0;
    const Box box = coalescence_box(pairs, rule);
    if (volume(box) == 0.0) return 0.0;
    const auto H = [&](std::span<const double> xs) {
        const Vec3 x{xs[0], xs[1], xs[2]};
        double s = 0.0;
        for (const auto& pc : pairs) s += pair_density_sq(pc, N, x, rule);
        return std::pow(2.0 * s, 0.5 * power);
    };
    return integrate_adaptive(H, box, rule).value;
}

inline std::vector<PairCoefficient> as_pairs(const PairExpansion& pe) { return {{0, 1, pe.eta}}; }

}  // namespace detail

/// Leading coefficient of s_k(V) ~ B/k: B = (4/(3 pi)) * integral of H.
inline double predict_B(const std::vector<PairCoefficient>& pairs, std::size_t N, const QuadratureRule& rule = {}) {
    return model_constant_nu * detail::integrate_H_power(pairs, N, 1.0, rule);
}
inline double predict_B(const PairExpansion& pe, const QuadratureRule& rule = {}) { return predict_B(detail::as_pairs(pe), 2, rule); }

/// Density-operator coefficient: A = (1/3) (2/pi)^{5/4} * integral of H^{3/4}.
inline double predict_A(const std::vector<PairCoefficient>& pairs, std::size_t N, const QuadratureRule& rule = {}) {
    return std::pow(2.0 / pi, 1.25) / 3.0 * detail::integrate_H_power(pairs, N, 0.75, rule);
}
inline double predict_A(const PairExpansion& pe, const QuadratureRule& rule = {}) { return predict_A(detail::as_pairs(pe), 2, rule); }

/// Coalescence weight h(x) of a model spec: h(x)^2 = sum_j sum_k integral over
/// the other reduced points of |b_jk beta_jk|^2 with x_k = x.
inline double model_weight_h(const ModelKernelSpec& s, const Vec3& x, const QuadratureRule& rule) {
    const std::size_t R = s.N - 1;
    double total = 0.0;
    for (std::size_t j = 0; j < s.N; ++j) {
        for (std::size_t k = 0; k < R; ++k) {
            std::vector<double> zb(3 * R), zbeta(3 * R + 3);
            auto integrand = [&](std::span<const double> rest) {
                std::size_t o = 0;
                for (std::size_t p = 0; p < R; ++p) {
                    for (std::size_t a = 0; a < 3; ++a) zb[3 * p + a] = p == k ? x[a] : rest[3 * o + a];
                    if (p != k) ++o;
                }
                std::copy(zb.begin(), zb.end(), zbeta.begin());
                for (std::size_t a = 0; a < 3; ++a) zbeta[3 * R + a] = x[a];
                const double v = s.b[j][k].value(zb) * s.beta[j][k].value(zbeta);
                return v * v;
            };
            if (R == 1) {
                total += integrand({});
                continue;
            }
            std::vector<Box> parts;
            for (std::size_t p = 0; p < R; ++p)
                if (p != k) parts.push_back(detail::block_box(s.b[j][k].support(), p, rule.domain));
            total += integrate_adaptive(integrand, detail::concat(parts), rule).value;
        }
    }
    return std::sqrt(total);
}

/// G_1 = g_1 of the model operator: nu * integral of |a h| for Phi = x/|x|,
/// zero for order > 0 (and for the smooth constant kernel).
inline double predict_model_G1(const ModelKernelSpec& s, const QuadratureRule& rule = {}) {
    s.validate();
    const auto kind = s.phi.kind();
    if (s.phi.order() > 0.0 || kind == HomogeneousFunction::Kind::Constant) return 0.0;
    if (s.phi.order() < 0.0) throw ParameterError("model constant is unsupported for negative homogeneity order");
    if (kind != HomogeneousFunction::Kind::GradAbs) throw ParameterError("model constant is known only for Phi(x) = x/|x|");
    if (s.a.is_zero()) return 0.0;
    const Box box = s.a.support() ? *s.a.support() : Box::cube(3, -rule.domain, rule.domain);
    const auto f = [&](std::span<const double> xs) {
        const Vec3 x{xs[0], xs[1], xs[2]};
        return std::abs(s.a.value(xs) * model_weight_h(s, x, rule));
    };
    return model_constant_nu * integrate_adaptive(f, box, rule).value;
}

}  // namespace cusplab::kernellab
