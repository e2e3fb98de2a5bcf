#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/smooth_field.hpp"

namespace cusplab::kernellab {

/// Quadrature settings shared by coefficient predictors and Galerkin assembly.
struct QuadratureRule {
    int order = 6;           // Gauss-Legendre points per axis and cell
    int oversample = 4;      // extra subdivision per axis on diagonal-touching cell pairs
    double tol = 1e-6;       // relative tolerance of adaptive integration
    int max_level = 7;       // adaptive refinement doublings
    double domain = 6.0;     // half-width of the integration box when a field has no support
    double max_points = 5e7;
};

struct GaussLegendre {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with n points mapped to [0, 1]; cached per n.
inline const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    if (n < 1) throw ParameterError("quadrature order must be positive");
    GaussLegendre g;
    g.nodes.resize(static_cast<std::size_t>(n));
    g.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const auto idx = static_cast<std::size_t>(n - 1 - i);
        g.nodes[idx] = 0.5 * (x + 1.0);
        g.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(g)).first->second;
}

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Tensor Gauss-Legendre on a uniform split of the box into s^d cells.
inline double integrate_tensor(const ScalarFunction& f, const Box& box, int order, int splits) {
    const std::size_t d = box.dim();
    const auto& gl = gauss_legendre(order);
    const std::size_t q = gl.nodes.size();
    const std::size_t per_axis = q * static_cast<std::size_t>(splits);
    std::vector<double> pts(d * per_axis), wts(d * per_axis);
    for (std::size_t a = 0; a < d; ++a) {
        const double h = (box.hi[a] - box.lo[a]) / splits;
        for (int s = 0; s < splits; ++s)
            for (std::size_t i = 0; i < q; ++i) {
                const std::size_t k = a * per_axis + static_cast<std::size_t>(s) * q + i;
                pts[k] = box.lo[a] + h * (s + gl.nodes[i]);
                wts[k] = h * gl.weights[i];
            }
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> z(d);
    double total = 0.0;
    for (;;) {
        double w = 1.0;
        for (std::size_t a = 0; a < d; ++a) {
            z[a] = pts[a * per_axis + idx[a]];
            w *= wts[a * per_axis + idx[a]];
        }
        total += w * f(z);
        std::size_t a = d;
        while (a > 0) {
            --a;
            if (++idx[a] < per_axis) break;
            idx[a] = 0;
            if (a == 0) return total;
        }
        if (d == 0) return total;
    }
}

struct IntegrationResult {
    double value = 0.0;
    double residual = 0.0;
};

/// Adaptive tensor Gauss-Legendre: doubles the splits per axis until two
/// successive levels agree to rule.tol (relative), or throws ConvergenceError.
inline IntegrationResult integrate_adaptive(const ScalarFunction& f, const Box& box, const QuadratureRule& rule) {
    if (box.dim() == 0) return {f({}), 0.0};
    double prev = integrate_tensor(f, box, rule.order, 1);
    double residual = 0.0;
    for (int level = 1, splits = 2; level <= rule.max_level; ++level, splits *= 2) {
        const double points = std::pow(static_cast<double>(rule.order * splits), static_cast<double>(box.dim()));
        if (points > rule.max_points) break;
        const double cur = integrate_tensor(f, box, rule.order, splits);
        residual = std::abs(cur - prev);
        if ((level >= 2 || prev != 0.0) && (residual <= rule.tol * std::abs(cur) || residual < 1e-300)) return {cur, residual};
        prev = cur;
    }
    throw ConvergenceError("adaptive quadrature did not reach tolerance, refinement residual " + std::to_string(residual), residual);
}

}  // namespace cusplab::kernellab
