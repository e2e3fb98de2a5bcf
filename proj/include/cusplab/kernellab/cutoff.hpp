#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cusplab/core.hpp"

namespace cusplab::kernellab {

/// Smooth transition profile.
///
/// theta(t) = sigma(2|t| - 1), where sigma(u) = f(1-u) / (f(1-u) + f(u)) on
/// [0, 1] and f(s) = exp(-1/s) for s > 0, f(s) = 0 otherwise. So theta is 1 on
/// |t| <= 1/2, 0 on |t| >= 1, C-infinity and monotone in |t|.
class CutoffProfile {
public:
    struct Jet {
        double value = 0.0;
        double d1 = 0.0;
        double d2 = 0.0;
    };

    [[nodiscard]] double theta(double t) const { return theta_jet(t).value; }
    [[nodiscard]] double zeta(double t) const { return 1.0 - theta(t); }

    /// theta and its first two derivatives at t.
    [[nodiscard]] Jet theta_jet(double t) const {
        const double a = std::abs(t);
        const double u = 2.0 * a - 1.0;
        if (u <= 0.0) return {1.0, 0.0, 0.0};
        if (u >= 1.0) return {0.0, 0.0, 0.0};
        const Jet s = sigma(u);
        const double sg = t < 0 ? -1.0 : 1.0;
        return {s.value, 2.0 * sg * s.d1, 4.0 * s.d2};
    }

private:
    static Jet f(double s) {
        if (s <= 0.0) return {};
        const double e = std::exp(-1.0 / s);
        const double s2 = s * s;
        return {e, e / s2, e * (1.0 / (s2 * s2) - 2.0 / (s2 * s))};
    }

    static Jet sigma(double u) {
        const Jet fa = f(1.0 - u);
        const Jet fb = f(u);
        // g(u) = f(1-u), h(u) = f(u)
        const double g = fa.value, g1 = -fa.d1, g2 = fa.d2;
        const double h = fb.value, h1 = fb.d1, h2 = fb.d2;
        const double den = g + h;
        const double num = g1 * h - g * h1;
        const double num1 = g2 * h - g * h2;
        const double den2 = den * den;
        const double value = g / den;
        const double d1 = num / den2;
        const double d2 = (num1 * den - 2.0 * num * (g1 + h1)) / (den2 * den);
        return {value, d1, d2};
    }
};

/// Separation, box and coalescence cutoffs for an N-particle configuration.
///
/// Reduced configurations xhat hold N-1 points x_1..x_{N-1}; the origin plays
/// the role of x_0.
class CutoffSet {
public:
    CutoffSet(double delta, double bigR, double eps, CutoffProfile profile = {})
        : delta_(delta), bigR_(bigR), eps_(eps), profile_(profile) {
        if (!(delta > 0) || !(bigR > 0) || !(eps > 0))
            throw ParameterError("cutoff scales must be positive");
        if (eps > delta) throw ParameterError("cutoff eps must not exceed delta");
    }

    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double bigR() const { return bigR_; }
    [[nodiscard]] double eps() const { return eps_; }
    [[nodiscard]] const CutoffProfile& profile() const { return profile_; }

    /// Y_delta: product over pairs l < s (including x_0 = 0) of zeta(|x_l - x_s| / (4 delta)).
    [[nodiscard]] double separation(std::span<const Vec3> xhat) const {
        double y = 1.0;
        for_each_pair(xhat, [&](const Vec3& p, const Vec3& q) { y *= profile_.zeta(norm(p - q) / (4.0 * delta_)); });
        return y;
    }

    /// Sum over pairs of theta(|x_l - x_s| / (4 delta)); bounds 1 - Y_delta from above.
    [[nodiscard]] double separation_complement_bound(std::span<const Vec3> xhat) const {
        double s = 0.0;
        for_each_pair(xhat, [&](const Vec3& p, const Vec3& q) { s += profile_.theta(norm(p - q) / (4.0 * delta_)); });
        return s;
    }

    /// Q_R: product of theta(|x_l| / R) over the reduced points.
    [[nodiscard]] double box(std::span<const Vec3> xhat) const {
        double q = 1.0;
        for (const auto& p : xhat) q *= profile_.theta(norm(p) / bigR_);
        return q;
    }

    /// K_R(x) = theta(|x| / R).
    [[nodiscard]] double single_box(const Vec3& x) const { return profile_.theta(norm(x) / bigR_); }

    struct Partition {
        std::vector<double> theta_terms;  // one per point x_0 = 0, x_1, ...
        double zeta_product = 1.0;
        double separation = 1.0;  // Y_delta(xhat)
    };

    /// Coalescence partition of unity at x relative to the points of xhat.
    [[nodiscard]] Partition partition(std::span<const Vec3> xhat, const Vec3& x) const {
        Partition out;
        out.theta_terms.reserve(xhat.size() + 1);
        auto add = [&](const Vec3& p) {
            const double r = norm(x - p) / eps_;
            const double th = profile_.theta(r);
            out.theta_terms.push_back(th);
            out.zeta_product *= 1.0 - th;
        };
        add(Vec3{0.0, 0.0, 0.0});
        for (const auto& p : xhat) add(p);
        out.separation = separation(xhat);
        return out;
    }

private:
    template <class F>
    static void for_each_pair(std::span<const Vec3> xhat, F&& f) {
        const Vec3 origin{0.0, 0.0, 0.0};
        for (std::size_t s = 0; s < xhat.size(); ++s) {
            f(origin, xhat[s]);
            for (std::size_t l = 0; l < s; ++l) f(xhat[l], xhat[s]);
        }
    }

    double delta_;
    double bigR_;
    double eps_;
    CutoffProfile profile_;
};

}  // namespace cusplab::kernellab
