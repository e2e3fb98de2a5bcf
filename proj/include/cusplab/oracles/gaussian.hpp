#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cusplab/core.hpp"

namespace cusplab::oracles {

/// Gaussian pair eta = c exp(-w |t - mu|^2 - w |x - mu|^2) with xi = 0.
/// On the diagonal |eta(x, x)| = c exp(-2 w |x - mu|^2), so
///   B = (4 / (3 pi)) sqrt(2) c (pi / (2 w))^{3/2}
///   A = (1/3) (2/pi)^{5/4} 2^{3/8} c^{3/4} (2 pi / (3 w))^{3/2}.
struct GaussianPair {
    std::string name;
    double c = 1.0;
    double w = 1.0;
    Vec3 mu{0, 0, 0};
    double B = 0.0;
    double A = 0.0;

    [[nodiscard]] std::string xi() const { return "0"; }
    [[nodiscard]] std::string eta() const {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g*exp(-%.17g*(sq(t - [%.17g, %.17g, %.17g]) + sq(x - [%.17g, %.17g, %.17g])))", c, w, mu[0], mu[1],
                      mu[2], mu[0], mu[1], mu[2]);
        return buf;
    }
};

inline GaussianPair gaussian_pair(std::string name, double c, double w, Vec3 mu = {0, 0, 0}) {
    if (!(w > 0.0)) throw ParameterError("Gaussian width must be positive");
    GaussianPair g{std::move(name), c, w, mu};
    g.B = 4.0 / (3.0 * pi) * std::sqrt(2.0) * std::abs(c) * std::pow(pi / (2.0 * w), 1.5);
    g.A = std::pow(2.0 / pi, 1.25) / 3.0 * std::pow(2.0, 0.375) * std::pow(std::abs(c), 0.75) * std::pow(2.0 * pi / (3.0 * w), 1.5);
    return g;
}

inline std::vector<GaussianPair> gaussian_closed_forms() {
    return {gaussian_pair("unit", 1.0, 1.0), gaussian_pair("scaled", 2.0, 1.0), gaussian_pair("shifted", 1.0, 1.0, {0.5, -0.3, 0.2}),
            gaussian_pair("narrow", 1.0, 2.0)};
}

}  // namespace cusplab::oracles
