#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "cusplab/core.hpp"

namespace cusplab::discretization {

using Index3 = std::array<std::size_t, 3>;

/// Uniform box grid in R^3 with piecewise-constant cell indicators
/// normalized in L^2. Cells are ordered row-major: i = (i0 * n1 + i1) * n2 + i2.
class GridSpec {
public:
    GridSpec(Vec3 lo, Vec3 hi, Index3 n) : lo_(lo), hi_(hi), n_(n) {
        for (std::size_t a = 0; a < 3; ++a) {
            if (n[a] < 2) throw ParameterError("grid needs at least 2 cells per axis");
            if (!(hi[a] > lo[a])) throw ParameterError("grid box must have positive extent");
        }
    }

    /// Cube [lo, hi]^3 with n cells per axis.
    static GridSpec cube(double lo, double hi, std::size_t n) { return {{lo, lo, lo}, {hi, hi, hi}, {n, n, n}}; }

    [[nodiscard]] const Vec3& lo() const { return lo_; }
    [[nodiscard]] const Vec3& hi() const { return hi_; }
    [[nodiscard]] const Index3& n() const { return n_; }
    [[nodiscard]] std::size_t cells() const { return n_[0] * n_[1] * n_[2]; }
    [[nodiscard]] double h(std::size_t a) const { return (hi_[a] - lo_[a]) / static_cast<double>(n_[a]); }
    [[nodiscard]] Vec3 spacing() const { return {h(0), h(1), h(2)}; }
    [[nodiscard]] double cell_volume() const { return h(0) * h(1) * h(2); }

    [[nodiscard]] Index3 unflatten(std::size_t i) const {
        return {i / (n_[1] * n_[2]), (i / n_[2]) % n_[1], i % n_[2]};
    }
    [[nodiscard]] std::size_t flatten(const Index3& c) const { return (c[0] * n_[1] + c[1]) * n_[2] + c[2]; }

    [[nodiscard]] Vec3 center(std::size_t i) const {
        const Index3 c = unflatten(i);
        return {lo_[0] + (c[0] + 0.5) * h(0), lo_[1] + (c[1] + 0.5) * h(1), lo_[2] + (c[2] + 0.5) * h(2)};
    }

    [[nodiscard]] std::string id() const {
        char buf[160];
        std::snprintf(buf, sizeof buf, "box[%g,%g]x[%g,%g]x[%g,%g]_n%zux%zux%zu", lo_[0], hi_[0], lo_[1], hi_[1], lo_[2], hi_[2], n_[0],
                      n_[1], n_[2]);
        return buf;
    }

    bool operator==(const GridSpec&) const = default;

private:
    Vec3 lo_;
    Vec3 hi_;
    Index3 n_;
};

/// Same box, factor times more cells per axis.
inline GridSpec refine(const GridSpec& g, std::size_t factor, std::size_t max_cells = std::size_t{1} << 24) {
    if (factor < 2) throw ParameterError("refinement factor must be an integer >= 2");
    const Index3 n{g.n()[0] * factor, g.n()[1] * factor, g.n()[2] * factor};
    if (n[0] * n[1] * n[2] > max_cells) throw ResourceError("refined grid exceeds the cell budget");
    return {g.lo(), g.hi(), n};
}

}  // namespace cusplab::discretization
