#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/homogeneous.hpp"
#include "cusplab/kernellab/quadrature.hpp"

namespace cusplab::discretization {

using kernellab::HomogeneousFunction;
using kernellab::QuadratureRule;

/// Cell-pair averages of Phi(t - x) over congruent box cells:
///   avg(m) = |C|^{-2} * int_{C_0 + m h} int_{C_0} Phi(t - x) dx dt
/// for integer offsets m in [lo, lo + extent). Stored per component.
struct CellAverageTable {
    std::array<long, 3> lo{};
    std::array<std::size_t, 3> extent{};
    std::size_t components = 0;
    std::vector<double> data;  // [component][m0][m1][m2]

    [[nodiscard]] double at(std::size_t c, long m0, long m1, long m2) const {
        const auto i0 = static_cast<std::size_t>(m0 - lo[0]);
        const auto i1 = static_cast<std::size_t>(m1 - lo[1]);
        const auto i2 = static_cast<std::size_t>(m2 - lo[2]);
        return data[((c * extent[0] + i0) * extent[1] + i1) * extent[2] + i2];
    }
};

/// Optional radial factor multiplying Phi (e.g. a smooth truncation); key names it for caching.
struct RadialFactor {
    std::function<double(double)> f;
    std::string key;
};

namespace detail {

// Integral over the normalized box [a, b] (u-units, z = h * u) of
// Phi(h u) * prod_a max(0, 1 - |u_a - m_a|), accumulated into acc.
struct AverageIntegrator {
    const HomogeneousFunction& phi;
    const RadialFactor* radial;
    Vec3 h;
    std::array<double, 3> m;
    const kernellab::GaussLegendre& gl;
    std::vector<double> val;

    AverageIntegrator(const HomogeneousFunction& p, const RadialFactor* r, Vec3 hh, int order)
        : phi(p), radial(r), h(hh), m{}, gl(kernellab::gauss_legendre(order)), val(p.components()) {}

    void point(const std::array<double, 3>& u, double w, std::vector<double>& acc) {
        double tent = 1.0;
        for (std::size_t a = 0; a < 3; ++a) tent *= std::max(0.0, 1.0 - std::abs(u[a] - m[a]));
        if (tent == 0.0) return;
        const double z[3] = {h[0] * u[0], h[1] * u[1], h[2] * u[2]};
        phi.eval_into(z, val);
        double scale = w * tent;
        if (radial) scale *= radial->f(std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]));
        for (std::size_t c = 0; c < val.size(); ++c) acc[c] += scale * val[c];
    }

    void tensor(const std::array<double, 3>& a, const std::array<double, 3>& b, std::vector<double>& acc) {
        const std::size_t q = gl.nodes.size();
        const double vol = (b[0] - a[0]) * (b[1] - a[1]) * (b[2] - a[2]);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j)
                for (std::size_t k = 0; k < q; ++k) {
                    const std::array<double, 3> u{a[0] + (b[0] - a[0]) * gl.nodes[i], a[1] + (b[1] - a[1]) * gl.nodes[j],
                                                  a[2] + (b[2] - a[2]) * gl.nodes[k]};
                    point(u, vol * gl.weights[i] * gl.weights[j] * gl.weights[k], acc);
                }
    }

    // Box [0, len]^3 in v-coordinates with u = sign * v, singular corner at v = 0;
    // split into three pyramids by the dominant coordinate (Duffy).
    void duffy(const std::array<double, 3>& sign, double len, std::vector<double>& acc) {
        const std::size_t q = gl.nodes.size();
        for (std::size_t p = 0; p < 3; ++p) {
            const std::size_t qa = (p + 1) % 3, qb = (p + 2) % 3;
            for (std::size_t i = 0; i < q; ++i) {
                const double rho = len * gl.nodes[i];
                const double wr = len * gl.weights[i] * rho * rho;
                for (std::size_t j = 0; j < q; ++j)
                    for (std::size_t k = 0; k < q; ++k) {
                        std::array<double, 3> v{};
                        v[p] = rho;
                        v[qa] = rho * gl.nodes[j];
                        v[qb] = rho * gl.nodes[k];
                        const std::array<double, 3> u{sign[0] * v[0], sign[1] * v[1], sign[2] * v[2]};
                        point(u, wr * gl.weights[j] * gl.weights[k], acc);
                    }
            }
        }
    }

    // Unit subcube [k, k+1] with its origin corner (if any) handled by Duffy,
    // optionally split into S^3 pieces.
    void subcube(const std::array<long, 3>& k, int S, std::vector<double>& acc) {
        bool corner = true;
        for (long ka : k) corner = corner && (ka == 0 || ka == -1);
        const double len = 1.0 / S;
        for (int i = 0; i < S; ++i)
            for (int j = 0; j < S; ++j)
                for (int l = 0; l < S; ++l) {
                    const int idx[3] = {i, j, l};
                    if (corner) {
                        // piece index counted away from the origin corner
                        bool at_origin = (i == 0 && j == 0 && l == 0);
                        if (at_origin) {
                            const std::array<double, 3> sign{k[0] == 0 ? 1.0 : -1.0, k[1] == 0 ? 1.0 : -1.0, k[2] == 0 ? 1.0 : -1.0};
                            duffy(sign, len, acc);
                            continue;
                        }
                        std::array<double, 3> a{}, b{};
                        for (std::size_t ax = 0; ax < 3; ++ax) {
                            const double s = k[ax] == 0 ? 1.0 : -1.0;
                            const double v0 = idx[ax] * len, v1 = (idx[ax] + 1) * len;
                            a[ax] = std::min(s * v0, s * v1);
                            b[ax] = std::max(s * v0, s * v1);
                        }
                        tensor(a, b, acc);
                    } else {
                        std::array<double, 3> a{}, b{};
                        for (std::size_t ax = 0; ax < 3; ++ax) {
                            a[ax] = static_cast<double>(k[ax]) + idx[ax] * len;
                            b[ax] = a[ax] + len;
                        }
                        tensor(a, b, acc);
                    }
                }
    }

    void offset(const std::array<long, 3>& mm, int oversample, std::vector<double>& acc) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t a = 0; a < 3; ++a) m[a] = static_cast<double>(mm[a]);
        long inf = 0;
        for (long v : mm) inf = std::max(inf, std::abs(v));
        const int S = inf <= 1 || radial ? oversample : 1;  // cutoff transitions need the finer split everywhere
        for (long s0 = -1; s0 <= 0; ++s0)
            for (long s1 = -1; s1 <= 0; ++s1)
                for (long s2 = -1; s2 <= 0; ++s2) subcube({mm[0] + s0, mm[1] + s1, mm[2] + s2}, S, acc);
    }
};

inline std::string table_key(const HomogeneousFunction& phi, const Vec3& h, const std::array<long, 3>& lo,
                             const std::array<std::size_t, 3>& ext, const QuadratureRule& rule, const RadialFactor* radial) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "|%.17g,%.17g,%.17g|%ld,%ld,%ld|%zu,%zu,%zu|%d,%d|", h[0], h[1], h[2], lo[0], lo[1], lo[2], ext[0],
                  ext[1], ext[2], rule.order, rule.oversample);
    return phi.name() + buf + (radial ? radial->key : std::string());
}

}  // namespace detail

/// Exact-to-quadrature cell-pair averages for offsets in [lo, lo + extent).
/// Corners at the singular point use a Duffy split, diagonal-touching pairs
/// (|m|_inf <= 1) are oversampled by rule.oversample per axis. Results are
/// cached per (Phi, h, range, rule).
inline std::shared_ptr<const CellAverageTable> cell_averages(const HomogeneousFunction& phi, const Vec3& h, std::array<long, 3> lo,
                                                             std::array<std::size_t, 3> extent, const QuadratureRule& rule,
                                                             const RadialFactor* radial = nullptr) {
    if (phi.dim() != 3) throw ParameterError("cell averages need a function on R^3");
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const CellAverageTable>> cache;
    const std::string key = detail::table_key(phi, h, lo, extent, rule, radial);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto t = std::make_shared<CellAverageTable>();
    t->lo = lo;
    t->extent = extent;
    t->components = phi.components();
    t->data.assign(t->components * extent[0] * extent[1] * extent[2], 0.0);
    const std::size_t m = t->components;
    auto store = [&](const std::array<long, 3>& mm, const std::vector<double>& acc) {
        for (std::size_t a = 0; a < 3; ++a)
            if (mm[a] < lo[a] || mm[a] >= lo[a] + static_cast<long>(extent[a])) return;
        for (std::size_t c = 0; c < m; ++c) {
            const auto i0 = static_cast<std::size_t>(mm[0] - lo[0]);
            const auto i1 = static_cast<std::size_t>(mm[1] - lo[1]);
            const auto i2 = static_cast<std::size_t>(mm[2] - lo[2]);
            t->data[((c * extent[0] + i0) * extent[1] + i1) * extent[2] + i2] = acc[c];
        }
    };
    if (phi.kind() == HomogeneousFunction::Kind::Constant) {
        std::fill(t->data.begin(), t->data.end(), 1.0);
        if (radial) throw ParameterError("radial factor is not supported for the constant kernel");
    } else {
        detail::AverageIntegrator integ(phi, radial, h, rule.order);
        std::vector<double> acc(m);
        const bool reflective = phi.kind() == HomogeneousFunction::Kind::GradAbs || phi.kind() == HomogeneousFunction::Kind::Abs;
        if (reflective) {
            // Phi(R z) = R Phi(z) for axis reflections R, and the tent weights are even,
            // so one octant determines the table.
            std::array<long, 3> top{};
            for (std::size_t a = 0; a < 3; ++a) top[a] = std::max(std::abs(lo[a]), std::abs(lo[a] + static_cast<long>(extent[a]) - 1));
            std::vector<double> flipped(m);
            for (long m0 = 0; m0 <= top[0]; ++m0)
                for (long m1 = 0; m1 <= top[1]; ++m1)
                    for (long m2 = 0; m2 <= top[2]; ++m2) {
                        const std::array<long, 3> base{m0, m1, m2};
                        bool needed = false;
                        for (int mask = 0; mask < 8 && !needed; ++mask) {
                            std::array<long, 3> mm{(mask & 1) ? -m0 : m0, (mask & 2) ? -m1 : m1, (mask & 4) ? -m2 : m2};
                            bool in = true;
                            for (std::size_t a = 0; a < 3; ++a) in = in && mm[a] >= lo[a] && mm[a] < lo[a] + static_cast<long>(extent[a]);
                            needed = in;
                        }
                        if (!needed) continue;
                        integ.offset(base, rule.oversample, acc);
                        for (int mask = 0; mask < 8; ++mask) {
                            std::array<long, 3> mm{(mask & 1) ? -m0 : m0, (mask & 2) ? -m1 : m1, (mask & 4) ? -m2 : m2};
                            for (std::size_t c = 0; c < m; ++c) {
                                double s = 1.0;
                                if (phi.kind() == HomogeneousFunction::Kind::GradAbs && (mask >> c) & 1) s = -1.0;
                                flipped[c] = s * acc[c];
                            }
                            store(mm, flipped);
                        }
                    }
        } else {
            for (long m0 = lo[0]; m0 < lo[0] + static_cast<long>(extent[0]); ++m0)
                for (long m1 = lo[1]; m1 < lo[1] + static_cast<long>(extent[1]); ++m1)
                    for (long m2 = lo[2]; m2 < lo[2] + static_cast<long>(extent[2]); ++m2) {
                        integ.offset({m0, m1, m2}, rule.oversample, acc);
                        store({m0, m1, m2}, acc);
                    }
        }
    }
    std::lock_guard lock(mu);
    return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace cusplab::discretization
