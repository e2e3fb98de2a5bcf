#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <vector>

#include "cusplab/discretization/cell_average.hpp"
#include "cusplab/discretization/fft.hpp"
#include "cusplab/kernellab/cutoff.hpp"
#include "cusplab/spectra/sequence.hpp"

namespace cusplab::oracles {

using kernellab::HomogeneousFunction;
using spectra::SpectralSequence;

/// Galerkin spectrum of a translation-invariant kernel on the torus of side
/// `side`, discretized by n^3 cell indicators. The circulant matrix is
/// diagonalized by the discrete Fourier transform; the singular value at a
/// lattice frequency is the Euclidean norm of the component symbols.
struct TorusSpectrum {
    std::size_t n = 0;
    double side = 1.0;
    std::vector<double> values;  // descending, n^3 entries

    [[nodiscard]] SpectralSequence sequence(std::string id) const {
        auto s = SpectralSequence::exact(values, std::move(id));
        s.method = "torus";
        return s;
    }
};

namespace detail {

inline TorusSpectrum finish(std::size_t n, double side, std::vector<double> v, double stack) {
    for (auto& x : v) x *= std::sqrt(stack);
    std::sort(v.rbegin(), v.rend());
    return {n, side, std::move(v)};
}

inline long centered(std::size_t p, std::size_t n) {
    const long q = static_cast<long>(p);
    return q <= static_cast<long>(n) / 2 ? q : q - static_cast<long>(n);
}

}  // namespace detail

/// FFT route: cell-pair averages of Phi * K_R (K_R(y) = theta(|y| / R)) are
/// periodized onto the lattice and transformed. `stack` identical copies of
/// the operator scale every singular value by sqrt(stack). The constant
/// kernel is already periodic and is used untruncated.
inline TorusSpectrum torus_symbol_spectrum(const HomogeneousFunction& phi, double radius, std::size_t n, double side = 1.0, double stack = 1.0,
                                           const kernellab::QuadratureRule& rule = {}) {
    if (phi.dim() != 3) throw ParameterError("torus oracle needs a kernel on R^3");
    if (!(phi.order() == 0.0 || phi.order() == 1.0)) throw ParameterError("torus oracle supports kernels of order 0 and 1");
    if (n < 2 || !(side > 0.0)) throw ParameterError("torus oracle needs n >= 2 and side > 0");
    const double h = side / static_cast<double>(n);
    const bool constant = phi.kind() == HomogeneousFunction::Kind::Constant;
    if (!constant && !(radius > 0.0)) throw ParameterError("truncation radius must be positive");
    if (!constant && radius > 0.5 * side - h)
        throw ParameterError("truncation radius " + format_sci(radius) + " wraps around the torus (limit " + format_sci(0.5 * side - h) + ")");

    const std::size_t m = phi.components(), N3 = n * n * n;
    const long lo = -static_cast<long>(n) / 2;
    std::shared_ptr<const discretization::CellAverageTable> table;
    if (constant) {
        table = discretization::cell_averages(phi, {h, h, h}, {lo, lo, lo}, {n, n, n}, rule);
    } else {
        const kernellab::CutoffProfile profile;
        discretization::RadialFactor cut{[profile, radius](double r) { return profile.theta(r / radius); }, "K" + format_sci(radius)};
        table = discretization::cell_averages(phi, {h, h, h}, {lo, lo, lo}, {n, n, n}, rule, &cut);
    }

    discretization::FftwBuffer<fftw_complex> buf(N3);
    fftw_plan plan;
    {
        std::lock_guard lock(discretization::fftw_planner_mutex());
        const int ni = static_cast<int>(n);
        plan = fftw_plan_dft_3d(ni, ni, ni, buf.data(), buf.data(), FFTW_FORWARD, FFTW_ESTIMATE);
    }
    std::vector<double> power(N3, 0.0);
    const double cell = h * h * h;
    for (std::size_t c = 0; c < m; ++c) {
        for (long a = lo; a < lo + static_cast<long>(n); ++a)
            for (long b = lo; b < lo + static_cast<long>(n); ++b)
                for (long d = lo; d < lo + static_cast<long>(n); ++d) {
                    auto wrap = [n](long v) { return static_cast<std::size_t>((v % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n)); };
                    const std::size_t idx = (wrap(a) * n + wrap(b)) * n + wrap(d);
                    buf.data()[idx][0] = cell * table->at(c, a, b, d);
                    buf.data()[idx][1] = 0.0;
                }
        fftw_execute(plan);
        for (std::size_t i = 0; i < N3; ++i) power[i] += buf.data()[i][0] * buf.data()[i][0] + buf.data()[i][1] * buf.data()[i][1];
    }
    {
        std::lock_guard lock(discretization::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (auto& p : power) p = std::sqrt(p);
    return detail::finish(n, side, std::move(power), stack);
}

/// Analytic route: the Fourier coefficients of the periodic kernel are the
/// continuous transform at q in (2 pi / side) Z^3 (zero mean), and cell
/// averaging folds the aliases q + 2 pi j / h with weights prod sinc^2.
/// Transforms: Phi = x/|x| -> -8 pi i q/|q|^4, Phi = |x| -> -8 pi/|q|^4,
/// Phi = 1 -> side^3 at q = 0. Aliases are summed over |j|_inf <= `aliases`.
inline TorusSpectrum torus_symbol_analytic(const HomogeneousFunction& phi, std::size_t n, double side = 1.0, double stack = 1.0, int aliases = 12) {
    using K = HomogeneousFunction::Kind;
    if (phi.kind() != K::GradAbs && phi.kind() != K::Abs && phi.kind() != K::Constant)
        throw ParameterError("analytic torus symbol is available for grad_abs, abs and constant kernels");
    if (n < 2 || !(side > 0.0) || aliases < 0) throw ParameterError("torus oracle needs n >= 2, side > 0, aliases >= 0");
    const std::size_t N3 = n * n * n;
    std::vector<double> v(N3, 0.0);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < N3; ++i) {
        const std::array<long, 3> p{detail::centered(i / (n * n), n), detail::centered(i / n % n, n), detail::centered(i % n, n)};
        if (phi.kind() == K::Constant) {
            v[i] = p == std::array<long, 3>{0, 0, 0} ? side * side * side : 0.0;
            continue;
        }
        if (p == std::array<long, 3>{0, 0, 0}) continue;  // zero mean
        std::array<int, 3> jr{};
        for (std::size_t a = 0; a < 3; ++a) jr[a] = p[a] == 0 ? 0 : aliases;
        double acc[3] = {0, 0, 0};
        for (int j0 = -jr[0]; j0 <= jr[0]; ++j0)
            for (int j1 = -jr[1]; j1 <= jr[1]; ++j1)
                for (int j2 = -jr[2]; j2 <= jr[2]; ++j2) {
                    const int j[3] = {j0, j1, j2};
                    double q[3], w = 1.0, q2 = 0.0;
                    for (std::size_t a = 0; a < 3; ++a) {
                        const double f = static_cast<double>(p[a]) / nd + j[a];  // in units of the lattice frequency n
                        q[a] = 2.0 * pi * nd * f / side;
                        q2 += q[a] * q[a];
                        if (p[a] != 0) {
                            const double s = std::sin(pi * static_cast<double>(p[a]) / nd) / (pi * f);
                            w *= s * s;
                        }
                    }
                    const double base = -8.0 * pi / (q2 * q2) * w;
                    if (phi.kind() == K::GradAbs) {
                        for (std::size_t a = 0; a < 3; ++a) acc[a] += base * q[a];
                    } else {
                        acc[0] += base;
                    }
                }
        v[i] = std::sqrt(acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]);
    }
    return detail::finish(n, side, std::move(v), stack);
}

/// Counting-function constant: median over s in the window of N(s) * s,
/// with N(s) the number of values strictly above s.
inline double counting_constant(const SpectralSequence& seq, std::size_t k_min, std::size_t k_max) {
    if (k_min == 0 || k_max < k_min || k_max > seq.size()) throw ParameterError("counting window out of range");
    std::vector<double> c;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const double s = seq.s(k);
        const auto above = static_cast<double>(std::count_if(seq.values.begin(), seq.values.end(), [s](double v) { return v > s; }));
        c.push_back(above * s);
    }
    std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2), c.end());
    return c[c.size() / 2];
}

}  // namespace cusplab::oracles
