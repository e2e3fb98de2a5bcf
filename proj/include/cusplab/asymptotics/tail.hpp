#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/spectra/sequence.hpp"

namespace cusplab::asymptotics {

using spectra::SpectralSequence;

/// 1-based inclusive index range [k_min, k_max].
struct TailWindow {
    std::size_t k_min = 0;
    std::size_t k_max = 0;
    [[nodiscard]] std::size_t count() const { return k_max >= k_min ? k_max - k_min + 1 : 0; }
};

/// Excludes the discretization-polluted top of the index range: k_max is
/// `fraction` of the rank, k_min is k_max / spread.
inline TailWindow window_policy(std::size_t rank, double fraction = 0.25, double spread = 4.0) {
    if (!(fraction > 0.0 && fraction <= 1.0) || !(spread > 1.0)) throw ParameterError("window policy needs 0 < fraction <= 1 and spread > 1");
    const auto k_max = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rank)));
    const auto k_min = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(k_max) / spread)));
    if (k_max < k_min) throw ParameterError("rank too small for a tail window");
    return {k_min, k_max};
}

struct TailFunctionals {
    double p = 1.0;
    double quasi_norm = 0.0;  // sup over the certified prefix of k^{1/p} s_k
    double G = 0.0;           // (max over the window of k^{1/p} s_k)^p
    double g = 0.0;           // (min over the window of k^{1/p} s_k)^p
    TailWindow window;
};

namespace detail {

inline void check_window(const SpectralSequence& seq, const TailWindow& w) {
    if (w.count() == 0 || w.k_min == 0) throw ParameterError("empty tail window");
    if (w.k_max > seq.certified)
        throw ConvergenceError("tail window ends at k = " + std::to_string(w.k_max) + " but only " + std::to_string(seq.certified) +
                                   " values are certified",
                               seq.certified < seq.residuals.size() ? seq.residuals[seq.certified] : 0.0);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ParameterError("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace detail

inline TailFunctionals tail_functionals(const SpectralSequence& seq, double p, const TailWindow& w) {
    if (!(p > 0.0)) throw ParameterError("tail functionals need p > 0");
    detail::check_window(seq, w);
    TailFunctionals t{p, 0.0, 0.0, 0.0, w};
    for (std::size_t k = 1; k <= seq.certified; ++k) t.quasi_norm = std::max(t.quasi_norm, std::pow(static_cast<double>(k), 1.0 / p) * seq.s(k));
    double hi = 0.0, lo = INFINITY;
    for (std::size_t k = w.k_min; k <= w.k_max; ++k) {
        const double v = std::pow(static_cast<double>(k), 1.0 / p) * seq.s(k);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    t.G = std::pow(hi, p);
    t.g = std::pow(lo, p);
    return t;
}

struct PowerLawFit {
    double exponent = 0.0;      // s_k ~ coefficient * k^{-exponent}
    double coefficient = 0.0;
    double plateau = 0.0;       // median of k^{exponent_ref} s_k over the window
    double rms_residual = 0.0;  // of the log-log fit
    bool power_law = true;      // rms_residual below the diagnostic threshold
    TailWindow window;
};

/// Log-log least squares over the window plus the plateau median of
/// k^{plateau_power} s_k (plateau_power = 1 gives the k s_k statistic).
inline PowerLawFit fit_power_law(const SpectralSequence& seq, const TailWindow& w, double plateau_power = 1.0, double rms_threshold = 0.05) {
    detail::check_window(seq, w);
    if (w.count() < 20) throw ParameterError("power-law fit needs at least 20 points in the window");
    PowerLawFit f;
    f.window = w;
    std::vector<double> x, y, plateau;
    for (std::size_t k = w.k_min; k <= w.k_max; ++k) {
        const double s = seq.s(k);
        plateau.push_back(std::pow(static_cast<double>(k), plateau_power) * s);
        if (s > 0.0) {
            x.push_back(std::log(static_cast<double>(k)));
            y.push_back(std::log(s));
        }
    }
    f.plateau = detail::median(plateau);
    if (x.size() < 2) {
        // identically zero tail: decay faster than any power
        f.exponent = INFINITY;
        f.power_law = false;
        return f;
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - icpt - slope * x[i], 2);
    f.exponent = -slope;
    f.coefficient = std::exp(icpt);
    f.rms_residual = std::sqrt(ss / n);
    f.power_law = f.rms_residual <= rms_threshold;
    return f;
}

/// Value of a discretization-dependent quantity at mesh width h.
struct RefinementLevel {
    double h = 0.0;
    double value = 0.0;
};

struct Extrapolation {
    double value = 0.0;            // generalized: order estimated from the three finest levels
    double order = 1.0;            // estimated convergence order in h
    bool order_clamped = false;    // estimate left [min_order, max_order] or was undetermined
    double linear_value = 0.0;     // least-squares fit value + c h over all levels
    std::vector<RefinementLevel> levels;
};

/// Richardson extrapolation to h -> 0. The order p in value(h) = v + c h^p is
/// solved from the three finest levels and clamped to [min_order, max_order];
/// the linear-in-h least-squares limit is reported alongside.
inline Extrapolation richardson(std::vector<RefinementLevel> levels, double min_order = 0.5, double max_order = 4.0) {
    if (levels.size() < 3) throw ParameterError("Richardson extrapolation needs at least 3 refinement levels");
    std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i].h < levels[i - 1].h) || !(levels[i].h > 0.0)) throw ParameterError("refinement levels need distinct positive h");
    Extrapolation e;
    e.levels = levels;

    double sh = 0, sv = 0, shh = 0, shv = 0;
    for (const auto& l : levels) {
        sh += l.h;
        sv += l.value;
        shh += l.h * l.h;
        shv += l.h * l.value;
    }
    const double n = static_cast<double>(levels.size());
    const double c1 = (n * shv - sh * sv) / (n * shh - sh * sh);
    e.linear_value = (sv - c1 * sh) / n;

    const auto& a = levels[levels.size() - 3];
    const auto& b = levels[levels.size() - 2];
    const auto& c = levels.back();
    auto ratio = [&](double p) { return (std::pow(a.h, p) - std::pow(b.h, p)) / (std::pow(b.h, p) - std::pow(c.h, p)); };
    const double d1 = a.value - b.value, d2 = b.value - c.value;
    double p = 1.0;
    if (d2 != 0.0 && d1 / d2 > 0.0) {
        const double r = d1 / d2;
        double lo = min_order, hi = max_order;
        const double rlo = ratio(lo), rhi = ratio(hi);
        const bool increasing = rhi > rlo;
        if ((increasing && r <= rlo) || (!increasing && r >= rlo)) {
            p = min_order;
            e.order_clamped = true;
        } else if ((increasing && r >= rhi) || (!increasing && r <= rhi)) {
            p = max_order;
            e.order_clamped = true;
        } else {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((ratio(mid) < r) == increasing)
                    lo = mid;
                else
                    hi = mid;
            }
            p = 0.5 * (lo + hi);
        }
    } else {
        e.order_clamped = true;  // non-monotone levels: fall back to first order
    }
    e.order = p;
    e.value = c.value + (c.value - b.value) * std::pow(c.h, p) / (std::pow(b.h, p) - std::pow(c.h, p));
    return e;
}

}  // namespace cusplab::asymptotics
