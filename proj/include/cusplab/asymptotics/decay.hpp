#pragma once

#include <algorithm>

#include "cusplab/asymptotics/tail.hpp"

namespace cusplab::asymptotics {

struct DecayReport {
    double smoothness = 0.0;  // l
    double dimension = 3.0;   // d
    double bound = 0.0;       // 1/2 + l/d
    double slack = 0.1;
    double exponent = 0.0;
    bool vacuous = false;     // identically zero tail
    bool pass = false;
};

/// Fitted tail exponent against the smoothness bound 1/2 + l/d. A sequence
/// that vanishes on the window passes vacuously.
inline DecayReport decay_bound_check(const SpectralSequence& seq, double l, double d, const TailWindow& w, double slack = 0.1) {
    if (!(l >= 0.0) || !(d > 0.0)) throw ParameterError("decay check needs l >= 0 and d > 0");
    DecayReport r{l, d, 0.5 + l / d, slack};
    const double top = seq.empty() ? 0.0 : seq.s(1);
    bool zero = top == 0.0;
    if (!zero) {
        zero = true;
        for (std::size_t k = w.k_min; k <= std::min(w.k_max, seq.size()); ++k) zero = zero && seq.s(k) <= seq.tol * top;
    }
    if (zero) {
        r.vacuous = true;
        r.pass = true;
        r.exponent = INFINITY;
        return r;
    }
    r.exponent = fit_power_law(seq, w).exponent;
    r.pass = r.exponent >= r.bound - slack;
    return r;
}

}  // namespace cusplab::asymptotics
