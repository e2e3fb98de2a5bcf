#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cusplab/asymptotics/tail.hpp"

namespace cusplab::asymptotics {

struct InequalityCheck {
    std::string name;
    bool asserted = true;  // false: diagnostic only, never fails the report
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t witness_k = 0;  // first violating index, 0 if none
    double max_excess = 0.0;    // largest lhs - rhs seen (negative when strict)
};

struct InequalityReport {
    std::vector<InequalityCheck> checks;
    [[nodiscard]] bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.asserted || c.violations == 0; });
    }
    [[nodiscard]] const InequalityCheck& find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw ParameterError("no inequality check named " + name);
    }
};

namespace detail {

inline void record(InequalityCheck& c, std::size_t k, double lhs, double rhs, double slack) {
    ++c.checked;
    const double excess = lhs - rhs;
    if (c.checked == 1 || excess > c.max_excess) c.max_excess = excess;
    if (excess > slack) {
        if (c.violations++ == 0) c.witness_k = k;
    }
}

/// sup over k <= K of k^{1/p} s_k.
inline double prefix_quasi_norm(const std::vector<double>& s, std::size_t K, double p) {
    double q = 0.0;
    for (std::size_t k = 1; k <= std::min(K, s.size()); ++k) q = std::max(q, std::pow(static_cast<double>(k), 1.0 / p) * s[k - 1]);
    return q;
}

/// (max over window of k^{1/p} s_k)^p; zero for indices past the end (finite rank).
inline double window_G(const std::vector<double>& s, const TailWindow& w, double p) {
    double hi = 0.0;
    for (std::size_t k = w.k_min; k <= w.k_max && k <= s.size(); ++k) hi = std::max(hi, std::pow(static_cast<double>(k), 1.0 / p) * s[k - 1]);
    return std::pow(hi, p);
}

}  // namespace detail

/// Checks on the spectra of T1, T2 and T1 + T2 (each sorted descending):
///  - "2k": s_{2k}(T1+T2) <= s_{2k-1}(T1+T2) <= s_k(T1) + s_k(T2)
///  - "triangle": ||T1+T2||^{p/(p+1)} <= ||T1||^{p/(p+1)} + ||T2||^{p/(p+1)}
///    with prefix quasi-norms (exact for finite prefixes)
///  - "triangle_G" (diagnostic): the same with windowed G_p surrogates, exponent 1/(p+1)
/// `rel_tol` scales the allowed rounding slack by the top values.
inline InequalityReport validate_svalue_inequalities(const std::vector<double>& s1, const std::vector<double>& s2, const std::vector<double>& s12,
                                                     double p, double rel_tol = 1e-10, std::optional<TailWindow> window = std::nullopt) {
    if (!(p > 0.0)) throw ParameterError("inequality check needs p > 0");
    auto top = [](const std::vector<double>& s) { return s.empty() ? 0.0 : s[0]; };
    const double slack = rel_tol * (top(s1) + top(s2) + top(s12));
    InequalityReport r;

    InequalityCheck two_k{"2k"};
    for (std::size_t k = 1; 2 * k - 1 <= s12.size(); ++k) {
        if (2 * k <= s12.size()) detail::record(two_k, 2 * k, s12[2 * k - 1], s12[2 * k - 2], slack);
        const double a = k <= s1.size() ? s1[k - 1] : 0.0, b = k <= s2.size() ? s2[k - 1] : 0.0;
        if (k <= s1.size() && k <= s2.size()) detail::record(two_k, 2 * k - 1, s12[2 * k - 2], a + b, slack);
    }
    r.checks.push_back(two_k);

    const std::size_t K = std::min({s1.size(), s2.size(), s12.size()});
    const double q = p / (p + 1.0);
    InequalityCheck tri{"triangle"};
    const double n12 = detail::prefix_quasi_norm(s12, K, p), n1 = detail::prefix_quasi_norm(s1, K, p), n2 = detail::prefix_quasi_norm(s2, K, p);
    detail::record(tri, K, std::pow(n12, q), std::pow(n1, q) + std::pow(n2, q), rel_tol * (std::pow(n12, q) + std::pow(n1, q) + std::pow(n2, q)));
    r.checks.push_back(tri);

    if (window) {
        InequalityCheck trig{"triangle_G", false};
        const double e = 1.0 / (p + 1.0);
        const double g12 = std::pow(detail::window_G(s12, *window, p), e);
        const double g1 = std::pow(detail::window_G(s1, *window, p), e), g2 = std::pow(detail::window_G(s2, *window, p), e);
        detail::record(trig, window->k_max, g12, g1 + g2, rel_tol * (g12 + g1 + g2));
        r.checks.push_back(trig);
    }
    return r;
}

/// Block-vector bound for T = {T_j}: ||T||^{2p/(p+2)} <= sum_j ||T_j||^{2p/(p+2)}
/// with prefix quasi-norms ("blockvec", exact); the windowed G_p form is
/// reported as "blockvec_G" (diagnostic) when a window is given.
inline InequalityReport validate_blockvec(const std::vector<double>& stacked, const std::vector<std::vector<double>>& parts, double p,
                                          double rel_tol = 1e-10, std::optional<TailWindow> window = std::nullopt) {
    if (!(p > 0.0)) throw ParameterError("inequality check needs p > 0");
    if (parts.empty()) throw ParameterError("block-vector check needs at least one component");
    std::size_t K = stacked.size();
    for (const auto& s : parts) K = std::min(K, s.size());
    const double e = 2.0 * p / (p + 2.0);
    InequalityReport r;
    InequalityCheck bv{"blockvec"};
    const double lhs = std::pow(detail::prefix_quasi_norm(stacked, K, p), e);
    double rhs = 0.0;
    for (const auto& s : parts) rhs += std::pow(detail::prefix_quasi_norm(s, K, p), e);
    detail::record(bv, K, lhs, rhs, rel_tol * (lhs + rhs));
    r.checks.push_back(bv);
    if (window) {
        InequalityCheck bg{"blockvec_G", false};
        const double ge = 2.0 / (p + 2.0);
        const double gl = std::pow(detail::window_G(stacked, *window, p), ge);
        double gr = 0.0;
        for (const auto& s : parts) gr += std::pow(detail::window_G(s, *window, p), ge);
        detail::record(bg, window->k_max, gl, gr, rel_tol * (gl + gr));
        r.checks.push_back(bg);
    }
    return r;
}

}  // namespace cusplab::asymptotics
