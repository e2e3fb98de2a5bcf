#pragma once

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cusplab/asymptotics/decay.hpp"
#include "cusplab/asymptotics/inequalities.hpp"
#include "cusplab/asymptotics/tail.hpp"

namespace cusplab::asymptotics {

using Json = nlohmann::ordered_json;

/// Tail summary of one operator across a refinement chain.
struct AsymptoticReport {
    std::string operator_id;
    PowerLawFit finest;                  // fit on the finest level
    std::vector<RefinementLevel> trend;  // plateau per level
    std::optional<Extrapolation> extrapolated;
    std::vector<std::string> diagnostics;
};

/// Fits each level over the same window and extrapolates the plateau when at
/// least three levels are present.
inline AsymptoticReport tail_report(const std::vector<std::pair<double, SpectralSequence>>& chain, const TailWindow& w, double plateau_power = 1.0) {
    if (chain.empty()) throw ParameterError("tail report needs at least one spectrum");
    AsymptoticReport r;
    r.operator_id = chain.back().second.operator_id;
    for (const auto& [h, seq] : chain) {
        const PowerLawFit f = fit_power_law(seq, w, plateau_power);
        r.trend.push_back({h, f.plateau});
        if (!f.power_law) r.diagnostics.push_back("h=" + format_sci(h) + ": log-log residual " + format_sci(f.rms_residual) + " above threshold");
        r.finest = f;
    }
    if (chain.size() >= 3) {
        r.extrapolated = richardson(r.trend);
        if (r.extrapolated->order_clamped) r.diagnostics.push_back("extrapolation order clamped to " + format_sci(r.extrapolated->order));
    }
    return r;
}

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const TailWindow& w) { return {{"k_min", w.k_min}, {"k_max", w.k_max}}; }

inline Json to_json(const TailFunctionals& t) {
    return {{"p", t.p}, {"quasi_norm", t.quasi_norm}, {"G", t.G}, {"g", t.g}, {"window", to_json(t.window)}};
}

inline Json to_json(const PowerLawFit& f) {
    return {{"exponent", finite_or_null(f.exponent)}, {"coefficient", f.coefficient}, {"plateau", f.plateau},
            {"rms_residual", f.rms_residual}, {"power_law", f.power_law}, {"window", to_json(f.window)}};
}

inline Json to_json(const Extrapolation& e) {
    Json levels = Json::array();
    for (const auto& l : e.levels) levels.push_back({{"h", l.h}, {"value", l.value}});
    return {{"value", e.value}, {"order", e.order}, {"order_clamped", e.order_clamped}, {"linear_value", e.linear_value}, {"levels", levels}};
}

inline Json to_json(const AsymptoticReport& r) {
    Json trend = Json::array();
    for (const auto& l : r.trend) trend.push_back({{"h", l.h}, {"plateau", l.value}});
    Json j{{"operator", r.operator_id},
           {"exponent", finite_or_null(r.finest.exponent)},
           {"coefficient", r.finest.coefficient},
           {"plateau", r.finest.plateau},
           {"window", to_json(r.finest.window)},
           {"trend", trend}};
    j["extrapolated"] = r.extrapolated ? to_json(*r.extrapolated) : Json(nullptr);
    j["diagnostics"] = r.diagnostics;
    return j;
}

inline Json to_json(const InequalityCheck& c) {
    return {{"name", c.name}, {"asserted", c.asserted}, {"checked", c.checked}, {"violations", c.violations},
            {"witness_k", c.witness_k}, {"max_excess", c.max_excess}, {"pass", !c.asserted || c.violations == 0}};
}

inline Json to_json(const InequalityReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"pass", r.pass()}, {"checks", checks}};
}

inline Json to_json(const DecayReport& r) {
    return {{"l", r.smoothness}, {"d", r.dimension}, {"bound", r.bound}, {"slack", r.slack},
            {"exponent", finite_or_null(r.exponent)}, {"vacuous", r.vacuous}, {"pass", r.pass}};
}

/// Plot-ready (k, k^power s_k) rows.
inline void write_scaled_csv(std::ostream& os, const SpectralSequence& seq, double power = 1.0) {
    os << "k,scaled\n" << std::setprecision(17);
    for (std::size_t k = 1; k <= seq.size(); ++k) os << k << ',' << std::pow(static_cast<double>(k), power) * seq.s(k) << '\n';
}

}  // namespace cusplab::asymptotics
