#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cusplab/asymptotics/tail.hpp"
#include "cusplab/discretization/assemble.hpp"
#include "cusplab/kernellab/predictors.hpp"
#include "cusplab/pipeline/config.hpp"
#include "cusplab/spectra/solver.hpp"

namespace cusplab::pipeline {

using discretization::GridSpec;
using discretization::OperatorPtr;
using kernellab::HomogeneousFunction;
using kernellab::SmoothField;
using kernellab::Variables;

enum class Assembly { Auto, Dense, Convolutional };

/// Kernel description from the `kernel.*`, `pair.*` and `model.*` fields.
///   kernel.kind = pair   -> gradient kernel of xi + |t - x| eta   (pair.xi, pair.eta)
///   kernel.kind = model  -> N = 2 model kernel b Phi(t - x) a beta (model.phi, model.a, model.b, model.beta)
struct KernelSpec {
    std::string kind;
    std::string xi, eta;
    std::string phi = "grad_abs";
    std::string a = "1", b = "1", beta = "1";
    std::optional<kernellab::Box> a_support;

    /// Fields that identify the kernel, in canonical order.
    [[nodiscard]] std::string canonical() const {
        std::string s = "kind=" + kind + "\n";
        if (kind == "pair") return s + "xi=" + xi + "\neta=" + eta + "\n";
        s += "phi=" + phi + "\na=" + a + "\nb=" + b + "\nbeta=" + beta + "\n";
        if (a_support) {
            s += "a_support=";
            for (double v : a_support->lo) s += format_sci(v) + ",";
            for (double v : a_support->hi) s += format_sci(v) + ",";
            s += "\n";
        }
        return s;
    }
    [[nodiscard]] std::string id() const { return "k" + Config::fnv1a(canonical()); }

    [[nodiscard]] HomogeneousFunction homogeneous() const {
        if (phi == "grad_abs") return HomogeneousFunction::grad_abs();
        if (phi == "abs") return HomogeneousFunction::abs();
        if (phi == "constant") return HomogeneousFunction::constant();
        throw ConfigError("field 'model.phi' must be grad_abs, abs or constant, got '" + phi + "'");
    }

    [[nodiscard]] kernellab::ModelKernelSpec model() const {
        auto parse = [](const std::string& field, const std::string& text, Variables v, std::optional<kernellab::Box> box = std::nullopt) {
            try {
                return SmoothField::parse(text, std::move(v), std::move(box));
            } catch (const Error& e) {
                throw ConfigError("field '" + field + "': " + e.what());
            }
        };
        auto s = kernellab::ModelKernelSpec::unit_weights(2, parse("model.a", a, Variables::point("x"), a_support), homogeneous());
        s.b[0][0] = s.b[1][0] = parse("model.b", b, s.b_variables());
        s.beta[0][0] = s.beta[1][0] = parse("model.beta", beta, s.beta_variables());
        return s;
    }

    [[nodiscard]] kernellab::PairExpansion pair() const {
        try {
            return kernellab::PairExpansion::parse(xi, eta);
        } catch (const Error& e) {
            throw ConfigError(std::string("fields 'pair.xi'/'pair.eta': ") + e.what());
        }
    }

    [[nodiscard]] kernellab::KernelField field() const { return kind == "pair" ? kernellab::gradient_kernel(pair()) : kernellab::model_kernel(model()); }

    /// Leading coefficient the theory predicts for k s_k (zero for faster decay).
    [[nodiscard]] double predicted_coefficient(const kernellab::QuadratureRule& rule) const {
        return kind == "pair" ? kernellab::predict_B(pair(), rule) : kernellab::predict_model_G1(model(), rule);
    }
};

struct Settings {
    KernelSpec kernel;
    Vec3 lo{0, 0, 0}, hi{1, 1, 1};
    std::vector<std::size_t> chain{12};  // grid points per axis, coarse to fine
    std::size_t k = 0;                   // 0: the window's k_max
    Assembly assembly = Assembly::Auto;
    spectra::SolverOptions solver;
    kernellab::QuadratureRule quadrature;
    double acceptance_tol = 0.15;
    double window_fraction = 0.25;
    double window_spread = 4.0;
    std::string config_hash;

    [[nodiscard]] GridSpec grid(std::size_t n) const { return {lo, hi, {n, n, n}}; }

    /// Window fixed from the coarsest grid so every level shares it.
    [[nodiscard]] asymptotics::TailWindow window() const {
        const std::size_t n = chain.front();
        return asymptotics::window_policy(n * n * n, window_fraction, window_spread);
    }
    [[nodiscard]] std::size_t k_for(std::size_t n) const {
        const std::size_t k_req = k ? k : window().k_max;
        return std::min(k_req, n * n * n);
    }
};

namespace detail {

inline Vec3 corner(const Config& c, const std::string& key, double fallback) {
    if (!c.has(key)) return {fallback, fallback, fallback};
    const auto v = c.reals(key);
    if (v.size() == 1) return {v[0], v[0], v[0]};
    if (v.size() == 3) return {v[0], v[1], v[2]};
    throw ConfigError(c.origin() + ": field '" + key + "' needs 1 or 3 numbers");
}

}  // namespace detail

/// Settings with documented defaults: solver 1e-10, quadrature 1e-6, acceptance 0.15.
inline Settings settings_from(const Config& c) {
    Settings s;
    s.config_hash = c.hash();
    auto& k = s.kernel;
    k.kind = c.str("kernel.kind");
    if (k.kind == "pair") {
        k.xi = c.str("pair.xi", "0");
        k.eta = c.str("pair.eta");
    } else if (k.kind == "model") {
        k.phi = c.str("model.phi", "grad_abs");
        k.a = c.str("model.a", "1");
        k.b = c.str("model.b", "1");
        k.beta = c.str("model.beta", "1");
        if (c.has("model.a_support")) {
            const auto v = c.reals("model.a_support");
            if (v.size() != 6) throw ConfigError(c.origin() + ": field 'model.a_support' needs 6 numbers (lo x3, hi x3)");
            k.a_support = kernellab::Box{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
        }
        (void)k.homogeneous();  // validates model.phi
    } else {
        throw ConfigError(c.origin() + ": field 'kernel.kind' must be pair or model, got '" + k.kind + "'");
    }

    s.lo = detail::corner(c, "grid.lo", 0.0);
    s.hi = detail::corner(c, "grid.hi", 1.0);
    for (std::size_t a = 0; a < 3; ++a)
        if (!(s.hi[a] > s.lo[a])) throw ConfigError(c.origin() + ": grid.hi must exceed grid.lo on every axis");
    if (k.kind == "model" && !k.a_support) k.a_support = kernellab::Box{{s.lo[0], s.lo[1], s.lo[2]}, {s.hi[0], s.hi[1], s.hi[2]}};  // weights live on the grid box
    if (c.has("grid.chain")) {
        s.chain.clear();
        for (double v : c.reals("grid.chain")) {
            if (v < 1 || v != std::floor(v)) throw ConfigError(c.origin() + ": field 'grid.chain' needs positive integers");
            s.chain.push_back(static_cast<std::size_t>(v));
        }
    } else if (c.has("grid.n")) {
        const long n = c.integer("grid.n");
        if (n < 1) throw ConfigError(c.origin() + ": field 'grid.n' must be positive");
        s.chain = {static_cast<std::size_t>(n)};
    }
    for (std::size_t i = 1; i < s.chain.size(); ++i)
        if (s.chain[i] <= s.chain[i - 1]) throw ConfigError(c.origin() + ": field 'grid.chain' must increase");

    const std::string assembly = c.str("grid.assembly", "auto");
    if (assembly == "auto")
        s.assembly = Assembly::Auto;
    else if (assembly == "dense")
        s.assembly = Assembly::Dense;
    else if (assembly == "convolutional")
        s.assembly = Assembly::Convolutional;
    else
        throw ConfigError(c.origin() + ": field 'grid.assembly' must be auto, dense or convolutional");

    const long kk = c.integer("solver.k", 0);
    if (kk < 0) throw ConfigError(c.origin() + ": field 'solver.k' must be non-negative");
    s.k = static_cast<std::size_t>(kk);
    s.solver.tol = c.real("solver.tol", 1e-10);
    const std::string method = c.str("solver.method", "auto");
    if (method == "auto")
        s.solver.method = spectra::Method::Auto;
    else if (method == "dense")
        s.solver.method = spectra::Method::Dense;
    else if (method == "lanczos")
        s.solver.method = spectra::Method::Lanczos;
    else
        throw ConfigError(c.origin() + ": field 'solver.method' must be auto, dense or lanczos");
    s.solver.block = static_cast<std::size_t>(std::max(1L, c.integer("solver.block", 8)));
    s.solver.max_basis = static_cast<std::size_t>(std::max(0L, c.integer("solver.max_basis", 0)));
    s.solver.seed = static_cast<std::uint64_t>(c.integer("solver.seed", 1));
    s.quadrature.tol = c.real("quadrature.tol", 1e-6);
    s.quadrature.order = static_cast<int>(c.integer("quadrature.order", 6));
    s.quadrature.oversample = static_cast<int>(c.integer("quadrature.oversample", 4));
    s.acceptance_tol = c.real("acceptance.tol", 0.15);
    s.window_fraction = c.real("window.fraction", 0.25);
    s.window_spread = c.real("window.spread", 4.0);
    if (!(s.solver.tol > 0.0) || !(s.quadrature.tol > 0.0) || !(s.acceptance_tol > 0.0))
        throw ConfigError(c.origin() + ": tolerances must be positive");

    if (auto extra = c.unused(); !extra.empty()) throw ConfigError(c.origin() + ": unknown field '" + extra.front() + "'");
    return s;
}

/// Galerkin operator on the n^3 grid of the settings' box.
inline OperatorPtr build_operator(const Settings& s, std::size_t n) {
    const GridSpec g = s.grid(n);
    const auto field = s.kernel.field();
    const double entries = static_cast<double>(field.components() * g.cells()) * static_cast<double>(g.cells());
    const bool dense = s.assembly == Assembly::Dense || (s.assembly == Assembly::Auto && entries <= s.solver.dense_entries);
    if (dense) return discretization::assemble_dense(field, g, g, s.quadrature);
    return discretization::assemble_convolutional(field, g, g, s.quadrature);
}

}  // namespace cusplab::pipeline
