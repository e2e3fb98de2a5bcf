#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/cutoff.hpp"
#include "cusplab/kernellab/homogeneous.hpp"
#include "cusplab/kernellab/smooth_field.hpp"

namespace cusplab::kernellab {

using PointWeight = std::function<double(const Vec3&)>;
using PairWeight = std::function<double(const Vec3&, const Vec3&)>;

/// One structured term of a vector kernel on R^3 x R^3:
///   K_component(t, x) += scale * left(t) * Phi_{phi_component}(t - x) * right(x) * coupling(t, x)
/// Empty weights stand for 1.
struct KernelTerm {
    std::size_t component = 0;
    double scale = 1.0;
    HomogeneousFunction phi = HomogeneousFunction::constant();
    std::size_t phi_component = 0;
    PointWeight left;
    PointWeight right;
    PairWeight coupling;
};

struct KernelValue {
    std::vector<double> value;
    bool singular = false;  // t == x hit a direction-undefined term; its contribution is zero
};

/// Vector kernel as a sum of structured terms. The structure is what lets
/// discretization average the singular factor exactly and treat the smooth
/// factors separately.
class KernelField {
public:
    explicit KernelField(std::size_t components = 1) : components_(components) {}

    [[nodiscard]] std::size_t components() const { return components_; }
    [[nodiscard]] const std::vector<KernelTerm>& terms() const { return terms_; }

    KernelField& add(KernelTerm term) {
        if (term.component >= components_) throw ParameterError("kernel term component out of range");
        if (term.phi_component >= term.phi.components()) throw ParameterError("kernel term phi component out of range");
        terms_.push_back(std::move(term));
        return *this;
    }

    /// Multiplies every term by w(x) on the right.
    [[nodiscard]] KernelField with_right_weight(PointWeight w) const {
        KernelField k = *this;
        for (auto& term : k.terms_) {
            if (term.right) {
                term.right = [r = term.right, w](const Vec3& x) { return r(x) * w(x); };
            } else {
                term.right = w;
            }
        }
        return k;
    }

    /// Pointwise value; at t == x direction-undefined factors contribute zero and set the flag.
    [[nodiscard]] KernelValue eval(const Vec3& t, const Vec3& x) const {
        KernelValue out{std::vector<double>(components_, 0.0), false};
        const Vec3 d = t - x;
        const bool diagonal = d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0;
        std::vector<double> phi;
        for (const auto& term : terms_) {
            double v = term.scale;
            if (term.phi.kind() != HomogeneousFunction::Kind::Constant) {
                if (diagonal) {
                    if (term.phi.order() <= 0.0) out.singular = true;
                    continue;  // order > 0 vanishes at the origin
                }
                phi.resize(term.phi.components());
                term.phi.eval_into(d, phi);
                v *= phi[term.phi_component];
            }
            if (term.left) v *= term.left(t);
            if (term.right) v *= term.right(x);
            if (term.coupling) v *= term.coupling(t, x);
            out.value[term.component] += v;
        }
        return out;
    }

private:
    std::size_t components_;
    std::vector<KernelTerm> terms_;
};

/// Smooth pair data (xi, eta) on R^3 x R^3 with variables (t, x); the
/// synthetic wavefunction is psi(t, x) = xi(t, x) + |t - x| eta(t, x).
struct PairExpansion {
    SmoothField xi;
    SmoothField eta;

    static PairExpansion parse(const std::string& xi, const std::string& eta) {
        return {SmoothField::parse(xi, Variables::pair()), SmoothField::parse(eta, Variables::pair())};
    }

    [[nodiscard]] double psi(const Vec3& t, const Vec3& x) const {
        const double z[6] = {t[0], t[1], t[2], x[0], x[1], x[2]};
        return xi.value(z) + norm(t - x) * eta.value(z);
    }

    /// Expansion of psi with the two particles exchanged: (t, x) -> psi(x, t).
    [[nodiscard]] PairExpansion swapped() const {
        const std::vector<std::size_t> perm{3, 4, 5, 0, 1, 2};
        return {xi.permuted(perm), eta.permuted(perm)};
    }
};

namespace detail {

inline double field_at(const SmoothField& f, const Vec3& t, const Vec3& x) {
    const double z[6] = {t[0], t[1], t[2], x[0], x[1], x[2]};
    return f.value(z);
}

inline double field_grad_at(const SmoothField& f, const Vec3& t, const Vec3& x, std::size_t index) {
    const double z[6] = {t[0], t[1], t[2], x[0], x[1], x[2]};
    double g[6];
    f.value_and_gradient(z, g);
    return g[index];
}

}  // namespace detail

/// Gradient in x of psi(t, x):
///   grad_x xi + |t - x| grad_x eta + eta (x - t)/|x - t|
/// as a 3-component structured kernel. With cutoffs, the kernel is multiplied by
/// Q_R(t) Y_delta(t) on the left and K_R(x) on the right.
inline KernelField gradient_kernel(const PairExpansion& pe, const std::optional<CutoffSet>& cuts = std::nullopt) {
    KernelField k(3);
    PointWeight left, right;
    if (cuts) {
        left = [c = *cuts](const Vec3& t) {
            const Vec3 pts[1] = {t};
            return c.box(pts) * c.separation(pts);
        };
        right = [c = *cuts](const Vec3& x) { return c.single_box(x); };
    }
    for (std::size_t c = 0; c < 3; ++c) {
        if (!pe.xi.is_zero()) {
            k.add({c, 1.0, HomogeneousFunction::constant(), 0, left, right,
                   [f = pe.xi, c](const Vec3& t, const Vec3& x) { return detail::field_grad_at(f, t, x, 3 + c); }});
        }
        if (!pe.eta.is_zero()) {
            k.add({c, 1.0, HomogeneousFunction::abs(), 0, left, right,
                   [f = pe.eta, c](const Vec3& t, const Vec3& x) { return detail::field_grad_at(f, t, x, 3 + c); }});
            // d|t - x|/dx_c = (x_c - t_c)/|t - x| = -Phi_c(t - x) for Phi = grad_abs
            k.add({c, -1.0, HomogeneousFunction::grad_abs(), c, left, right,
                   [f = pe.eta](const Vec3& t, const Vec3& x) { return detail::field_at(f, t, x); }});
        }
    }
    return k;
}

/// Separable-weight model kernel data. For N = 2 the fields use variables
/// t (reduced point, the single other particle) and x; for N >= 3 the reduced
/// configuration uses blocks r1..r{N-1}.
struct ModelKernelSpec {
    std::size_t N = 2;
    SmoothField a;                               // on R^3, variable block x
    std::vector<std::vector<SmoothField>> b;     // [j][k], j < N, k < N-1, on R^{3N-3}
    std::vector<std::vector<SmoothField>> beta;  // [j][k] on R^{3N-3} x R^3
    HomogeneousFunction phi = HomogeneousFunction::grad_abs();

    static Variables a_variables() { return Variables::point("x"); }
    [[nodiscard]] Variables b_variables() const { return N == 2 ? Variables::point("t") : Variables::particles(N - 1); }
    [[nodiscard]] Variables beta_variables() const { return N == 2 ? Variables::pair() : Variables::particles(N - 1, true); }

    /// Spec with every b and beta equal to 1.
    static ModelKernelSpec unit_weights(std::size_t N, SmoothField a, HomogeneousFunction phi) {
        ModelKernelSpec s;
        s.N = N;
        s.a = std::move(a);
        s.phi = std::move(phi);
        s.b.assign(N, std::vector<SmoothField>(N - 1, SmoothField::constant(1.0, s.b_variables())));
        s.beta.assign(N, std::vector<SmoothField>(N - 1, SmoothField::constant(1.0, s.beta_variables())));
        return s;
    }

    void validate() const {
        if (N < 2) throw ParameterError("model kernel needs N >= 2");
        if (phi.dim() != 3) throw ParameterError("model kernel Phi must act on R^3");
        if (!a.valid() || a.dim() != 3) throw ParameterError("model weight a must be a field on R^3");
        if (b.size() != N || beta.size() != N) throw ParameterError("model weights b, beta need N rows");
        for (std::size_t j = 0; j < N; ++j) {
            if (b[j].size() != N - 1 || beta[j].size() != N - 1) throw ParameterError("model weights b, beta need N-1 columns");
            for (std::size_t k = 0; k + 1 < N; ++k) {
                if (!b[j][k].valid() || b[j][k].dim() != 3 * (N - 1)) throw ParameterError("model weight b has wrong dimension");
                if (!beta[j][k].valid() || beta[j][k].dim() != 3 * N) throw ParameterError("model weight beta has wrong dimension");
            }
        }
    }
};

/// Pointwise model kernel M(xhat, x) with m*N components for any N; xhat holds N-1 points.
inline KernelValue model_kernel_value(const ModelKernelSpec& s, std::span<const Vec3> xhat, const Vec3& x) {
    const std::size_t m = s.phi.components();
    KernelValue out{std::vector<double>(m * s.N, 0.0), false};
    std::vector<double> zb, zbeta;
    for (const auto& p : xhat) zb.insert(zb.end(), p.begin(), p.end());
    zbeta = zb;
    zbeta.insert(zbeta.end(), x.begin(), x.end());
    const double ax = s.a.value(x);
    std::vector<double> phi(m);
    for (std::size_t j = 0; j < s.N; ++j) {
        for (std::size_t k = 0; k + 1 < s.N; ++k) {
            const Vec3 d = xhat[k] - x;
            if (d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0 && s.phi.kind() != HomogeneousFunction::Kind::Constant) {
                if (s.phi.order() <= 0.0) out.singular = true;
                continue;
            }
            s.phi.eval_into(d, phi);
            const double w = s.b[j][k].value(zb) * ax * s.beta[j][k].value(zbeta);
            for (std::size_t c = 0; c < m; ++c) out.value[j * m + c] += w * phi[c];
        }
    }
    return out;
}

/// Structured model kernel for N = 2 (reduced point t = x_1); 2m components.
inline KernelField model_kernel(const ModelKernelSpec& s) {
    s.validate();
    if (s.N != 2) throw ParameterError("structured model kernels are available for N = 2 only");
    const std::size_t m = s.phi.components();
    KernelField k(2 * m);
    for (std::size_t j = 0; j < 2; ++j) {
        PointWeight left;
        if (!s.b[j][0].is_unit())
            left = [f = s.b[j][0]](const Vec3& t) { return f.value(t); };
        PointWeight right = [f = s.a](const Vec3& x) { return f.value(x); };
        PairWeight coupling;
        if (!s.beta[j][0].is_unit())
            coupling = [f = s.beta[j][0]](const Vec3& t, const Vec3& x) { return detail::field_at(f, t, x); };
        for (std::size_t c = 0; c < m; ++c) k.add({j * m + c, 1.0, s.phi, c, left, right, coupling});
    }
    return k;
}

}  // namespace cusplab::kernellab
