#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/smooth_field.hpp"

namespace cusplab::kernellab {

/// Positively homogeneous map Phi: R^d \ {0} -> R^m, Phi(s x) = s^order Phi(x).
///
/// Built-ins: grad_abs (x/|x|, order 0), abs (|x|, order 1) and constant (1,
/// order 0 but smooth). Custom functions are |x|^order f(x/|x|) with one
/// angular expression per component, written in u1, u2, u3.
class HomogeneousFunction {
public:
    enum class Kind { GradAbs, Abs, Constant, Custom };

    static HomogeneousFunction grad_abs(std::size_t dim = 3) { return {Kind::GradAbs, dim, 0.0, dim}; }
    static HomogeneousFunction abs(std::size_t dim = 3) { return {Kind::Abs, dim, 1.0, 1}; }
    static HomogeneousFunction constant(std::size_t dim = 3) { return {Kind::Constant, dim, 0.0, 1}; }
    static HomogeneousFunction custom(double order, const std::vector<std::string>& angular) {
        if (angular.empty()) throw ParameterError("custom homogeneous function needs at least one component");
        if (!(order > -3.0)) throw ParameterError("homogeneity order must exceed -dim");
        HomogeneousFunction h{Kind::Custom, 3, order, angular.size()};
        const Variables u = Variables::point("u");
        for (const auto& a : angular) h.angular_.push_back(SmoothField::parse(a, u));
        return h;
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] double order() const { return order_; }
    [[nodiscard]] std::size_t components() const { return components_; }
    /// True when the function is bounded near the origin with a jump in direction (order 0 non-constant).
    [[nodiscard]] bool singular_at_origin() const { return kind_ != Kind::Constant && order_ <= 0.0; }

    [[nodiscard]] std::string name() const {
        switch (kind_) {
            case Kind::GradAbs: return "grad_abs";
            case Kind::Abs: return "abs";
            case Kind::Constant: return "constant";
            case Kind::Custom: {
                std::string s = "custom(" + std::to_string(order_);
                for (const auto& a : angular_) s += ";" + a.text();
                return s + ")";
            }
        }
        return {};
    }

    /// Phi(x) written into out (size components()). Throws at x = 0 unless constant.
    void eval_into(std::span<const double> x, std::span<double> out) const {
        if (kind_ == Kind::Constant) {
            out[0] = 1.0;
            return;
        }
        double r2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) r2 += x[i] * x[i];
        if (r2 == 0.0) throw DomainError("homogeneous function evaluated at the origin");
        const double r = std::sqrt(r2);
        switch (kind_) {
            case Kind::GradAbs:
                for (std::size_t i = 0; i < dim_; ++i) out[i] = x[i] / r;
                return;
            case Kind::Abs: out[0] = r; return;
            case Kind::Custom: {
                const double u[3] = {x[0] / r, x[1] / r, x[2] / r};
                const double scale = std::pow(r, order_);
                for (std::size_t c = 0; c < components_; ++c) out[c] = scale * angular_[c].value(u);
                return;
            }
            default: return;
        }
    }

    [[nodiscard]] std::vector<double> eval(std::span<const double> x) const {
        std::vector<double> out(components_);
        eval_into(x, out);
        return out;
    }

private:
    HomogeneousFunction(Kind k, std::size_t d, double a, std::size_t m) : kind_(k), dim_(d), order_(a), components_(m) {
        if (d < 1) throw ParameterError("dimension must be positive");
    }

    Kind kind_;
    std::size_t dim_;
    double order_;
    std::size_t components_;
    std::vector<SmoothField> angular_;
};

}  // namespace cusplab::kernellab
