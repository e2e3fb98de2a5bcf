#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cusplab/kernellab/expression.hpp"

namespace cusplab::kernellab {

/// Axis-aligned bounding box in R^dim.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box cube(std::size_t dim, double lo, double hi) { return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)}; }
    [[nodiscard]] std::size_t dim() const { return lo.size(); }
    [[nodiscard]] bool contains(std::span<const double> z) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (z[i] < lo[i] || z[i] > hi[i]) return false;
        return true;
    }
};

/// Scalar field given by a closed-form expression; gradients are exact
/// (forward-mode differentiation of the expression tree).
class SmoothField {
public:
    SmoothField() = default;

    static SmoothField parse(const std::string& text, Variables vars, std::optional<Box> support = std::nullopt) {
        SmoothField f;
        f.root_ = detail::Parser(text, vars).parse();
        f.text_ = text;
        f.vars_ = std::move(vars);
        f.support_ = std::move(support);
        return f;
    }

    static SmoothField constant(double c, Variables vars) {
        SmoothField f;
        f.root_ = detail::make(detail::Node::Op::Const, {}, c);
        f.text_ = std::to_string(c);
        f.vars_ = std::move(vars);
        return f;
    }

    [[nodiscard]] bool valid() const { return root_ != nullptr; }
    [[nodiscard]] std::size_t dim() const { return vars_.dim(); }
    [[nodiscard]] const std::string& text() const { return text_; }
    [[nodiscard]] const Variables& variables() const { return vars_; }
    [[nodiscard]] const std::optional<Box>& support() const { return support_; }
    [[nodiscard]] bool is_constant() const { return root_ && root_->op == detail::Node::Op::Const; }
    [[nodiscard]] bool is_zero() const { return is_constant() && root_->value == 0.0; }
    /// True for the constant 1 without a support restriction.
    [[nodiscard]] bool is_unit() const { return is_constant() && root_->value == 1.0 && !support_; }

    [[nodiscard]] double value(std::span<const double> z) const {
        if (support_ && !support_->contains(z)) return 0.0;
        if (perm_.empty()) return detail::eval(*root_, z);
        std::vector<double> w(perm_.size());
        for (std::size_t k = 0; k < perm_.size(); ++k) w[k] = z[perm_[k]];
        return detail::eval(*root_, w);
    }

    /// Value and gradient; grad must have size dim().
    double value_and_gradient(std::span<const double> z, std::span<double> grad) const {
        if (support_ && !support_->contains(z)) {
            std::fill(grad.begin(), grad.end(), 0.0);
            return 0.0;
        }
        if (perm_.empty()) return detail::eval_grad(*root_, z, grad);
        std::vector<double> w(perm_.size()), gw(perm_.size());
        for (std::size_t k = 0; k < perm_.size(); ++k) w[k] = z[perm_[k]];
        const double v = detail::eval_grad(*root_, w, gw);
        for (std::size_t k = 0; k < perm_.size(); ++k) grad[perm_[k]] = gw[k];
        return v;
    }

    [[nodiscard]] std::vector<double> gradient(std::span<const double> z) const {
        std::vector<double> g(dim());
        value_and_gradient(z, g);
        return g;
    }

    /// Field g(z) = f(w) with w[k] = z[perm[k]].
    [[nodiscard]] SmoothField permuted(const std::vector<std::size_t>& perm) const {
        SmoothField g = *this;
        if (g.perm_.empty()) {
            g.perm_ = perm;
        } else {
            for (std::size_t k = 0; k < perm.size(); ++k) g.perm_[k] = perm[perm_[k]];
        }
        if (support_) {
            Box b = *support_;
            for (std::size_t k = 0; k < perm.size(); ++k) {
                b.lo[perm[k]] = support_->lo[k];
                b.hi[perm[k]] = support_->hi[k];
            }
            g.support_ = b;
        }
        return g;
    }

private:
    detail::NodePtr root_;
    std::string text_;
    Variables vars_;
    std::optional<Box> support_;
    std::vector<std::size_t> perm_;
};

}  // namespace cusplab::kernellab
