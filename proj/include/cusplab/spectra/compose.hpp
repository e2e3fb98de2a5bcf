#pragma once

#include <Eigen/Dense>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/discretization/operator.hpp"

namespace cusplab::spectra {

using discretization::DiscreteOperator;
using discretization::OperatorKind;
using discretization::OperatorPtr;

/// sum_j ops[j]; all terms share rows and cols.
class SumOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    explicit SumOperator(std::vector<OperatorPtr> ops) : ops_(std::move(ops)) {
        if (ops_.empty()) throw ParameterError("op_sum needs at least one operator");
        for (const auto& o : ops_)
            if (o->rows() != ops_[0]->rows() || o->cols() != ops_[0]->cols()) throw ParameterError("op_sum: dimension mismatch");
    }
    [[nodiscard]] std::size_t rows() const override { return ops_[0]->rows(); }
    [[nodiscard]] std::size_t cols() const override { return ops_[0]->cols(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Composite; }
    [[nodiscard]] std::string id() const override { return join("sum", ops_); }

    void apply(const double* u, double* y) const override {
        Eigen::Map<Eigen::VectorXd> out(y, static_cast<Eigen::Index>(rows()));
        Eigen::VectorXd tmp(out.size());
        out.setZero();
        for (const auto& o : ops_) {
            o->apply(u, tmp.data());
            out += tmp;
        }
    }
    void apply_adjoint(const double* v, double* x) const override {
        Eigen::Map<Eigen::VectorXd> out(x, static_cast<Eigen::Index>(cols()));
        Eigen::VectorXd tmp(out.size());
        out.setZero();
        for (const auto& o : ops_) {
            o->apply_adjoint(v, tmp.data());
            out += tmp;
        }
    }
    void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const override {
        Eigen::MatrixXd tmp;
        Y.setZero(static_cast<Eigen::Index>(rows()), U.cols());
        for (const auto& o : ops_) {
            o->apply_block(U, tmp);
            Y += tmp;
        }
    }
    void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const override {
        Eigen::MatrixXd tmp;
        X.setZero(static_cast<Eigen::Index>(cols()), V.cols());
        for (const auto& o : ops_) {
            o->apply_adjoint_block(V, tmp);
            X += tmp;
        }
    }

    static std::string join(const char* tag, const std::vector<OperatorPtr>& ops) {
        std::string s = std::string(tag) + "(";
        for (std::size_t i = 0; i < ops.size(); ++i) s += (i ? "," : "") + ops[i]->id();
        return s + ")";
    }

private:
    std::vector<OperatorPtr> ops_;
};

/// Vertical stack {T_j}: R^cols -> R^{sum rows_j}.
class StackOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    explicit StackOperator(std::vector<OperatorPtr> ops) : ops_(std::move(ops)) {
        if (ops_.empty()) throw ParameterError("op_stack needs at least one operator");
        for (const auto& o : ops_) {
            if (o->cols() != ops_[0]->cols()) throw ParameterError("op_stack: column mismatch");
            offsets_.push_back(rows_);
            rows_ += o->rows();
        }
    }
    [[nodiscard]] std::size_t rows() const override { return rows_; }
    [[nodiscard]] std::size_t cols() const override { return ops_[0]->cols(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Composite; }
    [[nodiscard]] std::string id() const override { return SumOperator::join("stack", ops_); }

    void apply(const double* u, double* y) const override {
        for (std::size_t j = 0; j < ops_.size(); ++j) ops_[j]->apply(u, y + offsets_[j]);
    }
    void apply_adjoint(const double* v, double* x) const override {
        Eigen::Map<Eigen::VectorXd> out(x, static_cast<Eigen::Index>(cols()));
        Eigen::VectorXd tmp(out.size());
        out.setZero();
        for (std::size_t j = 0; j < ops_.size(); ++j) {
            ops_[j]->apply_adjoint(v + offsets_[j], tmp.data());
            out += tmp;
        }
    }
    void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const override {
        Y.resize(static_cast<Eigen::Index>(rows_), U.cols());
        Eigen::MatrixXd tmp;
        for (std::size_t j = 0; j < ops_.size(); ++j) {
            ops_[j]->apply_block(U, tmp);
            Y.middleRows(static_cast<Eigen::Index>(offsets_[j]), tmp.rows()) = tmp;
        }
    }
    void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const override {
        X.setZero(static_cast<Eigen::Index>(cols()), V.cols());
        Eigen::MatrixXd tmp;
        for (std::size_t j = 0; j < ops_.size(); ++j) {
            ops_[j]->apply_adjoint_block(V.middleRows(static_cast<Eigen::Index>(offsets_[j]), static_cast<Eigen::Index>(ops_[j]->rows())), tmp);
            X += tmp;
        }
    }

private:
    std::vector<OperatorPtr> ops_;
    std::vector<std::size_t> offsets_;
    std::size_t rows_ = 0;
};

/// outer * inner.
class ComposeOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    ComposeOperator(OperatorPtr outer, OperatorPtr inner) : outer_(std::move(outer)), inner_(std::move(inner)) {
        if (outer_->cols() != inner_->rows()) throw ParameterError("op_compose: inner rows must equal outer cols");
    }
    [[nodiscard]] std::size_t rows() const override { return outer_->rows(); }
    [[nodiscard]] std::size_t cols() const override { return inner_->cols(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Composite; }
    [[nodiscard]] std::string id() const override { return "compose(" + outer_->id() + "," + inner_->id() + ")"; }

    void apply(const double* u, double* y) const override {
        Eigen::VectorXd mid(static_cast<Eigen::Index>(inner_->rows()));
        inner_->apply(u, mid.data());
        outer_->apply(mid.data(), y);
    }
    void apply_adjoint(const double* v, double* x) const override {
        Eigen::VectorXd mid(static_cast<Eigen::Index>(outer_->cols()));
        outer_->apply_adjoint(v, mid.data());
        inner_->apply_adjoint(mid.data(), x);
    }
    void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const override {
        Eigen::MatrixXd mid;
        inner_->apply_block(U, mid);
        outer_->apply_block(mid, Y);
    }
    void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const override {
        Eigen::MatrixXd mid;
        outer_->apply_adjoint_block(V, mid);
        inner_->apply_adjoint_block(mid, X);
    }

private:
    OperatorPtr outer_;
    OperatorPtr inner_;
};

class AdjointOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    explicit AdjointOperator(OperatorPtr op) : op_(std::move(op)) {}
    [[nodiscard]] std::size_t rows() const override { return op_->cols(); }
    [[nodiscard]] std::size_t cols() const override { return op_->rows(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Composite; }
    [[nodiscard]] std::string id() const override { return "adjoint(" + op_->id() + ")"; }

    void apply(const double* u, double* y) const override { op_->apply_adjoint(u, y); }
    void apply_adjoint(const double* v, double* x) const override { op_->apply(v, x); }
    void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const override { op_->apply_adjoint_block(U, Y); }
    void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const override { op_->apply_block(V, X); }

private:
    OperatorPtr op_;
};

class ScaledOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    ScaledOperator(OperatorPtr op, double scale) : op_(std::move(op)), scale_(scale) {}
    [[nodiscard]] std::size_t rows() const override { return op_->rows(); }
    [[nodiscard]] std::size_t cols() const override { return op_->cols(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Composite; }
    [[nodiscard]] std::string id() const override { return format_sci(scale_) + "*" + op_->id(); }

    void apply(const double* u, double* y) const override {
        op_->apply(u, y);
        Eigen::Map<Eigen::VectorXd>(y, static_cast<Eigen::Index>(rows())) *= scale_;
    }
    void apply_adjoint(const double* v, double* x) const override {
        op_->apply_adjoint(v, x);
        Eigen::Map<Eigen::VectorXd>(x, static_cast<Eigen::Index>(cols())) *= scale_;
    }

private:
    OperatorPtr op_;
    double scale_;
};

inline OperatorPtr op_sum(std::vector<OperatorPtr> ops) { return std::make_shared<SumOperator>(std::move(ops)); }
inline OperatorPtr op_stack(std::vector<OperatorPtr> ops) { return std::make_shared<StackOperator>(std::move(ops)); }
inline OperatorPtr op_compose(OperatorPtr outer, OperatorPtr inner) { return std::make_shared<ComposeOperator>(std::move(outer), std::move(inner)); }
inline OperatorPtr op_adjoint(OperatorPtr op) { return std::make_shared<AdjointOperator>(std::move(op)); }
inline OperatorPtr op_scale(OperatorPtr op, double s) { return std::make_shared<ScaledOperator>(std::move(op), s); }
/// V* V, positive semidefinite by construction.
inline OperatorPtr op_gram(const OperatorPtr& v) { return op_compose(op_adjoint(v), v); }

}  // namespace cusplab::spectra
