#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>

#include "cusplab/core.hpp"

namespace cusplab::discretization {

enum class OperatorKind { Dense, Convolutional, Composite };

inline const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::Dense: return "dense";
        case OperatorKind::Convolutional: return "convolutional";
        case OperatorKind::Composite: return "composite";
    }
    return "?";
}

/// Linear map R^cols -> R^rows with its adjoint. Implementations are
/// immutable after construction; apply is safe to call concurrently.
class DiscreteOperator {
public:
    virtual ~DiscreteOperator() = default;

    [[nodiscard]] virtual std::size_t rows() const = 0;
    [[nodiscard]] virtual std::size_t cols() const = 0;
    [[nodiscard]] virtual OperatorKind kind() const = 0;
    [[nodiscard]] virtual std::string id() const = 0;

    /// y = A u; u has cols() entries, y has rows().
    virtual void apply(const double* u, double* y) const = 0;
    /// x = A^T v; v has rows() entries, x has cols().
    virtual void apply_adjoint(const double* v, double* x) const = 0;

    virtual void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const {
        Y.resize(static_cast<Eigen::Index>(rows()), U.cols());
        for (Eigen::Index j = 0; j < U.cols(); ++j) apply(U.col(j).data(), Y.col(j).data());
    }
    virtual void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const {
        X.resize(static_cast<Eigen::Index>(cols()), V.cols());
        for (Eigen::Index j = 0; j < V.cols(); ++j) apply_adjoint(V.col(j).data(), X.col(j).data());
    }

    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
        check(u.size(), cols());
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows()));
        apply(u.data(), y.data());
        return y;
    }
    [[nodiscard]] Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const {
        check(v.size(), rows());
        Eigen::VectorXd x(static_cast<Eigen::Index>(cols()));
        apply_adjoint(v.data(), x.data());
        return x;
    }

private:
    static void check(Eigen::Index got, std::size_t want) {
        if (static_cast<std::size_t>(got) != want) throw ParameterError("vector length does not match operator dimension");
    }
};

using OperatorPtr = std::shared_ptr<const DiscreteOperator>;

class DenseOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    explicit DenseOperator(Eigen::MatrixXd m, std::string id = "dense") : m_(std::move(m)), id_(std::move(id)) {}

    [[nodiscard]] std::size_t rows() const override { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] std::size_t cols() const override { return static_cast<std::size_t>(m_.cols()); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Dense; }
    [[nodiscard]] std::string id() const override { return id_; }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }

    void apply(const double* u, double* y) const override {
        Eigen::Map<Eigen::VectorXd>(y, m_.rows()).noalias() = m_ * Eigen::Map<const Eigen::VectorXd>(u, m_.cols());
    }
    void apply_adjoint(const double* v, double* x) const override {
        Eigen::Map<Eigen::VectorXd>(x, m_.cols()).noalias() = m_.transpose() * Eigen::Map<const Eigen::VectorXd>(v, m_.rows());
    }
    void apply_block(const Eigen::MatrixXd& U, Eigen::MatrixXd& Y) const override { Y.noalias() = m_ * U; }
    void apply_adjoint_block(const Eigen::MatrixXd& V, Eigen::MatrixXd& X) const override { X.noalias() = m_.transpose() * V; }

private:
    Eigen::MatrixXd m_;
    std::string id_;
};

/// Materializes any operator by applying it to the identity.
inline Eigen::MatrixXd to_dense(const DiscreteOperator& op, double max_entries = 4e7) {
    if (static_cast<double>(op.rows()) * static_cast<double>(op.cols()) > max_entries)
        throw ResourceError("operator too large to materialize densely");
    if (const auto* d = dynamic_cast<const DenseOperator*>(&op)) return d->matrix();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(op.cols()));
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        e[j] = 1.0;
        op.apply(e.data(), m.col(j).data());
        e[j] = 0.0;
    }
    return m;
}

}  // namespace cusplab::discretization
