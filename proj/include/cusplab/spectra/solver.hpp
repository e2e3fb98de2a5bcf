#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>

#include "cusplab/core.hpp"
#include "cusplab/discretization/operator.hpp"
#include "cusplab/spectra/compose.hpp"
#include "cusplab/spectra/sequence.hpp"

namespace cusplab::spectra {

enum class Method { Auto, Dense, Lanczos };

struct SolverOptions {
    double tol = 1e-10;             // residual certification, relative to the top value
    Method method = Method::Auto;
    std::size_t block = 8;
    std::size_t max_basis = 0;      // 0: min(n, 3k + 64)
    std::uint64_t seed = 1;
    double dense_entries = 4e6;     // Auto materializes operators up to this many entries
};

namespace detail {

using BlockMap = std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)>;

struct RitzPairs {
    Eigen::VectorXd theta;     // descending
    Eigen::VectorXd residual;  // Krylov-relation estimate of ||G y - theta y||
    Eigen::MatrixXd basis;     // orthonormal V, n x m
    Eigen::MatrixXd coords;    // Ritz vectors in the basis, m x r
};

inline Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = N(rng);
    return v / v.norm();
}

inline std::size_t basis_cap(std::size_t n, std::size_t k, const SolverOptions& opt) {
    return opt.max_basis ? std::min(std::max(opt.max_basis, k), n) : std::min(n, 3 * k + 64);
}

/// Block Lanczos with full (two-pass classical Gram-Schmidt) reorthogonalization
/// for the top-k eigenpairs of a symmetric PSD map G on R^n. Rank-deficient
/// blocks are refilled with random directions so the basis keeps growing.
/// G is called once per basis block, in basis order.
inline RitzPairs block_lanczos(std::size_t n, std::size_t k, const BlockMap& G, const SolverOptions& opt,
                               const std::function<bool(double theta, double residual, double theta1)>& certified) {
    const auto N = static_cast<Eigen::Index>(n);
    const std::size_t cap = basis_cap(n, k, opt);
    const std::size_t b = std::max<std::size_t>(1, std::min(opt.block, cap));
    std::mt19937_64 rng(opt.seed);

    Eigen::MatrixXd V(N, static_cast<Eigen::Index>(cap));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cap), static_cast<Eigen::Index>(cap));
    Eigen::Index m = 0;

    // Orthonormalizes the columns of W against V[:, :m0] and each other; returns the
    // coefficients of W in the new columns (upper triangular). Projection passes
    // repeat while a pass removes more than half the norm; a column that
    // collapses to rounding level is replaced by a random direction.
    bool refilled = false;
    auto project_out = [&](Eigen::Ref<Eigen::VectorXd> x, const Eigen::MatrixXd& W, Eigen::Index j, Eigen::Index m0,
                           Eigen::Ref<Eigen::VectorXd> coef) {
        if (m0 > 0) x -= V.leftCols(m0) * (V.leftCols(m0).transpose() * x);
        if (j > 0) {
            const Eigen::VectorXd c = W.leftCols(j).transpose() * x;
            x -= W.leftCols(j) * c;
            coef.head(j) += c;
        }
    };
    auto orthonormalize = [&](Eigen::MatrixXd& W, Eigen::Index m0) {
        const Eigen::Index w = W.cols();
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(w, w);
        Eigen::VectorXd scratch(w);
        refilled = false;
        for (Eigen::Index j = 0; j < w; ++j) {
            const double before = W.col(j).norm();
            double prev = before, nrm = before;
            for (int pass = 0; pass < 4; ++pass) {
                project_out(W.col(j), W, j, m0, B.col(j));
                nrm = W.col(j).norm();
                if (nrm > 0.5 * prev) break;
                prev = nrm;
            }
            if (nrm <= 1e-12 * before || nrm == 0.0) {
                Eigen::VectorXd r = random_unit(N, rng);
                for (int pass = 0; pass < 3; ++pass) {
                    scratch.setZero();
                    project_out(r, W, j, m0, scratch);
                }
                W.col(j) = r / r.norm();
                B(j, j) = nrm;
                refilled = true;
            } else {
                W.col(j) /= nrm;
                B(j, j) = nrm;
            }
        }
        return B;
    };

    Eigen::MatrixXd X(N, static_cast<Eigen::Index>(b));
    for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) = random_unit(N, rng);
    orthonormalize(X, 0);

    Eigen::MatrixXd B_last;
    Eigen::Index last_width = 0, last_check = 0;
    RitzPairs out;
    auto extract = [&]() {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m, m));
        const Eigen::Index r = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), m);
        out.theta.resize(r);
        out.residual.resize(r);
        out.coords.resize(m, r);
        for (Eigen::Index i = 0; i < r; ++i) {
            out.theta[i] = es.eigenvalues()[m - 1 - i];
            out.coords.col(i) = es.eigenvectors().col(m - 1 - i);
            // Krylov relation G V = V H + Q B E^T: the residual lives in the last block
            out.residual[i] = m == N ? 0.0 : (B_last * out.coords.col(i).tail(last_width)).norm();
        }
    };
    auto all_certified = [&]() {
        if (out.theta.size() < static_cast<Eigen::Index>(k)) return false;
        for (Eigen::Index i = 0; i < out.theta.size(); ++i)
            if (!certified(out.theta[i], out.residual[i], out.theta[0])) return false;
        return true;
    };

    while (true) {
        const Eigen::Index w = X.cols();
        V.middleCols(m, w) = X;
        Eigen::MatrixXd Zb;
        G(X, Zb);
        const Eigen::MatrixXd C = V.leftCols(m + w).transpose() * Zb;
        H.block(0, m, m + w, w) = C;
        H.block(m, 0, w, m + w) = C.transpose();
        H.block(m, m, w, w) = 0.5 * (C.bottomRows(w) + C.bottomRows(w).transpose());
        m += w;
        if (m == N) {
            B_last = Eigen::MatrixXd::Zero(w, w);
            last_width = w;
            extract();
            break;
        }
        Eigen::MatrixXd W = Zb - V.leftCols(m) * C;
        B_last = orthonormalize(W, m);
        last_width = w;
        const bool full = m >= static_cast<Eigen::Index>(cap);
        const Eigen::Index step = std::max<Eigen::Index>(static_cast<Eigen::Index>(b), m / 8);
        if (m >= static_cast<Eigen::Index>(k) && (full || m - last_check >= step)) {
            last_check = m;
            extract();
            // after a refill the basis spans an invariant subspace and the Ritz
            // residuals cannot see eigenvalues it missed; keep expanding
            if ((all_certified() && !refilled) || full) break;
        }
        const Eigen::Index next = std::min<Eigen::Index>(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(cap) - m);
        X = W.leftCols(next);
    }
    out.basis = V.leftCols(m);
    return out;
}

inline SpectralSequence finish(std::vector<double> values, std::vector<double> residuals, double tol, const char* method, std::string id) {
    SpectralSequence s;
    s.tol = tol;
    s.method = method;
    s.operator_id = std::move(id);
    const double top = values.empty() ? 0.0 : values[0];
    while (s.certified < values.size() && residuals[s.certified] <= tol * top) ++s.certified;
    s.values = std::move(values);
    s.residuals = std::move(residuals);
    return s;
}

inline bool use_dense(const DiscreteOperator& op, const SolverOptions& opt) {
    if (opt.method == Method::Dense) return true;
    if (opt.method == Method::Lanczos) return false;
    if (op.kind() == OperatorKind::Dense) return true;
    return static_cast<double>(op.rows()) * static_cast<double>(op.cols()) <= opt.dense_entries;
}

}  // namespace detail

/// Top-k singular values. Dense path: divide-and-conquer SVD of the
/// materialized matrix (backward-error residual bound). Matrix-free path:
/// block Lanczos on A^T A for the subspace, SVD of A V for the values; the
/// reported residual is ||A^T u - s v|| with u = A v / s (A v = s u exactly).
inline SpectralSequence singular_values(const DiscreteOperator& op, std::size_t k, const SolverOptions& opt = {}) {
    const std::size_t n = std::min(op.rows(), op.cols());
    if (k == 0 || k > n) throw ParameterError("singular_values: need 1 <= k <= min(rows, cols)");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (detail::use_dense(op, opt)) {
        const Eigen::MatrixXd A = discretization::to_dense(op, std::max(opt.dense_entries, 4e7));
        const Eigen::VectorXd s = A.bdcSvd().singularValues();
        std::vector<double> v(s.data(), s.data() + k);
        const double bound = eps * static_cast<double>(std::max(op.rows(), op.cols())) * (s.size() ? s[0] : 0.0);
        return detail::finish(std::move(v), std::vector<double>(k, bound), std::max(opt.tol, 0.0), "dense", op.id());
    }
    // keep A V alongside V: the final extraction uses an SVD of A V rather than
    // the Gram matrix, so small singular values keep full relative accuracy
    const std::size_t cap = detail::basis_cap(op.cols(), k, opt);
    Eigen::MatrixXd AV(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(cap));
    Eigen::Index filled = 0;
    detail::BlockMap gram = [&](const Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
        Eigen::MatrixXd AX;
        op.apply_block(X, AX);
        AV.middleCols(filled, AX.cols()) = AX;
        filled += AX.cols();
        op.apply_adjoint_block(AX, Y);
    };
    auto cert = [&](double theta, double r, double theta1) {
        if (theta1 <= 0.0) return true;
        const double s = std::sqrt(std::max(theta, 0.0));
        return s > 0.0 ? r / s <= opt.tol * std::sqrt(theta1) : r <= opt.tol * theta1;
    };
    const auto rp = detail::block_lanczos(op.cols(), k, gram, opt, cert);
    const Eigen::Index m = rp.basis.cols(), r = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), m);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(AV.leftCols(m));
    const Eigen::Index rq = std::min<Eigen::Index>(m, AV.rows());
    const Eigen::MatrixXd R = qr.matrixQR().topRows(rq).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinV);
    // a wide operator has at most rows() nonzero values; pad with exact zeros
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m, r);
    const Eigen::Index got = std::min(r, svd.singularValues().size());
    sv.head(got) = svd.singularValues().head(got);
    Y.leftCols(got) = svd.matrixV().leftCols(got);
    // residual ||A^T u - s v|| with v = V y, u = A v / s
    Eigen::MatrixXd U = AV.leftCols(m) * Y, AtU;
    for (Eigen::Index i = 0; i < r; ++i)
        if (sv[i] > 0.0) U.col(i) /= sv[i];
    op.apply_adjoint_block(U, AtU);
    const Eigen::MatrixXd Vy = rp.basis * Y;
    std::vector<double> v, res;
    for (Eigen::Index i = 0; i < r; ++i) {
        v.push_back(sv[i]);
        res.push_back(sv[i] > 0.0 ? (AtU.col(i) - sv[i] * Vy.col(i)).norm() : 0.0);
    }
    return detail::finish(std::move(v), std::move(res), opt.tol, "lanczos", op.id());
}

/// Top-k eigenvalues of a PSD operator (e.g. op_gram(V)).
inline SpectralSequence eigenvalues_psd(const DiscreteOperator& op, std::size_t k, const SolverOptions& opt = {}) {
    if (op.rows() != op.cols()) throw ParameterError("eigenvalues_psd: operator must be square");
    if (k == 0 || k > op.rows()) throw ParameterError("eigenvalues_psd: need 1 <= k <= dimension");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (detail::use_dense(op, opt)) {
        Eigen::MatrixXd A = discretization::to_dense(op, std::max(opt.dense_entries, 4e7));
        A = 0.5 * (A + A.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
        const Eigen::Index n = es.eigenvalues().size();
        std::vector<double> v;
        for (std::size_t i = 0; i < k; ++i) v.push_back(std::max(0.0, es.eigenvalues()[n - 1 - static_cast<Eigen::Index>(i)]));
        const double bound = eps * static_cast<double>(n) * (v.empty() ? 0.0 : v[0]);
        return detail::finish(std::move(v), std::vector<double>(k, bound), std::max(opt.tol, 0.0), "dense", op.id());
    }
    detail::BlockMap g = [&](const Eigen::MatrixXd& X, Eigen::MatrixXd& Y) { op.apply_block(X, Y); };
    auto cert = [&](double, double r, double theta1) { return theta1 <= 0.0 || r <= opt.tol * theta1; };
    const auto rp = detail::block_lanczos(op.rows(), k, g, opt, cert);
    const Eigen::MatrixXd Vy = rp.basis * rp.coords;
    Eigen::MatrixXd GVy;
    op.apply_block(Vy, GVy);
    std::vector<double> v, r;
    for (Eigen::Index i = 0; i < rp.theta.size(); ++i) {
        v.push_back(std::max(0.0, rp.theta[i]));
        r.push_back((GVy.col(i) - rp.theta[i] * Vy.col(i)).norm());
    }
    return detail::finish(std::move(v), std::move(r), opt.tol, "lanczos", op.id());
}

}  // namespace cusplab::spectra
