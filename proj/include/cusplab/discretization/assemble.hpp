#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/discretization/cell_average.hpp"
#include "cusplab/discretization/fft.hpp"
#include "cusplab/discretization/grid.hpp"
#include "cusplab/discretization/operator.hpp"
#include "cusplab/kernellab/kernel_field.hpp"

namespace cusplab::discretization {

using kernellab::KernelField;
using kernellab::KernelTerm;

namespace detail {

struct GridPairing {
    Vec3 h;
    std::array<long, 3> shift;  // (left.lo - right.lo) / h
    std::array<long, 3> table_lo;
    std::array<std::size_t, 3> table_extent;
};

inline GridPairing pair_grids(const GridSpec& left, const GridSpec& right) {
    GridPairing p{};
    for (std::size_t a = 0; a < 3; ++a) {
        const double hl = left.h(a), hr = right.h(a);
        if (std::abs(hl - hr) > 1e-12 * hl) throw ParameterError("left and right grids must share the cell size");
        p.h[a] = hl;
        const double s = (left.lo()[a] - right.lo()[a]) / hl;
        const double r = std::round(s);
        if (std::abs(s - r) > 1e-9) throw ParameterError("left and right grids must be aligned to a common lattice");
        p.shift[a] = static_cast<long>(r);
        p.table_lo[a] = -static_cast<long>(right.n()[a]) + 1 + p.shift[a];
        p.table_extent[a] = left.n()[a] + right.n()[a] - 1;
    }
    return p;
}

inline Eigen::VectorXd sample(const kernellab::PointWeight& w, const GridSpec& g) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.cells()));
    for (std::size_t i = 0; i < g.cells(); ++i) v[static_cast<Eigen::Index>(i)] = w ? w(g.center(i)) : 1.0;
    return v;
}

}  // namespace detail

/// Galerkin matrix of the kernel on piecewise-constant orthonormal bases.
/// Entry ((c, i), j) = |C|^{1/2} |C|^{1/2} * average over C_i x C_j of K_c,
/// with the homogeneous factor averaged exactly (to quadrature) and smooth
/// factors taken at cell centers. Rows are component-major.
inline std::shared_ptr<const DenseOperator> assemble_dense(const KernelField& kernel, const GridSpec& left, const GridSpec& right,
                                                           const QuadratureRule& rule = {}, double max_entries = 4e7) {
    const std::size_t nt = left.cells(), nx = right.cells();
    const std::size_t rows = kernel.components() * nt;
    if (static_cast<double>(rows) * static_cast<double>(nx) > max_entries)
        throw ResourceError("dense assembly exceeds the memory bound; use the convolutional path");
    const auto pg = detail::pair_grids(left, right);
    const double cell = std::sqrt(left.cell_volume() * right.cell_volume());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nx));
    std::vector<Vec3> tc(nt), xc(nx);
    std::vector<Index3> ti(nt), xi(nx);
    for (std::size_t i = 0; i < nt; ++i) {
        tc[i] = left.center(i);
        ti[i] = left.unflatten(i);
    }
    for (std::size_t j = 0; j < nx; ++j) {
        xc[j] = right.center(j);
        xi[j] = right.unflatten(j);
    }
    for (const auto& term : kernel.terms()) {
        const auto table = cell_averages(term.phi, pg.h, pg.table_lo, pg.table_extent, rule);
        const Eigen::VectorXd L = detail::sample(term.left, left);
        const Eigen::VectorXd R = detail::sample(term.right, right);
        for (std::size_t i = 0; i < nt; ++i) {
            const double li = term.scale * L[static_cast<Eigen::Index>(i)] * cell;
            if (li == 0.0) continue;
            const auto row = static_cast<Eigen::Index>(term.component * nt + i);
            for (std::size_t j = 0; j < nx; ++j) {
                const double rj = R[static_cast<Eigen::Index>(j)];
                if (rj == 0.0) continue;
                const long m0 = static_cast<long>(ti[i][0]) - static_cast<long>(xi[j][0]) + pg.shift[0];
                const long m1 = static_cast<long>(ti[i][1]) - static_cast<long>(xi[j][1]) + pg.shift[1];
                const long m2 = static_cast<long>(ti[i][2]) - static_cast<long>(xi[j][2]) + pg.shift[2];
                double v = li * rj * table->at(term.phi_component, m0, m1, m2);
                if (term.coupling) v *= term.coupling(tc[i], xc[j]);
                A(row, static_cast<Eigen::Index>(j)) += v;
            }
        }
    }
    return std::make_shared<DenseOperator>(std::move(A), "dense:" + left.id() + "|" + right.id());
}

/// Low-rank factors U V^T of a sampled matrix.
struct CrossApproximation {
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    double residual = 0.0;  // max sampled |entry - approximation| relative to max |entry|
};

/// Adaptive cross approximation with partial pivoting, followed by a
/// residual check on deterministic random samples.
inline CrossApproximation cross_approximation(std::size_t nrows, std::size_t ncols, const std::function<double(std::size_t, std::size_t)>& entry,
                                              double tol, std::size_t max_rank) {
    std::vector<Eigen::VectorXd> us, vs;
    std::vector<char> used(nrows, 0);
    std::size_t pivot_row = 0;
    double frob2 = 0.0;
    std::size_t zero_rows = 0;
    int small_steps = 0;
    while (us.size() < max_rank) {
        used[pivot_row] = 1;
        Eigen::VectorXd row(static_cast<Eigen::Index>(ncols));
        for (std::size_t j = 0; j < ncols; ++j) {
            double v = entry(pivot_row, j);
            for (std::size_t l = 0; l < us.size(); ++l) v -= us[l][static_cast<Eigen::Index>(pivot_row)] * vs[l][static_cast<Eigen::Index>(j)];
            row[static_cast<Eigen::Index>(j)] = v;
        }
        Eigen::Index jstar = 0;
        const double rmax = row.cwiseAbs().maxCoeff(&jstar);
        if (rmax == 0.0) {
            // this row is already reproduced; move to an unused row
            if (++zero_rows > std::min<std::size_t>(nrows, 64)) break;
            auto it = std::find(used.begin(), used.end(), 0);
            if (it == used.end()) break;
            pivot_row = static_cast<std::size_t>(it - used.begin());
            continue;
        }
        Eigen::VectorXd v = row / row[jstar];
        Eigen::VectorXd u(static_cast<Eigen::Index>(nrows));
        for (std::size_t i = 0; i < nrows; ++i) {
            double x = entry(i, static_cast<std::size_t>(jstar));
            for (std::size_t l = 0; l < us.size(); ++l) x -= us[l][static_cast<Eigen::Index>(i)] * vs[l][jstar];
            u[static_cast<Eigen::Index>(i)] = x;
        }
        double cross = 0.0;
        for (std::size_t l = 0; l < us.size(); ++l) cross += us[l].dot(u) * vs[l].dot(v);
        const double uv2 = u.squaredNorm() * v.squaredNorm();
        frob2 += 2.0 * cross + uv2;
        us.push_back(u);
        vs.push_back(v);
        // two consecutive small updates; a single one can be a lucky pivot row
        if (std::sqrt(uv2) <= tol * std::sqrt(std::abs(frob2))) {
            if (++small_steps >= 2) break;
        } else {
            small_steps = 0;
        }
        double best = -1.0;
        for (std::size_t i = 0; i < nrows; ++i)
            if (!used[i] && std::abs(u[static_cast<Eigen::Index>(i)]) > best) {
                best = std::abs(u[static_cast<Eigen::Index>(i)]);
                pivot_row = i;
            }
        if (best < 0.0) break;
    }
    CrossApproximation out;
    out.U.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(us.size()));
    out.V.resize(static_cast<Eigen::Index>(ncols), static_cast<Eigen::Index>(vs.size()));
    for (std::size_t l = 0; l < us.size(); ++l) {
        out.U.col(static_cast<Eigen::Index>(l)) = us[l];
        out.V.col(static_cast<Eigen::Index>(l)) = vs[l];
    }
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> ri(0, nrows - 1), rj(0, ncols - 1);
    double emax = 0.0, dmax = 0.0;
    for (int s = 0; s < 4096; ++s) {
        const std::size_t i = ri(rng), j = rj(rng);
        const double e = entry(i, j);
        const double a = us.empty() ? 0.0 : out.U.row(static_cast<Eigen::Index>(i)).dot(out.V.row(static_cast<Eigen::Index>(j)));
        emax = std::max(emax, std::abs(e));
        dmax = std::max(dmax, std::abs(e - a));
    }
    out.residual = emax > 0 ? dmax / emax : dmax;
    return out;
}

struct ConvolutionOptions {
    double aca_tol = 1e-13;
    std::size_t max_rank = 96;
    double residual_limit = 1e-10;
};

/// Sum of diagonal * Toeplitz * diagonal terms, applied by zero-padded FFT.
/// The Toeplitz generators are the cell-pair average tables, so the operator
/// agrees with assemble_dense up to the separable approximation of couplings.
class ConvolutionalOperator final : public DiscreteOperator {
public:
    using DiscreteOperator::apply;
    using DiscreteOperator::apply_adjoint;

    ConvolutionalOperator(const KernelField& kernel, const GridSpec& left, const GridSpec& right, const QuadratureRule& rule = {},
                          const ConvolutionOptions& opt = {})
        : left_(left), right_(right), components_(kernel.components()) {
        const auto pg = detail::pair_grids(left, right);
        cell_ = std::sqrt(left.cell_volume() * right.cell_volume());
        for (std::size_t a = 0; a < 3; ++a) pad_[a] = fft_friendly(left.n()[a] + right.n()[a] - 1);
        plan_ = std::make_unique<FftPlan3>(pad_);
        std::vector<Vec3> tc(left.cells()), xc(right.cells());
        for (std::size_t i = 0; i < tc.size(); ++i) tc[i] = left.center(i);
        for (std::size_t j = 0; j < xc.size(); ++j) xc[j] = right.center(j);

        for (const auto& term : kernel.terms()) {
            const Eigen::VectorXd L = detail::sample(term.left, left) * term.scale;
            const Eigen::VectorXd R = detail::sample(term.right, right);
            if (L.cwiseAbs().maxCoeff() == 0.0 || R.cwiseAbs().maxCoeff() == 0.0) continue;
            Eigen::MatrixXd U = Eigen::MatrixXd::Ones(L.size(), 1), V = Eigen::MatrixXd::Ones(R.size(), 1);
            if (term.coupling) {
                auto ca = cross_approximation(
                    tc.size(), xc.size(), [&](std::size_t i, std::size_t j) { return term.coupling(tc[i], xc[j]); }, opt.aca_tol, opt.max_rank);
                if (ca.residual > opt.residual_limit)
                    throw ResourceError("separable rank insufficient: cross-approximation residual " + format_sci(ca.residual) +
                                        " at rank " + std::to_string(ca.U.cols()));
                if (ca.U.cols() == 0) continue;
                U = std::move(ca.U);
                V = std::move(ca.V);
            }
            const bool smooth = term.phi.kind() == HomogeneousFunction::Kind::Constant;
            const std::size_t sym = smooth ? 0 : symbol_index(term.phi, term.phi_component, pg, rule);
            for (Eigen::Index r = 0; r < U.cols(); ++r) {
                const std::size_t li = vector_index(left_vecs_, L.cwiseProduct(U.col(r)));
                const std::size_t ri = vector_index(right_vecs_, R.cwiseProduct(V.col(r)));
                if (smooth)
                    dot_terms_.push_back({term.component, li, ri});
                else
                    fft_terms_.push_back({term.component, li, ri, sym});
            }
        }
        for (const auto& t : fft_terms_) {
            if (std::find(forward_rights_.begin(), forward_rights_.end(), t.right) == forward_rights_.end()) forward_rights_.push_back(t.right);
            if (std::find(forward_lefts_.begin(), forward_lefts_.end(), std::make_pair(t.component, t.left)) == forward_lefts_.end())
                forward_lefts_.emplace_back(t.component, t.left);
        }
        id_ = "convolutional:" + left.id() + "|" + right.id();
    }

    [[nodiscard]] std::size_t rows() const override { return components_ * left_.cells(); }
    [[nodiscard]] std::size_t cols() const override { return right_.cells(); }
    [[nodiscard]] OperatorKind kind() const override { return OperatorKind::Convolutional; }
    [[nodiscard]] std::string id() const override { return id_; }
    [[nodiscard]] std::size_t separable_terms() const { return fft_terms_.size() + dot_terms_.size(); }

    void apply(const double* u, double* y) const override {
        const std::size_t nt = left_.cells(), nx = right_.cells();
        std::fill(y, y + rows(), 0.0);
        const Eigen::Map<const Eigen::VectorXd> uv(u, static_cast<Eigen::Index>(nx));
        for (const auto& d : dot_terms_) {
            const double s = cell_ * right_vecs_[d.right].dot(uv);
            Eigen::Map<Eigen::VectorXd>(y + d.component * nt, static_cast<Eigen::Index>(nt)) += s * left_vecs_[d.left];
        }
        if (fft_terms_.empty()) return;
        const std::size_t csize = plan_->complex_size();
        std::vector<FftwBuffer<fftw_complex>> spectra;
        FftwBuffer<double> real(plan_->real_size());
        for (std::size_t r : forward_rights_) {
            std::fill(real.data(), real.data() + real.size(), 0.0);
            for (std::size_t j = 0; j < nx; ++j) real[pad_index(right_, j)] = right_vecs_[r][static_cast<Eigen::Index>(j)] * u[j];
            spectra.emplace_back(csize);
            plan_->forward(real, spectra.back());
        }
        FftwBuffer<fftw_complex> acc(csize);
        const double inv = 1.0 / static_cast<double>(plan_->real_size());
        for (const auto& [comp, l] : forward_lefts_) {
            std::fill(reinterpret_cast<double*>(acc.data()), reinterpret_cast<double*>(acc.data()) + 2 * csize, 0.0);
            for (const auto& t : fft_terms_) {
                if (t.component != comp || t.left != l) continue;
                const auto k = static_cast<std::size_t>(std::find(forward_rights_.begin(), forward_rights_.end(), t.right) - forward_rights_.begin());
                multiply_add(symbols_[t.symbol], spectra[k], acc, false);
            }
            plan_->backward(acc, real);
            double* yc = y + comp * nt;
            for (std::size_t i = 0; i < nt; ++i) yc[i] += left_vecs_[l][static_cast<Eigen::Index>(i)] * real[pad_index(left_, i)] * inv;
        }
    }

    void apply_adjoint(const double* v, double* x) const override {
        const std::size_t nt = left_.cells(), nx = right_.cells();
        std::fill(x, x + nx, 0.0);
        Eigen::Map<Eigen::VectorXd> xv(x, static_cast<Eigen::Index>(nx));
        for (const auto& d : dot_terms_) {
            const double s = cell_ * left_vecs_[d.left].dot(Eigen::Map<const Eigen::VectorXd>(v + d.component * nt, static_cast<Eigen::Index>(nt)));
            xv += s * right_vecs_[d.right];
        }
        if (fft_terms_.empty()) return;
        const std::size_t csize = plan_->complex_size();
        std::vector<FftwBuffer<fftw_complex>> spectra;
        FftwBuffer<double> real(plan_->real_size());
        for (const auto& [comp, l] : forward_lefts_) {
            std::fill(real.data(), real.data() + real.size(), 0.0);
            const double* vc = v + comp * nt;
            for (std::size_t i = 0; i < nt; ++i) real[pad_index(left_, i)] = left_vecs_[l][static_cast<Eigen::Index>(i)] * vc[i];
            spectra.emplace_back(csize);
            plan_->forward(real, spectra.back());
        }
        FftwBuffer<fftw_complex> acc(csize);
        const double inv = 1.0 / static_cast<double>(plan_->real_size());
        for (std::size_t r : forward_rights_) {
            std::fill(reinterpret_cast<double*>(acc.data()), reinterpret_cast<double*>(acc.data()) + 2 * csize, 0.0);
            for (const auto& t : fft_terms_) {
                if (t.right != r) continue;
                const auto k = static_cast<std::size_t>(
                    std::find(forward_lefts_.begin(), forward_lefts_.end(), std::make_pair(t.component, t.left)) - forward_lefts_.begin());
                multiply_add(symbols_[t.symbol], spectra[k], acc, true);
            }
            plan_->backward(acc, real);
            for (std::size_t j = 0; j < nx; ++j) x[j] += right_vecs_[r][static_cast<Eigen::Index>(j)] * real[pad_index(right_, j)] * inv;
        }
    }

private:
    struct FftTerm {
        std::size_t component, left, right, symbol;
    };
    struct DotTerm {
        std::size_t component, left, right;
    };

    static std::size_t vector_index(std::vector<Eigen::VectorXd>& pool, const Eigen::VectorXd& v) {
        for (std::size_t k = 0; k < pool.size(); ++k)
            if (pool[k] == v) return k;
        pool.push_back(v);
        return pool.size() - 1;
    }

    [[nodiscard]] std::size_t pad_index(const GridSpec& g, std::size_t i) const {
        const Index3 c = g.unflatten(i);
        return (c[0] * pad_[1] + c[1]) * pad_[2] + c[2];
    }

    std::size_t symbol_index(const HomogeneousFunction& phi, std::size_t comp, const detail::GridPairing& pg, const QuadratureRule& rule) {
        const std::string key = phi.name() + "#" + std::to_string(comp);
        for (std::size_t k = 0; k < symbol_keys_.size(); ++k)
            if (symbol_keys_[k] == key) return k;
        const auto table = cell_averages(phi, pg.h, pg.table_lo, pg.table_extent, rule);
        // generator g'[(i - j) mod P] = cell * avg(i - j + shift) for i - j in [-(nx-1), nt-1]
        FftwBuffer<double> gen(plan_->real_size());
        std::fill(gen.data(), gen.data() + gen.size(), 0.0);
        const auto& nt = left_.n();
        const auto& nx = right_.n();
        for (long d0 = -static_cast<long>(nx[0]) + 1; d0 < static_cast<long>(nt[0]); ++d0)
            for (long d1 = -static_cast<long>(nx[1]) + 1; d1 < static_cast<long>(nt[1]); ++d1)
                for (long d2 = -static_cast<long>(nx[2]) + 1; d2 < static_cast<long>(nt[2]); ++d2) {
                    const std::size_t p0 = static_cast<std::size_t>((d0 + static_cast<long>(pad_[0])) % static_cast<long>(pad_[0]));
                    const std::size_t p1 = static_cast<std::size_t>((d1 + static_cast<long>(pad_[1])) % static_cast<long>(pad_[1]));
                    const std::size_t p2 = static_cast<std::size_t>((d2 + static_cast<long>(pad_[2])) % static_cast<long>(pad_[2]));
                    gen[(p0 * pad_[1] + p1) * pad_[2] + p2] =
                        cell_ * table->at(comp, d0 + pg.shift[0], d1 + pg.shift[1], d2 + pg.shift[2]);
                }
        FftwBuffer<fftw_complex> hat(plan_->complex_size());
        plan_->forward(gen, hat);
        symbols_.push_back(std::move(hat));
        symbol_keys_.push_back(key);
        return symbols_.size() - 1;
    }

    static void multiply_add(const FftwBuffer<fftw_complex>& s, const FftwBuffer<fftw_complex>& f, FftwBuffer<fftw_complex>& acc, bool conj) {
        const double sg = conj ? -1.0 : 1.0;
        for (std::size_t k = 0; k < acc.size(); ++k) {
            const double a = s[k][0], b = sg * s[k][1];
            acc[k][0] += a * f[k][0] - b * f[k][1];
            acc[k][1] += a * f[k][1] + b * f[k][0];
        }
    }

    GridSpec left_;
    GridSpec right_;
    std::size_t components_;
    double cell_ = 0.0;
    std::array<std::size_t, 3> pad_{};
    std::unique_ptr<FftPlan3> plan_;
    std::vector<Eigen::VectorXd> left_vecs_, right_vecs_;
    std::vector<FftwBuffer<fftw_complex>> symbols_;
    std::vector<std::string> symbol_keys_;
    std::vector<FftTerm> fft_terms_;
    std::vector<DotTerm> dot_terms_;
    std::vector<std::size_t> forward_rights_;
    std::vector<std::pair<std::size_t, std::size_t>> forward_lefts_;
    std::string id_;
};

inline std::shared_ptr<const ConvolutionalOperator> assemble_convolutional(const KernelField& kernel, const GridSpec& left, const GridSpec& right,
                                                                           const QuadratureRule& rule = {}, const ConvolutionOptions& opt = {}) {
    return std::make_shared<ConvolutionalOperator>(kernel, left, right, rule, opt);
}

/// N = 2 model operator on a single grid (reduced point and x share the box).
inline std::shared_ptr<const ConvolutionalOperator> assemble_convolutional(const kernellab::ModelKernelSpec& spec, const GridSpec& grid,
                                                                           const QuadratureRule& rule = {}, const ConvolutionOptions& opt = {}) {
    return assemble_convolutional(kernellab::model_kernel(spec), grid, grid, rule, opt);
}

}  // namespace cusplab::discretization
