#pragma once

#include <Eigen/SVD>
#include <random>
#include <string>
#include <vector>

#include "cusplab/asymptotics/report.hpp"
#include "cusplab/asymptotics/weights.hpp"
#include "cusplab/oracles/dense.hpp"
#include "cusplab/oracles/finite_difference.hpp"
#include "cusplab/oracles/gaussian.hpp"
#include "cusplab/oracles/torus.hpp"
#include "cusplab/pipeline/setup.hpp"
#include "cusplab/spectra/compose.hpp"

namespace cusplab::pipeline {

using asymptotics::Json;
using spectra::SpectralSequence;

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string summary;  // one line
    Json report;
};

using Chain = std::vector<std::pair<double, SpectralSequence>>;

inline double rel_err(double measured, double expected) { return std::abs(measured - expected) / std::abs(expected); }

/// Singular values on every level of the settings' chain, labelled by h.
inline Chain spectrum_chain(const Settings& s) {
    Chain out;
    for (std::size_t n : s.chain) {
        const auto op = build_operator(s, n);
        auto seq = spectra::singular_values(*op, s.k_for(n), s.solver);
        seq.grid_id = s.grid(n).id();
        out.push_back({(s.hi[0] - s.lo[0]) / static_cast<double>(n), std::move(seq)});
    }
    return out;
}

/// Eigenvalues of V*V on every level.
inline Chain gram_chain(const Settings& s) {
    Chain out;
    for (std::size_t n : s.chain) {
        const auto op = build_operator(s, n);
        auto seq = spectra::eigenvalues_psd(*spectra::op_gram(op), s.k_for(n), s.solver);
        out.push_back({(s.hi[0] - s.lo[0]) / static_cast<double>(n), std::move(seq)});
    }
    return out;
}

namespace fixtures {

inline Settings model(const std::string& phi, double lo, double hi, std::vector<std::size_t> chain) {
    Settings s;
    s.kernel.kind = "model";
    s.kernel.phi = phi;
    s.lo = {lo, lo, lo};
    s.hi = {hi, hi, hi};
    s.kernel.a_support = kernellab::Box{{lo, lo, lo}, {hi, hi, hi}};
    s.chain = std::move(chain);
    return s;
}

inline Settings gaussian_pair(std::vector<std::size_t> chain, double half_width = 1.5) {
    const auto g = oracles::gaussian_closed_forms().front();
    Settings s;
    s.kernel.kind = "pair";
    s.kernel.xi = g.xi();
    s.kernel.eta = g.eta();
    s.lo = {-half_width, -half_width, -half_width};
    s.hi = {half_width, half_width, half_width};
    s.chain = std::move(chain);
    return s;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = N(rng);
    return m;
}

/// Random matrix with prescribed singular values k^{-1/p} (times a scale).
inline Eigen::MatrixXd power_law_matrix(Eigen::Index r, Eigen::Index c, double p, std::mt19937_64& rng) {
    const Eigen::Index m = std::min(r, c);
    Eigen::HouseholderQR<Eigen::MatrixXd> qu(random_matrix(r, m, rng)), qv(random_matrix(c, m, rng));
    const Eigen::MatrixXd U = qu.householderQ() * Eigen::MatrixXd::Identity(r, m);
    const Eigen::MatrixXd V = qv.householderQ() * Eigen::MatrixXd::Identity(c, m);
    Eigen::VectorXd s(m);
    for (Eigen::Index k = 0; k < m; ++k) s[k] = std::pow(static_cast<double>(k + 1), -1.0 / p);
    return U * s.asDiagonal() * V.transpose();
}

inline std::vector<double> svals(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return {};
    const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
    return {s.data(), s.data() + s.size()};
}

}  // namespace fixtures

/// lambda_k(V*V) = s_k(V)^2 over the certified prefix of both sequences.
inline SuiteResult factorization_suite(std::uint64_t seed = 1, double tol = 1e-10) {
    SuiteResult r;
    r.name = "factorization";
    struct Case {
        std::string name;
        OperatorPtr op;
        std::size_t k;
    };
    std::mt19937_64 rng(seed);
    std::vector<Case> cases;
    cases.push_back({"random_40x60", std::make_shared<discretization::DenseOperator>(fixtures::random_matrix(40, 60, rng), "random"), 40});
    {
        auto s = fixtures::gaussian_pair({6});
        cases.push_back({"cusp_gaussian_n6_dense", build_operator(s, 6), 100});
    }
    {
        auto s = fixtures::model("grad_abs", 0.0, 1.0, {8});
        s.assembly = Assembly::Convolutional;
        cases.push_back({"model_grad_abs_n8_matrix_free", build_operator(s, 8), 100});
    }
    {
        auto s = fixtures::gaussian_pair({8});
        s.assembly = Assembly::Convolutional;
        cases.push_back({"cusp_gaussian_n8_matrix_free", build_operator(s, 8), 100});
    }
    r.pass = true;
    double worst = 0.0;
    r.report["cases"] = Json::array();
    for (const auto& c : cases) {
        spectra::SolverOptions opt;
        opt.seed = seed;
        const auto s = spectra::singular_values(*c.op, c.k, opt);
        const auto l = spectra::eigenvalues_psd(*spectra::op_gram(c.op), c.k, opt);
        const std::size_t K = std::min(s.certified, l.certified);
        double err = 0.0;
        for (std::size_t k = 1; k <= K; ++k)
            if (s.s(k) > 0.0) err = std::max(err, rel_err(l.s(k), s.s(k) * s.s(k)));
        const bool ok = K > 0 && err < tol;
        r.pass = r.pass && ok;
        worst = std::max(worst, err);
        r.report["cases"].push_back({{"name", c.name}, {"certified", K}, {"max_rel_error", err}, {"pass", ok}});
    }
    r.report["tolerance"] = tol;
    {
        // full rank, not asserted: the Gram route loses about eps (s_1 / s_k)^2 relative accuracy
        const auto op = build_operator(fixtures::gaussian_pair({6}), 6);
        const auto s = spectra::singular_values(*op, 216, {});
        const auto l = spectra::eigenvalues_psd(*spectra::op_gram(op), 216, {});
        Json tail = Json::array();
        for (std::size_t k : {100, 150, 200, 216})
            tail.push_back({{"k", k}, {"s_k/s_1", s.s(k) / s.s(1)}, {"rel_error", rel_err(l.s(k), s.s(k) * s.s(k))}});
        r.report["full_rank_diagnostic"] = tail;
    }
    r.summary = "max |lambda_k - s_k^2| / s_k^2 = " + format_sci(worst) + " over " + std::to_string(cases.size()) + " fixtures (< " + format_sci(tol) + ")";
    return r;
}

/// (2k), quasi-norm triangle and block-vector bounds on seeded random
/// dense instances (sizes <= 60).
inline SuiteResult inequality_suite(std::uint64_t seed = 2024, std::size_t instances = 200) {
    SuiteResult r;
    r.name = "inequalities";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(5, 60), parts(2, 4);
    std::uniform_real_distribution<double> scale(0.01, 10.0), pw(0.4, 3.0);
    std::size_t violations = 0, diagnostic = 0, checks = 0;
    std::vector<std::string> witnesses;
    auto absorb = [&](const asymptotics::InequalityReport& rep, const std::string& tag) {
        for (const auto& c : rep.checks) {
            checks += c.checked;
            if (!c.asserted) {
                diagnostic += c.violations;
            } else if (c.violations) {
                violations += c.violations;
                if (witnesses.size() < 5) witnesses.push_back(tag + " " + c.name + " k=" + std::to_string(c.witness_k));
            }
        }
    };
    const double ps[] = {0.5, 1.0, 2.0};
    for (std::size_t i = 0; i < instances; ++i) {
        const int rows = dim(rng), cols = dim(rng);
        const Eigen::MatrixXd A = scale(rng) * fixtures::random_matrix(rows, cols, rng);
        Eigen::MatrixXd B;
        switch (i % 4) {
            case 0: B = scale(rng) * fixtures::random_matrix(rows, cols, rng); break;
            case 1: B = fixtures::random_matrix(rows, 3, rng) * fixtures::random_matrix(3, cols, rng); break;
            case 2: B = scale(rng) * fixtures::power_law_matrix(rows, cols, pw(rng), rng); break;
            default: B = Eigen::MatrixXd::Zero(rows, cols); break;
        }
        const auto s1 = fixtures::svals(A), s2 = fixtures::svals(B), s12 = fixtures::svals(A + B);
        const auto w = asymptotics::TailWindow{2, std::max<std::size_t>(2, s12.size() / 2)};
        for (double p : ps) absorb(asymptotics::validate_svalue_inequalities(s1, s2, s12, p, 1e-10, w), "pair " + std::to_string(i));

        const int m = parts(rng);
        const int c = dim(rng);
        std::vector<Eigen::MatrixXd> T;
        Eigen::Index total = 0;
        for (int j = 0; j < m; ++j) {
            const int rj = std::max(1, dim(rng) / m);
            T.push_back(j % 2 ? scale(rng) * fixtures::power_law_matrix(rj, c, pw(rng), rng) : scale(rng) * fixtures::random_matrix(rj, c, rng));
            total += rj;
        }
        Eigen::MatrixXd S(total, c);
        std::vector<std::vector<double>> sp;
        Eigen::Index off = 0;
        for (const auto& t : T) {
            S.middleRows(off, t.rows()) = t;
            off += t.rows();
            sp.push_back(fixtures::svals(t));
        }
        const auto ss = fixtures::svals(S);
        for (double p : ps) absorb(asymptotics::validate_blockvec(ss, sp, p, 1e-10, asymptotics::TailWindow{2, std::max<std::size_t>(2, ss.size() / 2)}), "stack " + std::to_string(i));
    }
    r.pass = violations == 0;
    r.report = {{"instances", 2 * instances}, {"checks", checks}, {"violations", violations}, {"diagnostic_window_violations", diagnostic},
                {"witnesses", witnesses}};
    r.summary = std::to_string(2 * instances) + " instances, " + std::to_string(checks) + " checks, " + std::to_string(violations) +
                " violations (windowed G_p surrogate diagnostics: " + std::to_string(diagnostic) + ")";
    return r;
}

/// Plateau of k s_k extrapolated over the chain against the predicted constant.
/// For a unit-weight grad_abs model on a cube the analytic torus spectrum is run
/// on the same lattices and window and its extrapolated plateau compared too.
inline SuiteResult model_constant_suite(const Settings& s, double torus_tol = 0.10) {
    SuiteResult r;
    r.name = "model-constant";
    const auto w = s.window();
    const auto chain = spectrum_chain(s);
    const auto rep = asymptotics::tail_report(chain, w);
    const double predicted = s.kernel.predicted_coefficient(s.quadrature);
    const double measured = rep.extrapolated ? rep.extrapolated->value : rep.finest.plateau;
    const double err = rel_err(measured, predicted);
    r.pass = err <= s.acceptance_tol;
    r.report = {{"predicted", predicted}, {"measured", measured}, {"relative_error", err}, {"tolerance", s.acceptance_tol}, {"tail", asymptotics::to_json(rep)}};
    r.summary = "extrapolated plateau " + format_sci(measured) + " vs predicted " + format_sci(predicted) + " (rel err " + format_sci(err) +
                ", linear-in-h " + format_sci(rep.extrapolated ? rep.extrapolated->linear_value : measured) + ")";

    const auto& k = s.kernel;
    const double side = s.hi[0] - s.lo[0];
    const bool cube = s.hi[1] - s.lo[1] == side && s.hi[2] - s.lo[2] == side;
    if (k.kind == "model" && k.phi == "grad_abs" && k.a == "1" && k.b == "1" && k.beta == "1" && cube &&
        (!k.a_support || (k.a_support->lo == std::vector<double>(s.lo.begin(), s.lo.end()) && k.a_support->hi == std::vector<double>(s.hi.begin(), s.hi.end())))) {
        std::vector<asymptotics::RefinementLevel> levels;
        Json per_level = Json::array();
        for (std::size_t i = 0; i < s.chain.size(); ++i) {
            const auto t = oracles::torus_symbol_analytic(HomogeneousFunction::grad_abs(), s.chain[i], side, 2.0, 8).sequence("torus");
            const double plateau = asymptotics::fit_power_law(t, w).plateau;
            levels.push_back({chain[i].first, plateau});
            per_level.push_back({{"n", s.chain[i]}, {"torus", plateau}, {"galerkin", rep.trend[i].value}});
        }
        const double torus = levels.size() >= 3 ? asymptotics::richardson(levels).value : levels.back().value;
        const double terr = rel_err(measured, torus);
        r.report["torus"] = {{"extrapolated", torus}, {"relative_difference", terr}, {"tolerance", torus_tol}, {"levels", per_level}};
        r.pass = r.pass && terr <= torus_tol;
        r.summary += "; torus " + format_sci(torus) + " (diff " + format_sci(terr) + ")";
    }
    return r;
}

/// Cusp coefficient of the pair kernel: k s_k plateau vs B and k^2 lambda_k
/// plateau of V*V vs B^2 (tolerance doubled for the squared quantity).
inline SuiteResult cusp_B_suite(const Settings& s, bool with_gram = true) {
    SuiteResult r;
    r.name = "cusp-B";
    const auto w = s.window();
    const double B = s.kernel.predicted_coefficient(s.quadrature);
    const auto rep = asymptotics::tail_report(spectrum_chain(s), w);
    const double measured = rep.extrapolated ? rep.extrapolated->value : rep.finest.plateau;
    const double err = rel_err(measured, B);
    r.pass = err <= s.acceptance_tol;
    r.report = {{"predicted_B", B}, {"measured_B", measured}, {"relative_error", err}, {"tolerance", s.acceptance_tol}, {"tail", asymptotics::to_json(rep)}};
    r.summary = "B measured " + format_sci(measured) + " vs " + format_sci(B) + " (rel err " + format_sci(err) + ", linear-in-h " +
                format_sci(rep.extrapolated ? rep.extrapolated->linear_value : measured) + ")";
    if (with_gram) {
        const double ltol = 2.0 * s.acceptance_tol;
        const auto lrep = asymptotics::tail_report(gram_chain(s), w, 2.0);
        const double lm = lrep.extrapolated ? lrep.extrapolated->value : lrep.finest.plateau;
        const double lerr = rel_err(lm, B * B);
        r.pass = r.pass && lerr <= ltol;
        r.report["lambda"] = {{"predicted", B * B}, {"measured", lm}, {"relative_error", lerr}, {"tolerance", ltol}, {"tail", asymptotics::to_json(lrep)}};
        r.summary += "; k^2 lambda_k " + format_sci(lm) + " vs B^2 " + format_sci(B * B) + " (rel err " + format_sci(lerr) + ")";
    }
    return r;
}

/// Order separation and smoothness bounds: the abs model kernel decays like
/// k^{-4/3}, a Gaussian kernel faster than any power.
inline SuiteResult decay_orders_suite(const Settings& abs_settings, double lo_exp = 1.25, double hi_exp = 1.45, double smooth_exp = 3.0) {
    SuiteResult r;
    r.name = "decay-orders";
    const auto w = abs_settings.window();
    const auto chain = spectrum_chain(abs_settings);
    const auto& fine = chain.back().second;
    const auto fit = asymptotics::fit_power_law(fine, w);
    const std::size_t mid = (w.k_min + w.k_max) / 2;
    const double head = asymptotics::tail_functionals(fine, 1.0, {w.k_min, mid}).G;
    const double tail = asymptotics::tail_functionals(fine, 1.0, {mid, w.k_max}).G;
    const bool abs_ok = fit.exponent >= lo_exp && fit.exponent <= hi_exp && tail < head;
    Json trend = Json::array();
    for (const auto& [h, seq] : chain) trend.push_back({{"h", h}, {"exponent", asymptotics::fit_power_law(seq, w).exponent}});

    // smooth fixture: Gaussian coupling, dense spectrum, window over the values above 1e-10 s_1
    auto sm = fixtures::model("constant", 0.0, 1.0, {10});
    sm.kernel.beta = "exp(-4*sq(t - x))";
    sm.assembly = Assembly::Dense;
    spectra::SolverOptions dense_opt;
    dense_opt.method = spectra::Method::Dense;
    dense_opt.dense_entries = 4e7;
    const auto smooth = spectra::singular_values(*build_operator(sm, 10), 1000, dense_opt);
    std::size_t k_hi = 0;
    for (std::size_t k = 1; k <= smooth.certified; ++k)
        if (smooth.s(k) > 1e-10 * smooth.s(1)) k_hi = k;
    const asymptotics::TailWindow sw{std::max<std::size_t>(1, k_hi / 4), k_hi};
    const auto sfit = asymptotics::fit_power_law(smooth, sw);
    const bool smooth_ok = sfit.exponent > smooth_exp;

    const auto d1 = asymptotics::decay_bound_check(fine, 1, 3, w);
    const auto d2 = asymptotics::decay_bound_check(smooth, 2, 3, sw);
    r.pass = abs_ok && smooth_ok && d1.pass && d2.pass;
    r.report = {{"abs", {{"exponent", fit.exponent}, {"range", {lo_exp, hi_exp}}, {"G_head", head}, {"G_tail", tail}, {"trend", trend}, {"pass", abs_ok}}},
                {"smooth", {{"exponent", sfit.exponent}, {"threshold", smooth_exp}, {"window", asymptotics::to_json(sw)}, {"pass", smooth_ok}}},
                {"bound_l1", asymptotics::to_json(d1)},
                {"bound_l2", asymptotics::to_json(d2)}};
    r.summary = "abs exponent " + format_sci(fit.exponent) + " in [" + format_sci(lo_exp) + ", " + format_sci(hi_exp) + "], k s_k head/tail " +
                format_sci(head) + "/" + format_sci(tail) + "; smooth exponent " + format_sci(sfit.exponent) + " > " + format_sci(smooth_exp);
    return r;
}

/// G_1 surrogate of the model operator with a shrinking weight
/// a_eps = theta(|x| / eps) must fall at least linearly in eps.
inline SuiteResult weighted_trend_suite(std::size_t n = 32, asymptotics::TailWindow w = {15, 60}, double kappa = 1.0) {
    SuiteResult r;
    r.name = "weighted-trend";
    const double eps[] = {0.4, 0.2, 0.1};
    std::vector<double> G, R;
    Json levels = Json::array();
    for (double e : eps) {
        auto s = fixtures::model("grad_abs", -0.5, 0.5, {n});
        char buf[64];
        std::snprintf(buf, sizeof buf, "theta(norm(x)/%.17g)", e);
        s.kernel.a = buf;
        s.kernel.a_support = kernellab::Box::cube(3, -e, e);
        s.assembly = Assembly::Convolutional;
        s.k = w.k_max;
        const auto seq = spectra::singular_values(*build_operator(s, n), w.k_max, s.solver);
        G.push_back(asymptotics::tail_functionals(seq, 1.0, w).G);
        R.push_back(asymptotics::weight_R(s.kernel.model().a, kappa));
        levels.push_back({{"eps", e}, {"G1", G.back()}, {"R_kappa", R.back()}});
    }
    r.pass = true;
    for (std::size_t i = 1; i < G.size(); ++i) r.pass = r.pass && G[i] <= G[i - 1] * eps[i] / eps[i - 1];
    r.report = {{"window", asymptotics::to_json(w)}, {"kappa", kappa}, {"levels", levels}};
    r.summary = "G_1 at eps 0.4/0.2/0.1: " + format_sci(G[0]) + "/" + format_sci(G[1]) + "/" + format_sci(G[2]) + " (ratios " + format_sci(G[1] / G[0]) +
                ", " + format_sci(G[2] / G[1]) + " <= 0.5); R_kappa " + format_sci(R[0]) + "/" + format_sci(R[1]) + "/" + format_sci(R[2]);
    return r;
}

/// Matrix-free vs dense spectra on dense-representable fixtures, and the
/// finite-difference trend of the gradient kernel.
inline SuiteResult oracle_agreement_suite(double tol = 1e-8, std::size_t k = 100) {
    SuiteResult r;
    r.name = "oracle-agreement";
    std::vector<std::pair<std::string, Settings>> cases{{"model_grad_abs_n8", fixtures::model("grad_abs", 0.0, 1.0, {8})},
                                                        {"model_abs_n8", fixtures::model("abs", 0.0, 1.0, {8})},
                                                        {"cusp_gaussian_n8", fixtures::gaussian_pair({8})}};
    double worst = 0.0;
    r.pass = true;
    r.report["spectra"] = Json::array();
    for (auto& [name, s] : cases) {
        s.assembly = Assembly::Convolutional;
        const auto ref = oracles::dense_oracle(s.kernel.field(), s.grid(8), s.grid(8), s.quadrature);
        spectra::SolverOptions opt;
        opt.method = spectra::Method::Lanczos;
        const auto mf = spectra::singular_values(*build_operator(s, 8), k, opt);
        double err = 0.0;
        for (std::size_t i = 1; i <= mf.certified; ++i) err = std::max(err, rel_err(mf.s(i), ref.s(i)));
        const bool ok = mf.certified == k && err < tol;
        r.pass = r.pass && ok;
        worst = std::max(worst, err);
        r.report["spectra"].push_back({{"name", name}, {"certified", mf.certified}, {"max_rel_error", err}, {"pass", ok}});
    }
    const auto fd = oracles::finite_difference_check(
        kernellab::PairExpansion::parse("exp(-sq(t) - 0.5*sq(x))*cos(x1)", "(1 + 0.3*t2*x3)*exp(-sq(t) - sq(x))"), {1e-2, 5e-3, 2.5e-3});
    bool fd_ok = true;
    for (std::size_t i = 0; i < fd.orders.size(); ++i) fd_ok = fd_ok && std::abs(fd.orders[i] - 2.0) < 0.2 && fd.max_rel_error[i + 1] < fd.max_rel_error[i];
    r.pass = r.pass && fd_ok;
    r.report["finite_difference"] = {{"steps", fd.steps}, {"max_rel_error", fd.max_rel_error}, {"orders", fd.orders}, {"pass", fd_ok}};
    r.summary = "matrix-free vs dense max rel " + format_sci(worst) + " (< " + format_sci(tol) + "); FD orders " + format_sci(fd.orders[0]) + ", " +
                format_sci(fd.orders[1]);
    return r;
}

}  // namespace cusplab::pipeline
