#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <sstream>

#include "cusplab/asymptotics/report.hpp"
#include "cusplab/asymptotics/weights.hpp"
#include "cusplab/discretization/assemble.hpp"
#include "cusplab/spectra/solver.hpp"

using namespace cusplab;
using namespace cusplab::asymptotics;
using kernellab::HomogeneousFunction;
using kernellab::Variables;

namespace {

SpectralSequence power_law(double c, double exponent, std::size_t n) {
    std::vector<double> v;
    for (std::size_t k = 1; k <= n; ++k) v.push_back(c * std::pow(static_cast<double>(k), -exponent));
    return SpectralSequence::exact(v);
}

std::vector<double> svals(const Eigen::MatrixXd& m) {
    Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
    return {s.data(), s.data() + s.size()};
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = N(rng);
    return m;
}

SmoothField box_field(const std::string& expr, double lo0, double hi0, double lo = 0.0, double hi = 1.0) {
    return SmoothField::parse(expr, Variables::point("x"), Box{{lo0, lo, lo}, {hi0, hi, hi}});
}

}  // namespace

TEST(TailFunctionals, ExactHarmonicSequence) {
    const auto s = power_law(1.0, 1.0, 400);
    const auto t = tail_functionals(s, 1.0, {25, 100});
    EXPECT_NEAR(t.quasi_norm, 1.0, 1e-14);
    EXPECT_NEAR(t.G, 1.0, 1e-14);
    EXPECT_NEAR(t.g, 1.0, 1e-14);
}

TEST(TailFunctionals, PowerLawRecoversConstant) {
    const auto s = power_law(3.0, 0.5, 400);
    const auto t = tail_functionals(s, 2.0, {50, 200});
    EXPECT_NEAR(t.G, 9.0, 1e-12);
    EXPECT_NEAR(t.g, 9.0, 1e-12);
    EXPECT_NEAR(t.quasi_norm, 3.0, 1e-12);
}

TEST(TailFunctionals, SupercriticalDecayVanishes) {
    const auto s = power_law(1.0, 4.0 / 3.0, 20000);
    double prev = INFINITY;
    for (std::size_t kmax : {100u, 1000u, 10000u}) {
        const double G = tail_functionals(s, 1.0, {kmax / 4, kmax}).G;
        EXPECT_LT(G, prev);
        prev = G;
    }
    EXPECT_LT(prev, 0.2);
}

TEST(TailFunctionals, OrderedOnRandomSequences) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(300);
        for (auto& x : v) x = U(rng) * 5.0 / (1.0 + 0.01 * trial);
        const auto s = SpectralSequence::exact(v);
        for (double p : {0.5, 1.0, 2.0}) {
            const auto t = tail_functionals(s, p, window_policy(s.size()));
            EXPECT_LE(t.g, t.G);
            EXPECT_LE(t.G, std::pow(t.quasi_norm, p) * (1 + 1e-14));
        }
    }
}

TEST(TailFunctionals, WindowErrors) {
    auto s = power_law(1.0, 1.0, 100);
    EXPECT_THROW(tail_functionals(s, 1.0, {10, 5}), ParameterError);
    s.certified = 50;
    EXPECT_THROW(tail_functionals(s, 1.0, {20, 80}), ConvergenceError);
    EXPECT_NO_THROW(tail_functionals(s, 1.0, {20, 50}));
}

TEST(WindowPolicy, QuarterOfRank) {
    const auto w = window_policy(1728);
    EXPECT_EQ(w.k_max, 432u);
    EXPECT_EQ(w.k_min, 108u);
    EXPECT_THROW(window_policy(2), ParameterError);
}

TEST(FitPowerLaw, HarmonicTimesTwo) {
    const auto f = fit_power_law(power_law(2.0, 1.0, 500), {30, 120});
    EXPECT_NEAR(f.exponent, 1.0, 1e-3);
    EXPECT_NEAR(f.coefficient, 2.0, 2e-3);
    EXPECT_NEAR(f.plateau, 2.0, 1e-12);
    EXPECT_TRUE(f.power_law);
}

TEST(FitPowerLaw, CurvedTailFlagged) {
    std::vector<double> v;
    for (int k = 1; k <= 400; ++k) v.push_back(std::exp(-0.05 * k));
    const auto f = fit_power_law(SpectralSequence::exact(v), {20, 400});
    EXPECT_FALSE(f.power_law);
    EXPECT_GT(f.exponent, 3.0);
}

TEST(FitPowerLaw, NeedsTwentyPoints) {
    EXPECT_THROW(fit_power_law(power_law(1, 1, 100), {10, 20}), ParameterError);
}

TEST(FitPowerLaw, ZeroTailIsInfinitelyFast) {
    const auto f = fit_power_law(SpectralSequence::exact(std::vector<double>(100, 0.0)), {10, 60});
    EXPECT_TRUE(std::isinf(f.exponent));
    EXPECT_EQ(f.plateau, 0.0);
}

TEST(Richardson, RecoversFirstOrderLimit) {
    std::vector<RefinementLevel> lv;
    for (double h : {1.0 / 12, 1.0 / 16, 1.0 / 24}) lv.push_back({h, 0.6 - 1.3 * h});
    const auto e = richardson(lv);
    EXPECT_NEAR(e.value, 0.6, 1e-12);
    EXPECT_NEAR(e.order, 1.0, 1e-9);
    EXPECT_NEAR(e.linear_value, 0.6, 1e-12);
    EXPECT_FALSE(e.order_clamped);
}

TEST(Richardson, RecoversSecondOrderLimit) {
    std::vector<RefinementLevel> lv;
    for (double h : {0.1, 0.05, 0.025}) lv.push_back({h, 2.0 + 5.0 * h * h});
    const auto e = richardson(lv);
    EXPECT_NEAR(e.value, 2.0, 1e-10);
    EXPECT_NEAR(e.order, 2.0, 1e-8);
    EXPECT_LT(e.linear_value, 2.0 - 1e-3);  // first-order fit undershoots on convex data
}

TEST(Richardson, NonMonotoneFallsBackToFirstOrder) {
    const auto e = richardson({{0.1, 1.0}, {0.05, 1.1}, {0.025, 1.05}});
    EXPECT_TRUE(e.order_clamped);
    EXPECT_DOUBLE_EQ(e.order, 1.0);
    EXPECT_NEAR(e.value, 1.0, 1e-12);
}

TEST(Richardson, Errors) {
    EXPECT_THROW(richardson({{0.1, 1}, {0.05, 1}}), ParameterError);
    EXPECT_THROW(richardson({{0.1, 1}, {0.1, 1}, {0.05, 1}}), ParameterError);
}

TEST(Inequalities, ZeroSecondOperatorCollapses) {
    std::mt19937_64 rng(3);
    const auto s1 = svals(random_matrix(30, 30, rng));
    const std::vector<double> zero(30, 0.0);
    const auto r = validate_svalue_inequalities(s1, zero, s1, 1.0);
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.find("2k").violations, 0u);
    EXPECT_NEAR(r.find("triangle").max_excess, 0.0, 1e-12);
}

TEST(Inequalities, RandomPairsHaveNoViolations) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> scale(0.01, 10.0);
    const TailWindow w{4, 16};
    std::size_t diag_violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd A = scale(rng) * random_matrix(30, 30, rng);
        Eigen::MatrixXd B = scale(rng) * random_matrix(30, 30, rng);
        if (trial % 4 == 0) B = B.leftCols(5) * random_matrix(5, 30, rng);  // low rank
        for (double p : {0.5, 1.0, 2.0}) {
            const auto r = validate_svalue_inequalities(svals(A), svals(B), svals(A + B), p, 1e-10, w);
            ASSERT_TRUE(r.pass()) << "trial " << trial << " p " << p;
            diag_violations += r.find("triangle_G").violations;
        }
    }
    std::cout << "windowed triangle diagnostic violations: " << diag_violations << '\n';
}

TEST(Inequalities, PlantedViolationIsReported) {
    std::vector<double> s1{1.0, 0.5, 0.1}, s2{1.0, 0.5, 0.1}, s12{3.0, 2.5, 0.1};
    const auto r = validate_svalue_inequalities(s1, s2, s12, 1.0);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.find("2k").witness_k, 1u);
}

TEST(Inequalities, BlockVectorOnRandomStacks) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> parts(2, 4), rows(5, 15);
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = parts(rng);
        std::vector<Eigen::MatrixXd> T;
        Eigen::Index total = 0;
        for (int j = 0; j < m; ++j) {
            T.push_back(scale(rng) * random_matrix(rows(rng), 20, rng));
            total += T.back().rows();
        }
        Eigen::MatrixXd S(total, 20);
        Eigen::Index off = 0;
        std::vector<std::vector<double>> ps;
        for (const auto& t : T) {
            S.middleRows(off, t.rows()) = t;
            off += t.rows();
            ps.push_back(svals(t));
        }
        for (double p : {0.5, 1.0, 2.0}) {
            const auto r = validate_blockvec(svals(S), ps, p, 1e-10, TailWindow{2, 5});
            ASSERT_TRUE(r.pass()) << "trial " << trial << " p " << p;
        }
    }
}

TEST(Weights, SingleCellGivesLocalNorm) {
    const auto a = box_field("1", 0.0, 1.0);
    EXPECT_NEAR(weight_R(a, 1.0), 1.0, 1e-10);
    EXPECT_NEAR(weight_R(a, 7.0), 1.0, 1e-10);
}

TEST(Weights, KappaMustBePositive) {
    const auto a = box_field("1", 0.0, 1.0);
    EXPECT_THROW(weight_R(a, 0.0), ParameterError);
    EXPECT_THROW(weight_M(a, -1.0), ParameterError);
}

TEST(Weights, ShrinkingBoxIsLinearInEpsilon) {
    // a = 1 on [-e, e]^3: each of the 8 octant cells carries L3 norm e
    const double kappa = 0.8;
    for (double e : {0.4, 0.2, 0.1}) {
        const auto a = SmoothField::parse("1", Variables::point("x"), Box::cube(3, -e, e));
        EXPECT_NEAR(weight_R(a, kappa), e * std::pow(1 + std::exp(-kappa / 2), 6), 1e-9);
    }
}

TEST(Weights, SplitSupportNeverBelowSingleCellValue) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> cut(0.05, 0.95);
    for (int trial = 0; trial < 10; ++trial) {
        const double c = cut(rng), kappa = 0.5 + trial;
        const auto a = box_field("1 + 0.5*x2", -c, 1.0 - c);
        const auto whole = box_field("1 + 0.5*x2", 0.0, 1.0);
        // same mass inside one cell, discounted by the farthest cell weight
        EXPECT_GE(weight_R(a, kappa), std::exp(-kappa) * weight_R(whole, kappa) * (1 - 1e-9));
    }
}

TEST(Weights, MDecreasesWithKappa) {
    const auto b = SmoothField::parse("1", Variables::point("t"), Box::cube(3, -1, 1));
    double prev = INFINITY;
    for (double kappa : {0.25, 0.5, 1.0, 2.0}) {
        const double M = weight_M(b, kappa);
        EXPECT_NEAR(M, std::pow((1 - std::exp(-2 * kappa)) / kappa, 1.5), 1e-8);
        EXPECT_LT(M, prev);
        prev = M;
    }
}

TEST(Weights, RDecreasesWithKappa) {
    const auto a = SmoothField::parse("exp(-sq(x))", Variables::point("x"), Box::cube(3, -2, 2));
    const auto w1 = weight_functionals(a, a, 0.5), w2 = weight_functionals(a, a, 1.5);
    EXPECT_LT(w2.R, w1.R);
    EXPECT_LT(w2.M, w1.M);
}

TEST(Decay, SyntheticBounds) {
    const auto s = power_law(1.0, 1.0, 400);
    EXPECT_TRUE(decay_bound_check(s, 1, 3, {50, 200}).pass);
    EXPECT_FALSE(decay_bound_check(s, 2, 3, {50, 200}).pass);
    EXPECT_TRUE(decay_bound_check(power_law(1.0, 1.2, 400), 2, 3, {50, 200}).pass);
}

TEST(Decay, ZeroKernelPassesVacuously) {
    const auto r = decay_bound_check(SpectralSequence::exact(std::vector<double>(100, 0.0)), 2, 3, {10, 50});
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.vacuous);
}

TEST(Decay, LipschitzKernelOnCoarseGrid) {
    const auto g = discretization::GridSpec::cube(0, 1, 8);
    const auto spec = kernellab::ModelKernelSpec::unit_weights(2, SmoothField::constant(1.0, Variables::point("x")), HomogeneousFunction::abs());
    const auto op = discretization::assemble_dense(kernellab::model_kernel(spec), g, g);
    const auto seq = spectra::singular_values(*op, 512, {});
    const auto r = decay_bound_check(seq, 1, 3, window_policy(512));
    EXPECT_TRUE(r.pass) << r.exponent;
}

TEST(Report, JsonCarriesFitAndTrend) {
    std::vector<std::pair<double, SpectralSequence>> chain;
    for (double h : {0.1, 0.05, 0.025}) chain.push_back({h, power_law(2.0 - h, 1.0, 200)});
    const auto rep = tail_report(chain, {20, 80});
    ASSERT_TRUE(rep.extrapolated);
    EXPECT_NEAR(rep.extrapolated->value, 2.0, 1e-10);
    const auto j = to_json(rep);
    EXPECT_NEAR(j["exponent"].get<double>(), 1.0, 1e-9);
    EXPECT_EQ(j["trend"].size(), 3u);
    EXPECT_EQ(j["window"]["k_max"].get<std::size_t>(), 80u);
    EXPECT_TRUE(j["diagnostics"].empty());
}

TEST(Report, ScaledCsv) {
    std::ostringstream os;
    write_scaled_csv(os, power_law(2.0, 1.0, 3));
    EXPECT_EQ(os.str(), "k,scaled\n1,2\n2,2\n3,2\n");
}
