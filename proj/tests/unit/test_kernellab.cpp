#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cusplab/kernellab/cutoff.hpp"
#include "cusplab/kernellab/homogeneous.hpp"
#include "cusplab/kernellab/kernel_field.hpp"
#include "cusplab/kernellab/predictors.hpp"

using namespace cusplab;
using namespace cusplab::kernellab;

namespace {

Vec3 random_point(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST(CutoffProfile, PlateauAndSupport) {
    CutoffProfile p;
    for (double t : {0.0, 0.2, -0.49, 0.4999}) EXPECT_EQ(p.theta(t), 1.0);
    for (double t : {1.0, -1.0, 1.5, 7.0}) EXPECT_EQ(p.theta(t), 0.0);
    EXPECT_NEAR(p.theta(0.75), 0.5, 1e-15);
}

TEST(CutoffProfile, MonotoneAndComplement) {
    CutoffProfile p;
    double prev = 1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double t = i * 1e-3;
        const double v = p.theta(t);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_DOUBLE_EQ(v + p.zeta(t), 1.0);
        prev = v;
    }
}

TEST(CutoffProfile, DerivativesMatchFiniteDifferences) {
    CutoffProfile p;
    const double h = 1e-5;
    for (double t : {0.55, 0.6, 0.7, 0.8, 0.9, 0.95, -0.66}) {
        const auto j = p.theta_jet(t);
        const double d1 = (p.theta(t + h) - p.theta(t - h)) / (2 * h);
        const double d2 = (p.theta(t + h) - 2 * p.theta(t) + p.theta(t - h)) / (h * h);
        EXPECT_NEAR(j.d1, d1, 1e-7);
        EXPECT_NEAR(j.d2, d2, 1e-3);
    }
}

TEST(Homogeneous, BuiltinValues) {
    const auto g = HomogeneousFunction::grad_abs();
    const auto v = g.eval(std::vector<double>{1, 0, 0});
    EXPECT_EQ(v, (std::vector<double>{1, 0, 0}));
    EXPECT_EQ(HomogeneousFunction::abs().eval(std::vector<double>{3, 4, 0})[0], 5.0);
    EXPECT_EQ(g.eval(std::vector<double>{2, 0, 0}), g.eval(std::vector<double>{1, 0, 0}));
}

TEST(Homogeneous, OriginIsDomainError) {
    EXPECT_THROW(HomogeneousFunction::grad_abs().eval(std::vector<double>{0, 0, 0}), DomainError);
    EXPECT_THROW(HomogeneousFunction::abs().eval(std::vector<double>{0, 0, 0}), DomainError);
}

TEST(Homogeneous, ScalingProperty) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ts(0.01, 50.0);
    const std::vector<HomogeneousFunction> fns{HomogeneousFunction::grad_abs(), HomogeneousFunction::abs(),
                                               HomogeneousFunction::custom(-1.5, {"u1*u2 + 2", "u3^3"})};
    for (const auto& f : fns) {
        for (int i = 0; i < 100; ++i) {
            const Vec3 x = random_point(rng, 3.0);
            const double t = ts(rng);
            const Vec3 tx = t * x;
            const auto a = f.eval(tx);
            const auto b = f.eval(x);
            for (std::size_t c = 0; c < a.size(); ++c) {
                const double scale = std::pow(t, f.order());
                EXPECT_LE(std::abs(a[c] - scale * b[c]), 1e-12 * std::abs(scale) * (std::abs(b[c]) + 1e-300) + 1e-300)
                    << f.name();
            }
        }
    }
}

TEST(SmoothField, ParsesAndEvaluates) {
    const auto f = SmoothField::parse("2*t1 - x3^2 + exp(-sq(t - x)) / 4", Variables::pair());
    const double z[6] = {1.0, 0.5, 0.0, 0.0, 0.5, 2.0};
    EXPECT_NEAR(f.value(z), 2.0 - 4.0 + std::exp(-(1.0 + 4.0)) / 4.0, 1e-15);
    EXPECT_THROW(SmoothField::parse("t1 + y", Variables::pair()), ConfigError);
    EXPECT_THROW(SmoothField::parse("exp(t1", Variables::pair()), ConfigError);
    EXPECT_THROW(SmoothField::parse("sq(q)", Variables::pair()), ConfigError);
}

TEST(SmoothField, GradientMatchesFiniteDifferences) {
    const std::vector<std::string> exprs{
        "exp(-sq(t) - 2*sq(x - [0.3, 0, -0.1]))*(1 + t1*x2)",
        "sin(t1*x3) + cos(t2)^3 - x1/(2 + t3^2)",
        "theta(norm(x)/1.5) * sqrt(1 + sq(t + x))",
    };
    std::mt19937_64 rng(11);
    for (const auto& e : exprs) {
        const auto f = SmoothField::parse(e, Variables::pair());
        for (int s = 0; s < 20; ++s) {
            std::vector<double> z(6);
            for (auto& v : z) v = std::uniform_real_distribution<double>(-1.2, 1.2)(rng);
            const auto g = f.gradient(z);
            double prev_err = -1;
            for (double h : {1e-2, 5e-3, 2.5e-3}) {
                double err = 0.0;
                for (std::size_t i = 0; i < 6; ++i) {
                    auto zp = z, zm = z;
                    zp[i] += h;
                    zm[i] -= h;
                    err = std::max(err, std::abs((f.value(zp) - f.value(zm)) / (2 * h) - g[i]));
                }
                if (prev_err > 1e-9) {
                    EXPECT_LT(err, 0.3 * prev_err + 1e-9) << e;
                }
                prev_err = err;
            }
        }
    }
}

TEST(SmoothField, PermutedSwapsBlocks) {
    const auto f = SmoothField::parse("t1 + 10*x2 + t3*x3", Variables::pair());
    const auto g = f.permuted({3, 4, 5, 0, 1, 2});
    const double z[6] = {1, 2, 3, 4, 5, 6};
    const double w[6] = {4, 5, 6, 1, 2, 3};
    EXPECT_DOUBLE_EQ(g.value(z), f.value(w));
    const auto gg = g.gradient(z);
    const auto fg = f.gradient(w);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(gg[i], fg[i + 3]);
        EXPECT_DOUBLE_EQ(gg[i + 3], fg[i]);
    }
}

TEST(CutoffSet, RejectsEpsAboveDelta) { EXPECT_THROW(CutoffSet(0.1, 1.0, 0.2), ParameterError); }

TEST(CutoffSet, FarPointHasNoThetaMass) {
    CutoffSet cuts(0.5, 4.0, 0.2);
    const Vec3 xhat[2] = {{3, 0, 0}, {0, 3, 0}};
    const auto p = cuts.partition(xhat, Vec3{1.5, 1.5, 1.5});
    for (double th : p.theta_terms) EXPECT_EQ(th, 0.0);
    EXPECT_EQ(p.zeta_product, 1.0);
}

TEST(CutoffSet, CoalescencePointCarriesFullTheta) {
    CutoffSet cuts(0.25, 4.0, 0.2);
    const Vec3 xhat[2] = {{1.5, 0, 0}, {0, 1.5, 0}};
    const auto p = cuts.partition(xhat, xhat[0]);
    EXPECT_EQ(p.theta_terms[1], 1.0);
    EXPECT_EQ(p.theta_terms[0] + p.theta_terms[2], 0.0);
    EXPECT_EQ(p.zeta_product, 0.0);
    EXPECT_EQ(p.separation, 1.0);
}

TEST(CutoffSet, PartitionIdentityOnRandomConfigurations) {
    CutoffSet cuts(0.3, 3.0, 0.25);
    std::mt19937_64 rng(3);
    int active = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 xhat[2] = {random_point(rng, 2.0), random_point(rng, 2.0)};
        // bias x towards the points so the theta terms are exercised
        const Vec3 x = xhat[i % 2] + random_point(rng, 0.3);
        const auto p = cuts.partition(xhat, x);
        if (p.separation <= 0.0) continue;
        ++active;
        double sum = p.zeta_product;
        for (double th : p.theta_terms) sum += th;
        EXPECT_LT(std::abs(p.separation * sum - p.separation), 1e-12);
    }
    EXPECT_GT(active, 1000);
}

TEST(CutoffSet, ComplementBound) {
    CutoffSet cuts(0.3, 3.0, 0.25);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5000; ++i) {
        const Vec3 xhat[3] = {random_point(rng, 1.5), random_point(rng, 1.5), random_point(rng, 1.5)};
        EXPECT_LE(1.0 - cuts.separation(xhat), cuts.separation_complement_bound(xhat) + 1e-15);
    }
}

TEST(GradientKernel, SmoothPartOnlyWhenEtaVanishes) {
    const auto pe = PairExpansion::parse("exp(-sq(t) - sq(x))*(x1 + 2*t2)", "0");
    const auto k = gradient_kernel(pe);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const Vec3 t = random_point(rng, 1.0), x = random_point(rng, 1.0);
        const double z[6] = {t[0], t[1], t[2], x[0], x[1], x[2]};
        const auto g = pe.xi.gradient(z);
        const auto v = k.eval(t, x);
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(v.value[c], g[3 + c], 1e-14);
    }
}

TEST(GradientKernel, UnitEtaGivesUnitDirection) {
    const auto pe = PairExpansion::parse("0", "1");
    const auto k = gradient_kernel(pe);
    const Vec3 t{0.2, -0.1, 0.4}, x{1.0, 0.5, -0.3};
    const auto v = k.eval(t, x);
    const Vec3 d = x - t;
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(v.value[c], d[c] / norm(d), 1e-15);
    const auto diag = k.eval(t, t);
    EXPECT_TRUE(diag.singular);
    for (double c : diag.value) EXPECT_EQ(c, 0.0);
}

TEST(GradientKernel, FiniteDifferenceTrendIsSecondOrder) {
    const auto pe = PairExpansion::parse("exp(-sq(t) - 2*sq(x))*(1 + x1*t3)", "exp(-sq(t) - sq(x - [0.2, 0, 0]))");
    const auto k = gradient_kernel(pe);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const Vec3 t = random_point(rng, 1.0), x = random_point(rng, 1.0);
        if (norm(t - x) < 0.1) continue;
        const auto v = k.eval(t, x);
        std::vector<double> errs;
        for (double h : {1e-2, 5e-3, 2.5e-3}) {
            double err = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                Vec3 xp = x, xm = x;
                xp[c] += h;
                xm[c] -= h;
                err = std::max(err, std::abs((pe.psi(t, xp) - pe.psi(t, xm)) / (2 * h) - v.value[c]));
            }
            errs.push_back(err);
        }
        EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.5);
        EXPECT_NEAR(errs[1] / errs[2], 4.0, 0.5);
    }
}

TEST(GradientKernel, CutoffsMultiplyBothSides) {
    const auto pe = PairExpansion::parse("0", "1");
    const CutoffSet cuts(0.2, 2.0, 0.1);
    const auto k = gradient_kernel(pe, cuts);
    const Vec3 t{1.3, 0.2, 0.0}, x{0.5, 0.5, 0.5};
    const auto v = k.eval(t, x);
    const Vec3 pts[1] = {t};
    const double w = cuts.box(pts) * cuts.separation(pts) * cuts.single_box(x);
    const Vec3 d = x - t;
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(v.value[c], w * d[c] / norm(d), 1e-15);
}

TEST(ModelKernel, ZeroWeightGivesZeroKernel) {
    const auto s = ModelKernelSpec::unit_weights(2, SmoothField::constant(0.0, ModelKernelSpec::a_variables()),
                                                 HomogeneousFunction::grad_abs());
    const auto k = model_kernel(s);
    const auto v = k.eval({0.1, 0.2, 0.3}, {0.5, 0.5, 0.5});
    for (double c : v.value) EXPECT_EQ(c, 0.0);
}

TEST(ModelKernel, UnitWeightsGiveWeightedDirection) {
    const auto a = SmoothField::parse("1 + x1*x2", ModelKernelSpec::a_variables());
    const auto s = ModelKernelSpec::unit_weights(2, a, HomogeneousFunction::grad_abs());
    const auto k = model_kernel(s);
    const Vec3 t{0.1, 0.2, 0.3}, x{0.5, -0.5, 0.7};
    const auto v = k.eval(t, x);
    ASSERT_EQ(v.value.size(), 6u);
    const Vec3 d = t - x;
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(v.value[3 * j + c], (1 + x[0] * x[1]) * d[c] / norm(d), 1e-15);
    EXPECT_TRUE(k.eval(x, x).singular);
}

TEST(ModelKernel, SpotValuesMatchDirectFormula) {
    // N = 3 with distinct smooth weights, pointwise evaluation
    ModelKernelSpec s;
    s.N = 3;
    s.phi = HomogeneousFunction::grad_abs();
    s.a = SmoothField::parse("exp(-sq(x))", ModelKernelSpec::a_variables());
    const auto bv = s.b_variables();
    const auto btv = s.beta_variables();
    s.b = {{SmoothField::parse("1 + r1_1", bv), SmoothField::parse("r2_2^2", bv)},
           {SmoothField::parse("exp(-sq(r1 - r2))", bv), SmoothField::parse("2", bv)},
           {SmoothField::parse("r1_3*r2_1", bv), SmoothField::parse("cos(r2_3)", bv)}};
    s.beta = {{SmoothField::parse("1 + x1*r1_2", btv), SmoothField::parse("exp(-sq(x - r2))", btv)},
              {SmoothField::parse("x3", btv), SmoothField::parse("1", btv)},
              {SmoothField::parse("sin(x2 + r1_1)", btv), SmoothField::parse("r2_1 - x1", btv)}};
    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const Vec3 r1 = random_point(rng, 1.0), r2 = random_point(rng, 1.0), x = random_point(rng, 1.0);
        const Vec3 xhat[2] = {r1, r2};
        const auto v = model_kernel_value(s, xhat, x);
        const double ax = std::exp(-dot(x, x));
        const double b[3][2] = {{1 + r1[0], r2[1] * r2[1]}, {std::exp(-dot(r1 - r2, r1 - r2)), 2.0}, {r1[2] * r2[0], std::cos(r2[2])}};
        const double be[3][2] = {{1 + x[0] * r1[1], std::exp(-dot(x - r2, x - r2))}, {x[2], 1.0}, {std::sin(x[1] + r1[0]), r2[0] - x[0]}};
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t c = 0; c < 3; ++c) {
                double expect = 0.0;
                for (std::size_t k = 0; k < 2; ++k) {
                    const Vec3 d = xhat[k] - x;
                    expect += b[j][k] * be[j][k] * ax * d[c] / norm(d);
                }
                EXPECT_NEAR(v.value[3 * j + c], expect, 1e-12);
            }
        }
    }
}

TEST(Predictors, ZeroEtaGivesZero) {
    const auto pe = PairExpansion::parse("exp(-sq(t))", "0");
    EXPECT_EQ(predict_B(pe), 0.0);
    EXPECT_EQ(predict_A(pe), 0.0);
}

TEST(Predictors, GaussianPairClosedForms) {
    const auto pe = PairExpansion::parse("0", "exp(-sq(t) - sq(x))");
    const double B = 4.0 / (3.0 * pi) * std::sqrt(2.0) * std::pow(pi / 2.0, 1.5);
    const double A = std::pow(2.0 / pi, 1.25) / 3.0 * std::pow(2.0, 0.375) * std::pow(2.0 * pi / 3.0, 1.5);
    EXPECT_NEAR(B, 1.18164, 1e-5);
    EXPECT_NEAR(predict_B(pe) / B, 1.0, 1e-6);
    EXPECT_NEAR(predict_A(pe) / A, 1.0, 1e-6);
}

TEST(Predictors, ScalingHomogeneity) {
    const auto pe = PairExpansion::parse("0", "exp(-sq(t) - sq(x))*(2 + sin(t1))");
    const auto pe3 = PairExpansion::parse("0", "3*exp(-sq(t) - sq(x))*(2 + sin(t1))");
    EXPECT_NEAR(predict_B(pe3) / predict_B(pe), 3.0, 1e-6);
    EXPECT_NEAR(predict_A(pe3) / predict_A(pe), std::pow(3.0, 0.75), 1e-6);
}

TEST(Predictors, MonteCarloOracleForGeneralEta) {
    const auto pe = PairExpansion::parse("0", "(2 + sin(t1*x2))*exp(-sq(t) - 2*sq(x - [0.3, 0, 0]))");
    // importance sampling of integral |eta(x,x)| with proposal N(mu, 1/6 I), mu = (0.2, 0, 0)
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> nd(0.0, std::sqrt(1.0 / 6.0));
    const Vec3 mu{0.2, 0.0, 0.0};
    const double norm_const = std::pow(2.0 * pi / 6.0, 1.5);
    const int samples = 1000000;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec3 x{mu[0] + nd(rng), nd(rng), nd(rng)};
        const Vec3 d = x - mu;
        const double q = std::exp(-3.0 * dot(d, d)) / norm_const;
        const Vec3 c{0.3, 0, 0};
        const double eta = (2 + std::sin(x[0] * x[1])) * std::exp(-dot(x, x) - 2.0 * dot(x - c, x - c));
        acc += std::abs(eta) / q;
    }
    const double mc = 4.0 / (3.0 * pi) * std::sqrt(2.0) * acc / samples;
    EXPECT_NEAR(predict_B(pe) / mc, 1.0, 1e-3);
}

TEST(Predictors, ThreeParticlePolynomialBump) {
    // eta = P(r1) P(r2) P(r3) with P(r) = prod_a (1 - r_a^2)^2 on [-1, 1]^9, for all three pairs:
    // H = sqrt(6) c^{3/2} P(x)^2 with c = int (1 - s^2)^4 ds = 256/315, so B = nu sqrt(6) c^{9/2}
    const std::string P = "((1 - r1_1^2)*(1 - r1_2^2)*(1 - r1_3^2)*(1 - r2_1^2)*(1 - r2_2^2)*(1 - r2_3^2)"
                          "*(1 - r3_1^2)*(1 - r3_2^2)*(1 - r3_3^2))^2";
    const auto vars = Variables::particles(3);
    const auto box = Box::cube(9, -1.0, 1.0);
    std::vector<PairCoefficient> pairs{{0, 1, SmoothField::parse(P, vars, box)},
                                       {0, 2, SmoothField::parse(P, vars, box)},
                                       {1, 2, SmoothField::parse(P, vars, box)}};
    QuadratureRule rule;
    rule.order = 5;
    const double c = 256.0 / 315.0;
    const double expect = 4.0 / (3.0 * pi) * std::sqrt(6.0) * std::pow(c, 4.5);
    EXPECT_NEAR(predict_B(pairs, 3, rule) / expect, 1.0, 1e-10);
}

TEST(Predictors, ModelConstant) {
    EXPECT_NEAR(model_constant_nu, 0.424413, 1e-6);
    const auto cube = Box::cube(3, 0.0, 1.0);
    const auto a = SmoothField::parse("1 + x1*x2", ModelKernelSpec::a_variables(), cube);
    const auto spec = ModelKernelSpec::unit_weights(2, a, HomogeneousFunction::grad_abs());
    // h = sqrt(2); integral of (1 + x1 x2) over the unit cube is 5/4
    EXPECT_NEAR(predict_model_G1(spec), model_constant_nu * std::sqrt(2.0) * 1.25, 1e-9);
    const auto abs_spec = ModelKernelSpec::unit_weights(2, a, HomogeneousFunction::abs());
    EXPECT_EQ(predict_model_G1(abs_spec), 0.0);
    const auto neg = ModelKernelSpec::unit_weights(2, a, HomogeneousFunction::custom(-1.0, {"1"}));
    EXPECT_THROW(predict_model_G1(neg), ParameterError);
}
