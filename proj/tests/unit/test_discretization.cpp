#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cusplab/discretization/assemble.hpp"
#include "cusplab/discretization/serialize.hpp"

using namespace cusplab;
using namespace cusplab::discretization;
using kernellab::HomogeneousFunction;
using kernellab::KernelField;
using kernellab::ModelKernelSpec;
using kernellab::PairExpansion;
using kernellab::SmoothField;
using kernellab::Variables;

namespace {

// Mean distance between two uniform points of the unit cube (closed form).
double mean_distance_unit_cube() {
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    return (4.0 + 17.0 * s2 - 6.0 * s3 - 7.0 * pi) / 105.0 + (std::log(1.0 + s2) + 2.0 * std::log(2.0 + s3)) / 5.0;
}

// Plain 6D Gauss-Legendre average of Phi(t - x) over the cells C_m x C_0 (h = 1).
std::vector<double> brute_average(const HomogeneousFunction& phi, const std::array<long, 3>& m, int q) {
    const auto& gl = kernellab::gauss_legendre(q);
    std::vector<double> acc(phi.components(), 0.0), v(phi.components());
    for (int a0 = 0; a0 < q; ++a0)
        for (int a1 = 0; a1 < q; ++a1)
            for (int a2 = 0; a2 < q; ++a2)
                for (int b0 = 0; b0 < q; ++b0)
                    for (int b1 = 0; b1 < q; ++b1)
                        for (int b2 = 0; b2 < q; ++b2) {
                            const double w = gl.weights[a0] * gl.weights[a1] * gl.weights[a2] * gl.weights[b0] * gl.weights[b1] * gl.weights[b2];
                            const Vec3 d{m[0] + gl.nodes[a0] - gl.nodes[b0], m[1] + gl.nodes[a1] - gl.nodes[b1], m[2] + gl.nodes[a2] - gl.nodes[b2]};
                            phi.eval_into(d, v);
                            for (std::size_t c = 0; c < v.size(); ++c) acc[c] += w * v[c];
                        }
    return acc;
}

// Stratified Monte-Carlo average over C_m x C_0 (h = 1); 4^6 strata.
std::vector<double> sampled_average(const HomogeneousFunction& phi, const std::array<long, 3>& m, int per_stratum) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 0.25);
    std::vector<double> acc(phi.components(), 0.0), v(phi.components());
    long count = 0;
    for (int s = 0; s < 4096; ++s) {
        std::array<double, 6> base{};
        for (int k = 0; k < 6; ++k) base[k] = 0.25 * ((s >> (2 * k)) & 3);
        for (int r = 0; r < per_stratum; ++r) {
            Vec3 d{};
            for (int a = 0; a < 3; ++a) d[a] = m[a] + base[a] + U(rng) - base[a + 3] - U(rng);
            phi.eval_into(d, v);
            for (std::size_t c = 0; c < v.size(); ++c) acc[c] += v[c];
            ++count;
        }
    }
    for (double& a : acc) a /= static_cast<double>(count);
    return acc;
}

Eigen::VectorXd random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = N(rng);
    return v;
}

double relative_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

ModelKernelSpec gaussian_model(const std::string& a, const std::string& beta = "1") {
    auto s = ModelKernelSpec::unit_weights(2, SmoothField::parse(a, ModelKernelSpec::a_variables()), HomogeneousFunction::grad_abs());
    if (beta != "1")
        for (auto& row : s.beta) row[0] = SmoothField::parse(beta, Variables::pair());
    return s;
}

}  // namespace

TEST(Grid, CellsPartitionTheBox) {
    const GridSpec g({-1, 0, 0}, {1, 1, 3}, {4, 2, 6});
    EXPECT_EQ(g.cells(), 48u);
    EXPECT_DOUBLE_EQ(g.cell_volume() * static_cast<double>(g.cells()), 6.0);
    for (std::size_t i = 0; i < g.cells(); ++i) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
    EXPECT_DOUBLE_EQ(g.center(0)[0], -0.75);
    EXPECT_DOUBLE_EQ(g.center(g.cells() - 1)[2], 2.75);
}

TEST(Grid, RejectsDegenerateInput) {
    EXPECT_THROW(GridSpec::cube(0, 1, 1), ParameterError);
    EXPECT_THROW(GridSpec::cube(1, 1, 4), ParameterError);
}

TEST(Grid, RefineKeepsBox) {
    const auto g8 = GridSpec::cube(-1, 1, 8);
    const auto g16 = refine(g8, 2);
    EXPECT_EQ(g16.n()[0], 16u);
    EXPECT_EQ(g16.lo(), g8.lo());
    EXPECT_EQ(g16.hi(), g8.hi());
    EXPECT_EQ(refine(g16, 2).n()[2], 32u);
    EXPECT_THROW(refine(g8, 1), ParameterError);
    EXPECT_THROW(refine(g8, 64), ResourceError);
}

TEST(CellAverage, MeanDistanceInUnitCube) {
    const auto t = cell_averages(HomogeneousFunction::abs(), {1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {});
    EXPECT_NEAR(t->at(0, 0, 0, 0), mean_distance_unit_cube(), 1e-7);
}

TEST(CellAverage, ScalesWithCellSize) {
    const auto t = cell_averages(HomogeneousFunction::abs(), {0.25, 0.25, 0.25}, {0, 0, 0}, {1, 1, 1}, {});
    EXPECT_NEAR(t->at(0, 0, 0, 0), 0.25 * mean_distance_unit_cube(), 1e-8);
}

TEST(CellAverage, GradAbsOddUnderReflection) {
    const auto t = cell_averages(HomogeneousFunction::grad_abs(), {1, 1, 1}, {-2, -2, -2}, {5, 5, 5}, {});
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(t->at(c, 0, 0, 0), 0.0, 1e-14);
    EXPECT_NEAR(t->at(0, 1, 2, -1), -t->at(0, -1, 2, -1), 1e-14);
    EXPECT_NEAR(t->at(1, 1, 2, -1), t->at(1, -1, 2, -1), 1e-14);
    EXPECT_GT(t->at(0, 1, 0, 0), 0.0);
}

TEST(CellAverage, FarOffsetsMatchPlainQuadrature) {
    for (const auto& phi : {HomogeneousFunction::grad_abs(), HomogeneousFunction::abs()}) {
        const auto t = cell_averages(phi, {1, 1, 1}, {-3, -3, -3}, {7, 7, 7}, {});
        for (const std::array<long, 3> m : {std::array<long, 3>{2, 0, 0}, {3, -2, 1}, {-2, 2, 2}}) {
            const auto ref = brute_average(phi, m, 6);
            for (std::size_t c = 0; c < phi.components(); ++c) EXPECT_NEAR(t->at(c, m[0], m[1], m[2]), ref[c], 1e-8) << phi.name();
        }
    }
}

TEST(CellAverage, TouchingOffsetsMatchSampling) {
    const auto phi = HomogeneousFunction::grad_abs();
    const auto t = cell_averages(phi, {1, 1, 1}, {-1, -1, -1}, {3, 3, 3}, {});
    for (const std::array<long, 3> m : {std::array<long, 3>{1, 0, 0}, {1, 1, 0}, {1, -1, 1}}) {
        const auto ref = sampled_average(phi, m, 256);
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(t->at(c, m[0], m[1], m[2]), ref[c], 2e-4);
    }
}

TEST(AssembleDense, ZeroKernelGivesZeroMatrix) {
    const auto g = GridSpec::cube(0, 1, 4);
    const auto spec = gaussian_model("0");
    const auto op = assemble_dense(kernellab::model_kernel(spec), g, g);
    EXPECT_EQ(op->matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleDense, SeparableKernelHasRankOne) {
    const auto g = GridSpec::cube(-1, 1, 8);
    KernelField k(1);
    k.add({0, 1.0, HomogeneousFunction::constant(), 0, [](const Vec3& t) { return std::exp(-dot(t, t)); },
           [](const Vec3& x) { return 1.0 + x[0] * x[0]; }, {}});
    const auto op = assemble_dense(k, g, g);
    const Eigen::VectorXd s = op->matrix().bdcSvd().singularValues();
    EXPECT_GT(s[0], 0.0);
    EXPECT_LT(s[1] / s[0], 1e-10);
}

TEST(AssembleDense, GaussianKernelIsKroneckerProduct) {
    // exp(-|t-x|^2 / 32) on the unit cube factors over axes, so the Galerkin
    // matrix is a Kronecker cube of the 1D matrix and its spectrum is the
    // set of triple products of 1D singular values.
    const std::size_t n = 16;
    const auto g = GridSpec::cube(0, 1, n);
    KernelField k(1);
    k.add({0, 1.0, HomogeneousFunction::constant(), 0, {}, {},
           [](const Vec3& t, const Vec3& x) { const Vec3 d = t - x; return std::exp(-dot(d, d) / 32.0); }});
    const auto op = assemble_dense(k, g, g);
    const double h = 1.0 / n;
    Eigen::MatrixXd K1(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = (static_cast<double>(i) - static_cast<double>(j)) * h;
            K1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h * std::exp(-d * d / 32.0);
        }
    double err = 0.0;
    for (std::size_t i = 0; i < g.cells(); i += 7)
        for (std::size_t j = 0; j < g.cells(); j += 5) {
            const auto a = g.unflatten(i), b = g.unflatten(j);
            double e = 1.0;
            for (std::size_t ax = 0; ax < 3; ++ax) e *= K1(static_cast<Eigen::Index>(a[ax]), static_cast<Eigen::Index>(b[ax]));
            err = std::max(err, std::abs(op->matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - e));
        }
    EXPECT_LT(err, 1e-15);

    const Eigen::VectorXd s1 = K1.jacobiSvd().singularValues();
    std::vector<double> s;
    for (auto a : s1)
        for (auto b : s1)
            for (auto c : s1) s.push_back(a * b * c);
    std::sort(s.rbegin(), s.rend());
    const auto first_below = std::find_if(s.begin(), s.end(), [&](double v) { return v < 1e-12 * s[0]; }) - s.begin() + 1;
    EXPECT_EQ(first_below, 36);
    EXPECT_LT(s[39] / s[0], 1e-12);
}

TEST(AssembleDense, GalerkinMassGrowsUnderRefinement) {
    // pure grad_abs on a box: no smooth factor, so nested projections are exact up to quadrature
    double prev = 0.0;
    for (std::size_t n : {4, 8}) {
        const auto g = GridSpec::cube(0, 1, n);
        const auto op = assemble_dense(kernellab::model_kernel(gaussian_model("1")), g, g);
        const double mass = op->matrix().squaredNorm();
        EXPECT_GE(mass, prev * (1.0 - 1e-6));
        prev = mass;
    }
}

TEST(AssembleDense, MemoryGuard) {
    const auto g = GridSpec::cube(0, 1, 16);
    EXPECT_THROW(assemble_dense(kernellab::model_kernel(gaussian_model("1")), g, g, {}, 1e6), ResourceError);
}

TEST(Convolutional, MatchesDenseForUnitCoupling) {
    const auto g = GridSpec::cube(-1.5, 1.5, 8);
    const auto spec = gaussian_model("exp(-sq(x))");
    const auto dense = assemble_dense(kernellab::model_kernel(spec), g, g);
    const auto conv = assemble_convolutional(spec, g);
    EXPECT_EQ(conv->kind(), OperatorKind::Convolutional);
    std::mt19937_64 rng(3);
    for (int r = 0; r < 3; ++r) {
        const Eigen::VectorXd u = random_vector(g.cells(), rng);
        EXPECT_LT(relative_difference(conv->apply(u), dense->apply(u)), 1e-8);
        const Eigen::VectorXd v = random_vector(dense->rows(), rng);
        EXPECT_LT(relative_difference(conv->apply_adjoint(v), dense->apply_adjoint(v)), 1e-8);
    }
}

TEST(Convolutional, MatchesDenseForSmoothCoupling) {
    const auto g = GridSpec::cube(-1.5, 1.5, 8);
    const auto spec = gaussian_model("exp(-sq(x))", "exp(-0.5*sq(t) + 0.3*t1*x2)");
    const auto dense = assemble_dense(kernellab::model_kernel(spec), g, g);
    const auto conv = assemble_convolutional(spec, g);
    std::mt19937_64 rng(4);
    const Eigen::VectorXd u = random_vector(g.cells(), rng);
    EXPECT_LT(relative_difference(conv->apply(u), dense->apply(u)), 1e-8);
}

TEST(Convolutional, MatchesDenseForGradientKernel) {
    const auto g = GridSpec::cube(-1.5, 1.5, 6);
    const auto pe = PairExpansion::parse("exp(-sq(t) - 2*sq(x))", "(1 + 0.5*x1)*exp(-sq(t) - sq(x))");
    const auto k = kernellab::gradient_kernel(pe);
    const auto dense = assemble_dense(k, g, g);
    const auto conv = assemble_convolutional(k, g, g);
    std::mt19937_64 rng(5);
    const Eigen::VectorXd u = random_vector(g.cells(), rng);
    EXPECT_LT(relative_difference(conv->apply(u), dense->apply(u)), 1e-8);
}

TEST(Convolutional, ShiftedGridsMatchDense) {
    const GridSpec left({-1, -1, -1}, {1, 1, 1}, {8, 8, 8});
    const GridSpec right({-0.5, -1, -1}, {1.5, 0.5, 1}, {8, 6, 8});
    KernelField k(3);
    for (std::size_t c = 0; c < 3; ++c) k.add({c, 1.0, HomogeneousFunction::grad_abs(), c, {}, [](const Vec3& x) { return 1.0 + x[0]; }, {}});
    const auto dense = assemble_dense(k, left, right);
    const auto conv = assemble_convolutional(k, left, right);
    std::mt19937_64 rng(6);
    const Eigen::VectorXd u = random_vector(right.cells(), rng);
    EXPECT_LT(relative_difference(conv->apply(u), dense->apply(u)), 1e-10);
}

TEST(Convolutional, ZeroWeightGivesZeroMatvec) {
    const auto g = GridSpec::cube(-1, 1, 8);
    const auto conv = assemble_convolutional(gaussian_model("0"), g);
    std::mt19937_64 rng(7);
    EXPECT_EQ(conv->apply(random_vector(g.cells(), rng)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Convolutional, AdjointOnRandomPairs) {
    const auto g = GridSpec::cube(-1.5, 1.5, 10);
    const auto pe = PairExpansion::parse("exp(-sq(t) - sq(x))", "exp(-sq(t) - sq(x) + 0.2*t2*x3)");
    const auto conv = assemble_convolutional(kernellab::gradient_kernel(pe), g, g);
    std::mt19937_64 rng(8);
    for (int r = 0; r < 20; ++r) {
        const Eigen::VectorXd u = random_vector(conv->cols(), rng), v = random_vector(conv->rows(), rng);
        const double lhs = conv->apply(u).dot(v), rhs = u.dot(conv->apply_adjoint(v));
        EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::max(std::abs(lhs), u.norm() * v.norm() * 1e-3));
    }
}

TEST(Convolutional, RankShortfallIsReported) {
    const auto g = GridSpec::cube(-1, 1, 8);
    const auto spec = gaussian_model("1", "sin(20*t1*x1)*cos(17*t2*x3)");
    ConvolutionOptions opt;
    opt.max_rank = 4;
    EXPECT_THROW(assemble_convolutional(spec, g, {}, opt), ResourceError);
}

TEST(Serialize, GridAndOperatorRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "cusplab_serialize_test";
    std::filesystem::create_directories(dir);
    const auto g = GridSpec({-1, 0, 0}, {1, 2, 1}, {3, 4, 5});
    save_grid(g, (dir / "g.bin").string());
    EXPECT_EQ(load_grid((dir / "g.bin").string()), g);

    const auto gg = GridSpec::cube(-1, 1, 4);
    const auto conv = assemble_convolutional(gaussian_model("exp(-sq(x))"), gg);
    save_operator(*conv, (dir / "op.bin").string());
    const auto loaded = load_operator((dir / "op.bin").string());
    EXPECT_EQ(loaded.source_kind, OperatorKind::Convolutional);
    EXPECT_EQ(loaded.op->id(), conv->id());
    EXPECT_LT((loaded.op->matrix() - to_dense(*conv)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(load_grid((dir / "op.bin").string()), ConfigError);

    export_csv(*loaded.op, (dir / "op.csv").string());
    std::ifstream in(dir / "op.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, conv->rows());
    std::filesystem::remove_all(dir);
}
