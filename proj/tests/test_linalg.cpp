#include "fracsplit/fem.hpp"
#include "fracsplit/linalg.hpp"
#include "fracsplit/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracsplit;

namespace {

double rel_residual(const SparseSym& A, const std::vector<double>& x, const std::vector<double>& b)
{
    auto r = A * x;
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = b[i] - r[i];
    return norm2(r) / norm2(b);
}

} // namespace

TEST(SparseSym, TripletsAndCombine)
{
    const auto A = SparseSym::from_triplets(3, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}, {2, 2, 1}, {0, 0, 1}, {1, 2, 0}});
    EXPECT_EQ(A.entry(0, 0), 3.0);
    EXPECT_EQ(A.entry(0, 1), -1.0);
    EXPECT_EQ(A.entry(1, 2), 0.0);
    EXPECT_EQ(A.nnz(), 5u); // explicit off-diagonal zero dropped
    EXPECT_EQ(A.sum(), 4.0);
    const auto B = SparseSym::combine(2.0, A, -1.0, SparseSym::identity(3));
    EXPECT_EQ(B.entry(0, 0), 5.0);
    EXPECT_EQ(B.entry(2, 2), 1.0);
    EXPECT_EQ(B.entry(1, 0), -2.0);
}

TEST(Cg, SmallSystems)
{
    const auto I = SparseSym::identity(5);
    const std::vector<double> b{1, 2, 3, 4, 5};
    const auto r = cg_solve(I, b);
    EXPECT_LE(r.report.iterations, 1);
    EXPECT_EQ(r.x, b);
    const auto D = SparseSym::from_triplets(2, {{0, 0, 1}, {1, 1, 4}});
    const auto d = cg_solve(D, {1, 4});
    EXPECT_NEAR(d.x[0], 1.0, 1e-15);
    EXPECT_NEAR(d.x[1], 1.0, 1e-15);
}

TEST(Cg, ManufacturedStiffnessAndMonotoneEnergyError)
{
    const auto space = build_space(structured_square(8), 1);
    const auto& K = space->K;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> xs(K.size());
    for (auto& v : xs)
        v = nd(rng);
    const auto b = K * xs;
    std::vector<double> energy;
    auto monitor = [&](int, const std::vector<double>& x) {
        std::vector<double> e(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            e[i] = x[i] - xs[i];
        energy.push_back(dot(e, K * e));
    };
    const auto r = cg_solve(K, b, 1e-12, 0, monitor);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.residual, 1e-12);
    EXPECT_LE(rel_residual(K, r.x, b), 1e-12);
    ASSERT_GE(energy.size(), 2u);
    for (std::size_t i = 1; i < energy.size(); ++i)
        EXPECT_LE(energy[i], energy[i - 1] * (1 + 1e-12));
}

TEST(Cg, NotConvergedCarriesReport)
{
    const auto space = build_space(structured_square(16), 2);
    std::vector<double> b(space->K.size(), 1.0);
    try {
        cg_solve(space->K, b, 1e-12, 2);
        FAIL() << "expected NotConverged";
    } catch (const NotConverged& e) {
        EXPECT_FALSE(e.report().converged);
        EXPECT_EQ(e.report().iterations, 2);
    }
}

TEST(ComplexShift, RealShiftMatchesCg)
{
    const auto space = build_space(structured_square(8), 2);
    const int n = space->n_free();
    std::vector<double> b(n);
    std::vector<std::complex<double>> bc(n);
    for (int i = 0; i < n; ++i) {
        b[i] = std::sin(0.37 * i);
        bc[i] = b[i];
    }
    const double sigma = 3.5;
    const auto x = complex_shift_solve(space->M, space->K, sigma, bc, 1e-13).x;
    const auto y = cg_solve(SparseSym::combine(sigma, space->M, 1.0, space->K), b, 1e-13).x;
    double err = 0.0;
    for (int i = 0; i < n; ++i)
        err = std::max(err, std::abs(x[i] - y[i]));
    EXPECT_LE(err, 1e-10 * norm2(y));
}

TEST(ComplexShift, ConjugateSymmetryAndTrivialCases)
{
    const auto space = build_space(structured_square(8), 2);
    const int n = space->n_free();
    std::vector<std::complex<double>> b(n);
    for (int i = 0; i < n; ++i)
        b[i] = std::cos(0.11 * i);
    const std::complex<double> s(2.0, 7.5);
    const auto x = complex_shift_solve(space->M, space->K, s, b, 1e-13).x;
    const auto y = complex_shift_solve(space->M, space->K, std::conj(s), b, 1e-13).x;
    double err = 0.0, nx = 0.0;
    for (int i = 0; i < n; ++i) {
        err = std::max(err, std::abs(x[i] - std::conj(y[i])));
        nx = std::max(nx, std::abs(x[i]));
    }
    EXPECT_LE(err, 1e-12 * nx);

    for (const auto& v : complex_shift_solve(space->M, space->K, s, std::vector<std::complex<double>>(n), 1e-12).x)
        EXPECT_EQ(v, std::complex<double>(0.0));

    const auto m1 = SparseSym::from_triplets(1, {{0, 0, 2.0}});
    const auto k1 = SparseSym::from_triplets(1, {{0, 0, 5.0}});
    const std::complex<double> b1(1.0, -2.0);
    const auto x1 = complex_shift_solve(m1, k1, s, {b1}, 1e-14).x[0];
    EXPECT_LE(std::abs(x1 - b1 / (s * 2.0 + 5.0)), 1e-14);
}

TEST(SpdSolver, DirectAndCgAgree)
{
    const auto space = build_space(red_refine(structured_square(4)), 3);
    std::vector<double> b(space->n_free());
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = 1.0 / (1.0 + i);
    SpdSolver direct(space->K);
    SpdSolver cg(space->K, {SolverKind::cg, 1e-13, 0});
    const auto x = direct.solve(b);
    const auto y = cg.solve(b);
    EXPECT_LE(rel_residual(space->K, x, b), 1e-13);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        err = std::max(err, std::abs(x[i] - y[i]));
    EXPECT_LE(err, 1e-10 * norm2(x));
    EXPECT_GT(cg.total_iterations(), 0);
}
