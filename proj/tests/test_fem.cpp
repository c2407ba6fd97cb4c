#include "fracsplit/error.hpp"
#include "fracsplit/fem.hpp"
#include "fracsplit/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fracsplit;

namespace {

constexpr double pi = std::numbers::pi;

double sinsin(Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }
Point grad_sinsin(Point p)
{
    return {pi * std::cos(pi * p.x) * std::sin(pi * p.y), pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
}

// smooth function vanishing on the boundary, not a single mode
double bubble(Point p) { return p.x * (1 - p.x) * p.y * (1 - p.y) * std::exp(p.x + 0.5 * p.y); }
Point grad_bubble(Point p)
{
    const double e = std::exp(p.x + 0.5 * p.y);
    const double gx = ((1 - 2 * p.x) + p.x * (1 - p.x)) * p.y * (1 - p.y) * e;
    const double gy = p.x * (1 - p.x) * ((1 - 2 * p.y) + 0.5 * p.y * (1 - p.y)) * e;
    return {gx, gy};
}

FeFunction random_function(const SpacePtr& s, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(s->n_free());
    for (auto& v : c)
        v = u(rng);
    return FeFunction(s, c);
}

std::size_t lagrange_nodes(const TriMesh& m, int r)
{
    return m.n_vertices() + (r - 1) * m.topology().edges.size() + m.n_triangles() * (r - 1) * (r - 2) / 2;
}

} // namespace

TEST(FeSpace, DofCountsAndDegrees)
{
    const auto mesh = structured_square(3);
    for (int r = 1; r <= 5; ++r) {
        const auto s = build_space(mesh, r);
        EXPECT_EQ(static_cast<std::size_t>(s->n_dofs()), lagrange_nodes(*mesh, r));
        EXPECT_EQ(s->n_free() + static_cast<int>(s->boundary_dofs.size()), s->n_dofs());
        EXPECT_EQ(s->element.size(), (r + 1) * (r + 2) / 2);
    }
    EXPECT_THROW(build_space(mesh, 0), UnsupportedDegree);
    EXPECT_THROW(build_space(mesh, 6), UnsupportedDegree);
    EXPECT_EQ(build_space(structured_square(1), 1)->n_free(), 0);
}

TEST(FeSpace, HandAssembledP1Entry)
{
    const auto s = build_space(structured_square(2), 1);
    ASSERT_EQ(s->n_free(), 1);
    EXPECT_NEAR(s->K.entry(0, 0), 4.0, 1e-14);
}

TEST(FeSpace, MassConservation)
{
    for (int r = 1; r <= 5; ++r) {
        const auto s = build_space(structured_square(3), r);
        const auto Mf = full_mass_matrix(*s);
        EXPECT_NEAR(Mf.sum(), 1.0, 1e-13);
        // row sums equal the integrals of the basis functions
        std::vector<double> one(s->n_dofs(), 1.0);
        const auto rows = Mf * one;
        const auto load = assemble_load(*s, LoadSpec::density([](Point) { return 1.0; }));
        for (int i = 0; i < s->n_dofs(); ++i)
            EXPECT_NEAR(rows[i], load.full[i], 1e-14);
    }
}

TEST(FeSpace, StiffnessAndMassArePositiveDefinite)
{
    const auto s = build_space(structured_square(4), 3);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const auto f = random_function(s, seed);
        EXPECT_GT(dot(f.coeffs, s->K * f.coeffs), 0.0);
        EXPECT_GT(dot(f.coeffs, s->M * f.coeffs), 0.0);
    }
}

TEST(Load, PartitionOfUnityAndKronecker)
{
    for (int r = 1; r <= 3; ++r) {
        const auto s = build_space(red_refine(structured_square(3)), r);
        const auto d = assemble_load(*s, LoadSpec::density([](Point) { return 1.0; }));
        double sum = 0.0;
        for (double v : d.full)
            sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-13);

        const Point a{0.13, 0.21}, b{0.71, 0.93};
        const auto l = assemble_load(*s, LoadSpec::line(a, b));
        sum = 0.0;
        for (double v : l.full)
            sum += v;
        EXPECT_NEAR(sum, distance(a, b), 1e-13);

        const auto p = assemble_load(*s, LoadSpec::point({0.5, 0.5}));
        int at = -1;
        for (int i = 0; i < s->n_dofs(); ++i)
            if (distance(s->dof_coords[i], {0.5, 0.5}) < 1e-14)
                at = i;
        ASSERT_GE(at, 0);
        for (int i = 0; i < s->n_dofs(); ++i)
            EXPECT_NEAR(p.full[i], i == at ? 1.0 : 0.0, 1e-14);
    }
}

TEST(Load, DomainErrors)
{
    const auto s = build_space(structured_square(4), 2);
    EXPECT_THROW(assemble_load(*s, LoadSpec::point({0.0, 0.5})), PointOutsideDomain);
    EXPECT_THROW(assemble_load(*s, LoadSpec::point({1.2, 0.5})), PointOutsideDomain);
    EXPECT_THROW(assemble_load(*s, LoadSpec::line({0.5, 0.5}, {1.5, 0.5})), SegmentOutsideDomain);
}

TEST(Projection, IdentityOnSpaceAndZero)
{
    const auto s = build_space(structured_square(4), 3);
    const auto f = random_function(s, 9);
    auto fe = [&](Point p) { return f.eval(p); };
    const auto p = l2_project(s, fe);
    const auto i = interpolate(s, fe);
    for (int k = 0; k < s->n_free(); ++k) {
        EXPECT_NEAR(p.coeffs[k], f.coeffs[k], 1e-10);
        EXPECT_NEAR(i.coeffs[k], f.coeffs[k], 1e-13);
    }
    auto gfe = [&](Point x) {
        const int t = s->mesh->locate(x);
        const auto l = s->mesh->barycentric(t, x);
        return f.grad_local(t, l);
    };
    const auto rp = ritz_project(s, gfe);
    for (int k = 0; k < s->n_free(); ++k)
        EXPECT_NEAR(rp.coeffs[k], f.coeffs[k], 1e-10);
    for (double v : l2_project(s, [](Point) { return 0.0; }).coeffs)
        EXPECT_EQ(v, 0.0);
}

TEST(Projection, InterpolationExactForPolynomials)
{
    // the lowest-degree polynomials vanishing on the boundary have degree 4
    for (int r = 4; r <= 5; ++r) {
        const auto s = build_space(structured_square(3), r);
        auto poly = [r](Point p) { return p.x * (1 - p.x) * p.y * (1 - p.y) * std::pow(p.x + 2 * p.y, r - 4); };
        EXPECT_LE(norms(interpolate(s, poly), poly).l2_error, 1e-13);
    }
}

TEST(Projection, GalerkinOrthogonality)
{
    const auto s = build_space(structured_square(6), 3);
    const auto& mesh = *s->mesh;
    const auto R = ritz_project(s, grad_bubble);
    const auto KR = s->K * R.coeffs;
    const auto& rule = triangle_rule(8); // the rule used to assemble the Ritz load for r = 3
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto chi = random_function(s, 100 + seed);
        // (grad v, grad chi) by element quadrature
        double a = 0.0;
        for (int t = 0; t < static_cast<int>(mesh.n_triangles()); ++t) {
            const auto& T = mesh.triangles[t];
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const std::array<double, 3> l{rule.l0[q], rule.l1[q], rule.l2[q]};
                const Point x = l[0] * mesh.vertices[T[0]] + l[1] * mesh.vertices[T[1]] + l[2] * mesh.vertices[T[2]];
                const Point gv = grad_bubble(x), gc = chi.grad_local(t, l);
                a += rule.w[q] * mesh.area(t) * (gv.x * gc.x + gv.y * gc.y);
            }
        }
        const double ah = dot(KR, chi.coeffs);
        EXPECT_LE(std::abs(a - ah), 1e-10 * std::abs(a));
    }
}

TEST(Projection, RatesOnSmoothFunctions)
{
    for (int r = 1; r <= 4; ++r) {
        std::vector<double> el2, eint, eritz;
        for (int n : {4, 8, 16}) {
            const auto s = build_space(structured_square(n), r);
            el2.push_back(norms(l2_project(s, bubble), bubble).l2_error);
            eint.push_back(norms(interpolate(s, bubble), bubble).l2_error);
            eritz.push_back(norms(ritz_project(s, grad_bubble), bubble).l2_error);
        }
        const double target = std::pow(2.0, r + 1);
        for (const auto* e : {&el2, &eint, &eritz}) {
            const double ratio = (*e)[1] / (*e)[2];
            EXPECT_GE(ratio, 0.75 * target) << "r " << r;
            EXPECT_LE(ratio, 1.25 * target) << "r " << r;
        }
    }
}

TEST(Projection, SineModeL2Rate)
{
    std::vector<double> e;
    for (int n : {8, 16}) {
        const auto s = build_space(structured_square(n), 3);
        e.push_back(norms(l2_project(s, sinsin), sinsin, grad_sinsin).l2_error);
    }
    EXPECT_NEAR(e[0] / e[1], 16.0, 16.0 * 0.2);
}

TEST(Norms, KnownValuesAndCrossMesh)
{
    const auto s = build_space(structured_square(16), 5);
    const auto i = interpolate(s, sinsin);
    EXPECT_NEAR(l2_norm(i), 0.5, 1e-6);
    EXPECT_EQ(l2_norm(FeFunction::zero(s)), 0.0);

    const auto coarse = build_space(structured_square(4), 2);
    const auto fine = build_space(red_refine(coarse->mesh), 2);
    const auto u = interpolate(coarse, bubble);
    const auto v = interpolate(fine, [&](Point p) { return u.eval(p); });
    EXPECT_LE(norms(v, u).l2_error, 1e-12);
    EXPECT_THROW(norms(v, interpolate(build_space(structured_square(4), 2), bubble)), NonNestedMeshes);
}

TEST(NegPower, SineSeriesAtCenter)
{
    // A^{-1} 1 at the center of the square by its double sine series
    double series = 0.0;
    for (int k = 1; k < 200; k += 2)
        for (int l = 1; l < 200; l += 2) {
            const double sk = ((k / 2) % 2) ? -1.0 : 1.0, sl = ((l / 2) % 2) ? -1.0 : 1.0;
            series += 16.0 / (std::pow(pi, 4) * k * l * (k * k + l * l)) * sk * sl;
        }
    const auto s = build_space(structured_square(16), 3);
    const auto load = assemble_load(*s, LoadSpec::density([](Point) { return 1.0; }));
    const auto p1 = discrete_neg_power(s, load, 1);
    EXPECT_NEAR(p1.eval({0.5, 0.5}), series, 1e-6);
    EXPECT_NEAR(series, 0.0736713532814, 1e-6);
}

TEST(NegPower, ConsistencyAndZero)
{
    const auto s = build_space(structured_square(6), 2);
    const auto load = assemble_load(*s, LoadSpec::point({0.41, 0.53}));
    const auto all = discrete_neg_powers(s, load, 3);
    const auto p1 = s->solve_stiffness(load.free);
    const auto p2 = s->solve_stiffness(s->M * p1);
    const auto p3 = s->solve_stiffness(s->M * p2);
    for (int i = 0; i < s->n_free(); ++i) {
        EXPECT_NEAR(all[0].coeffs[i], p1[i], 1e-14);
        EXPECT_NEAR(all[1].coeffs[i], p2[i], 1e-15);
        EXPECT_NEAR(all[2].coeffs[i], p3[i], 1e-16);
    }
    const auto zero = assemble_load(*s, LoadSpec::density([](Point) { return 0.0; }));
    for (const auto& f : discrete_neg_powers(s, zero, 2))
        for (double v : f.coeffs)
            EXPECT_EQ(v, 0.0);
    EXPECT_THROW(discrete_neg_power(s, load, 0), DomainError);
}

TEST(NegPower, EigenmodeSeed)
{
    const double lambda = 2 * pi * pi;
    std::vector<double> e;
    for (int n : {4, 8, 16}) {
        const auto s = build_space(structured_square(n), 2);
        const auto load = assemble_load(*s, LoadSpec::density(sinsin));
        const auto p = discrete_neg_power(s, load, 1);
        e.push_back(norms(p, [&](Point x) { return sinsin(x) / lambda; }).l2_error);
    }
    EXPECT_GT(std::log2(e[1] / e[2]), 2.7);
}
