#include "fracsplit/quadrature.hpp"

#include "fracsplit/error.hpp"
#include "fracsplit/special_functions.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace fracsplit {

Rule1d gauss_jacobi(int n, double a, double b)
{
    if (n < 1)
        throw DomainError("gauss_jacobi: n must be positive");
    if (a <= -1.0 || b <= -1.0)
        throw DomainError("gauss_jacobi: exponents must exceed -1");

    // Golub-Welsch on the Jacobi matrix of the monic recurrence.
    Eigen::VectorXd diag(n), off(std::max(n - 1, 1));
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        if (k == 0)
            diag(k) = (b - a) / (ab + 2.0);
        else
            diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        double beta;
        if (k == 1)
            beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        else
            beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        off(k - 1) = std::sqrt(beta);
    }
    const double mu0 = std::pow(2.0, ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) * rgamma(ab + 2.0);

    Rule1d r;
    r.x.resize(n);
    r.w.resize(n);
    if (n == 1) {
        r.x[0] = diag(0);
        r.w[0] = mu0;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off.head(n - 1), Eigen::ComputeEigenvectors);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    return r;
}

Rule1d gauss_legendre(int n)
{
    Rule1d r = gauss_jacobi(n, 0.0, 0.0);
    // symmetrize to remove eigen-solver noise
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (r.x[j] - r.x[i]);
        const double w = 0.5 * (r.w[i] + r.w[j]);
        r.x[i] = -x;
        r.x[j] = x;
        r.w[i] = r.w[j] = w;
    }
    if (n % 2 == 1)
        r.x[n / 2] = 0.0;
    return r;
}

namespace {

constexpr int max_triangle_degree = 40;

TriangleRule make_triangle_rule(int degree)
{
    const int n = degree / 2 + 1;
    const Rule1d gv = gauss_jacobi(n, 1.0, 0.0);
    const Rule1d gu = gauss_legendre(n);
    TriangleRule t;
    t.degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        const double v = 0.5 * (1.0 + gv.x[i]);
        for (int j = 0; j < n; ++j) {
            const double u = 0.5 * (1.0 + gu.x[j]);
            const double xi = u * (1.0 - v);
            t.l1.push_back(xi);
            t.l2.push_back(v);
            t.l0.push_back(1.0 - xi - v);
            t.w.push_back(0.25 * gv.w[i] * gu.w[j]);
        }
    }
    return t;
}

} // namespace

const TriangleRule& triangle_rule(int degree)
{
    if (degree < 0 || degree > max_triangle_degree)
        throw UnsupportedDegree("triangle_rule: degree out of range");
    static const std::array<TriangleRule, max_triangle_degree + 1> rules = [] {
        std::array<TriangleRule, max_triangle_degree + 1> a;
        for (int d = 0; d <= max_triangle_degree; ++d)
            a[d] = make_triangle_rule(d);
        return a;
    }();
    return rules[degree];
}

} // namespace fracsplit
