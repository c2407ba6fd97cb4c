#pragma once

#include <vector>

namespace fracsplit {

struct Rule1d {
    std::vector<double> x;
    std::vector<double> w;
};

// n-point Gauss-Jacobi rule on [-1,1] for the weight (1-x)^a (1+x)^b.
Rule1d gauss_jacobi(int n, double a, double b);

// n-point Gauss-Legendre rule on [-1,1].
Rule1d gauss_legendre(int n);

// Rule on the reference triangle (0,0),(1,0),(0,1). Points are given in
// barycentric form (l0,l1,l2); weights sum to one.
struct TriangleRule {
    std::vector<double> l0, l1, l2;
    std::vector<double> w;
    int degree = 0;
    std::size_t size() const { return w.size(); }
};

// Collapsed Gauss product rule exact for polynomials of total degree `degree`.
const TriangleRule& triangle_rule(int degree);

} // namespace fracsplit
