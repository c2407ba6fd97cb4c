#include "fracsplit/cq.hpp"

#include "fracsplit/error.hpp"

#include <cmath>
#include <numbers>

namespace fracsplit {

BdfGen bdf_gen(int k)
{
    if (k < 1 || k > 6)
        throw UnsupportedOrder("bdf_gen: k must be in 1..6");
    BdfGen g;
    g.k = k;
    g.coeffs.assign(k + 1, 0.0);
    // (1-zeta)^j = sum_i C(j,i) (-zeta)^i
    for (int j = 1; j <= k; ++j) {
        double binom = 1.0;
        for (int i = 0; i <= j; ++i) {
            g.coeffs[i] += ((i % 2) ? -binom : binom) / j;
            binom = binom * (j - i) / (i + 1);
        }
    }
    return g;
}

CqWeights cq_weights(const BdfGen& gen, double beta, int N, double tau)
{
    if (N < 0)
        throw DomainError("cq_weights: N must be non-negative");
    if (!(tau > 0.0))
        throw DomainError("cq_weights: tau must be positive");
    const auto& c = gen.coeffs;
    const int k = static_cast<int>(c.size()) - 1;
    CqWeights w;
    w.k = gen.k;
    w.beta = beta;
    w.tau = tau;
    w.omega.assign(N + 1, 0.0);
    w.omega[0] = std::pow(c[0], beta);
    for (int n = 1; n <= N; ++n) {
        double s = 0.0;
        const int jmax = std::min(n, k);
        for (int j = 1; j <= jmax; ++j)
            s += ((beta + 1.0) * j - n) * c[j] * w.omega[n - j];
        w.omega[n] = s / (n * c[0]);
    }
    return w;
}

std::complex<double> delta_pow(const BdfGen& gen, std::complex<double> zeta, double beta)
{
    // Horner in zeta
    std::complex<double> d = 0.0;
    for (int i = static_cast<int>(gen.coeffs.size()) - 1; i >= 0; --i)
        d = d * zeta + gen.coeffs[i];
    if (d.real() <= 0.0 && std::abs(d.imag()) <= 1e-14 * std::abs(d))
        throw BranchCutViolation("delta(zeta) on the negative real axis");
    return std::exp(beta * std::log(d));
}

std::vector<double> scalar_regular_step(int k, double alpha, int m, double lambda, double tau, int N,
                                        double v0)
{
    if (!(lambda > 0.0))
        throw DomainError("scalar_regular_step: lambda must be positive");
    if (m < 0)
        throw DomainError("scalar_regular_step: m must be non-negative");
    const BdfGen gen = bdf_gen(k);
    const auto wa = cq_weights(gen, alpha, N, tau);
    const auto wr = cq_weights(gen, (1 + m) * alpha - 1.0, N, tau);
    const double ta = std::pow(tau, -alpha);
    const double src = ((m % 2) ? -1.0 : 1.0) * std::pow(tau, -(1 + m) * alpha) * std::pow(lambda, -m) * v0;
    const double diag = ta * wa.omega[0] + lambda;
    std::vector<double> u(N + 1, 0.0);
    for (int n = 0; n <= N; ++n) {
        double hist = 0.0;
        for (int j = 1; j <= n; ++j)
            hist += wa.omega[j] * u[n - j];
        u[n] = (src * wr.omega[n] - ta * hist) / diag;
    }
    return u;
}

int default_cauchy_points(int n)
{
    return std::max(8 * (n + 1), 64);
}

double cauchy_integral_scalar(int k, double alpha, int m, double lambda, double tau, int n, double rho,
                              int Q, double v0)
{
    if (!(rho > 0.0 && rho < 1.0))
        throw DomainError("cauchy_integral_scalar: rho must lie in (0,1)");
    if (Q <= 0)
        Q = default_cauchy_points(n);
    if (Q < 2 * (n + 1))
        throw DomainError("cauchy_integral_scalar: Q must be at least 2(n+1)");
    const BdfGen gen = bdf_gen(k);
    const double sgn = (m % 2) ? -1.0 : 1.0;
    const double beta = (1 + m) * alpha - 1.0;
    std::complex<double> sum = 0.0;
    for (int q = 0; q < Q; ++q) {
        const double theta = 2.0 * std::numbers::pi * q / Q;
        const std::complex<double> zeta = std::polar(rho, theta);
        // delta_tau^s = tau^{-s} delta^s
        const auto da = delta_pow(gen, zeta, alpha) * std::pow(tau, -alpha);
        const auto db = delta_pow(gen, zeta, beta) * std::pow(tau, -beta);
        const auto U = sgn / tau * db / (da + lambda) * std::pow(lambda, -m) * v0;
        sum += U * std::polar(std::pow(rho, -n), -n * theta);
    }
    return sum.real() / Q;
}

} // namespace fracsplit
