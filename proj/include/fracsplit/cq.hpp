#pragma once

#include <complex>
#include <vector>

namespace fracsplit {

// delta(zeta) = sum_{j=1}^k (1-zeta)^j / j, coefficients in powers of zeta.
struct BdfGen {
    int k = 1;
    std::vector<double> coeffs;
};

// delta(zeta)^beta = sum_j omega[j] zeta^j. The tau^{-beta} factor is left to callers.
struct CqWeights {
    int k = 1;
    double beta = 0.0;
    double tau = 1.0;
    std::vector<double> omega;
};

BdfGen bdf_gen(int k);

CqWeights cq_weights(const BdfGen& gen, double beta, int N, double tau = 1.0);

// delta(zeta)^beta on the principal branch; throws BranchCutViolation when
// delta(zeta) lies on the closed negative real axis.
std::complex<double> delta_pow(const BdfGen& gen, std::complex<double> zeta, double beta);

// Scalar analogue of the regular-part scheme with A_h replaced by lambda.
std::vector<double> scalar_regular_step(int k, double alpha, int m, double lambda, double tau, int N,
                                        double v0);

// U^n of the same scheme through the trapezoidal rule on |zeta| = rho.
// Q <= 0 selects max(8(n+1), 64).
double cauchy_integral_scalar(int k, double alpha, int m, double lambda, double tau, int n,
                              double rho = 0.5, int Q = 0, double v0 = 1.0);

int default_cauchy_points(int n);

} // namespace fracsplit
