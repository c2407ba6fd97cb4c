#pragma once

namespace fracsplit {

// Gamma function for real non-pole arguments, |x| <= 171.
double gamma(double x);

// 1/Gamma(x); zero at the poles, never throws.
double rgamma(double x);

// sin(pi x) with exact argument reduction.
double sin_pi(double x);

struct MlParams {
    double alpha = 1.0;
    double beta = 1.0;
};

// E_{alpha,beta}(x) on the closed negative real axis.
double mittag_leffler(const MlParams& p, double x);

namespace ml_detail {
// Individual regimes, exposed for cross-regime checks.
double series(const MlParams& p, double x);
double asymptotic(const MlParams& p, double x);
double integral(const MlParams& p, double x);
} // namespace ml_detail

} // namespace fracsplit
