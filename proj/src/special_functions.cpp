#include "fracsplit/special_functions.hpp"

#include "fracsplit/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracsplit {

namespace {

constexpr double pi = std::numbers::pi;

// Lanczos approximation, g = 607/128, 15 terms.
constexpr double lanczos_g = 607.0 / 128.0;
constexpr std::array<double, 15> lanczos_c = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4, 0.36899182659531622704e-5,
};

bool is_nonpositive_integer(double x)
{
    return x <= 0.0 && x == std::floor(x);
}

// Gamma for x >= 0.5; may overflow to inf beyond ~171.6.
double gamma_right(double x)
{
    const double z = x - 1.0;
    double sum = lanczos_c[0];
    for (int i = 1; i < 15; ++i)
        sum += lanczos_c[i] / (z + i);
    const double t = z + lanczos_g + 0.5;
    const double p = std::pow(t, 0.5 * (z + 0.5));
    return std::sqrt(2.0 * pi) * sum * (p * std::exp(-t)) * p;
}

} // namespace

double sin_pi(double x)
{
    // reduce to r in [-1,1]; x - 2*round(x/2) is exact
    double r = x - 2.0 * std::nearbyint(0.5 * x);
    double sign = 1.0;
    if (r < 0.0) {
        r = -r;
        sign = -1.0;
    }
    if (r > 0.5)
        r = 1.0 - r;
    return sign * std::sin(pi * r);
}

double gamma(double x)
{
    if (std::isnan(x))
        throw DomainError("gamma: NaN argument");
    if (is_nonpositive_integer(x))
        throw PoleArgument("gamma: pole at non-positive integer");
    if (std::abs(x) > 171.0)
        throw Overflow("gamma: argument outside representable range");
    double g;
    if (x < 0.5)
        g = pi / (sin_pi(x) * gamma_right(1.0 - x));
    else
        g = gamma_right(x);
    if (!std::isfinite(g))
        throw Overflow("gamma: result not representable");
    return g;
}

double rgamma(double x)
{
    if (is_nonpositive_integer(x))
        return 0.0;
    if (x >= 0.5) {
        if (x > 171.5)
            return 0.0;
        return 1.0 / gamma_right(x);
    }
    const double y = 1.0 - x;
    if (y > 171.5) {
        // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi, evaluated in logs
        const double s = sin_pi(x);
        return std::copysign(std::exp(std::lgamma(y) + std::log(std::abs(s)) - std::log(pi)), s);
    }
    return sin_pi(x) * gamma_right(y) / pi;
}

namespace ml_detail {

double series(const MlParams& p, double x)
{
    // extended precision absorbs the cancellation between large terms for |x| > 1
    const long double a = p.alpha, b = p.beta, xl = x;
    long double sum = 1.0L / std::tgamma(b);
    long double xn = 1.0L;
    int small = 0;
    for (int n = 1; n < 4000; ++n) {
        xn *= xl;
        const long double arg = a * n + b;
        if (arg > 1700.0L || xn == 0.0L)
            break;
        const long double term = xn / std::tgamma(arg);
        sum += term;
        // stop once terms are negligible and the gamma growth dominates
        if (std::fabs(term) <= 1e-20L * std::fabs(sum) && arg > 2.0L) {
            if (++small >= 3)
                break;
        } else {
            small = 0;
        }
    }
    return static_cast<double>(sum);
}

double asymptotic(const MlParams& p, double x)
{
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    const double lx = std::log(std::abs(x));
    for (int n = 1; n < 2000; ++n) {
        const double arg = p.beta - p.alpha * n;
        // envelope Gamma(1-arg)/(pi |x|^n) of |x^{-n}/Gamma(arg)|; the sine factor
        // makes single terms dip near the poles, so truncation follows the envelope
        const double env = arg < 1.0 ? std::lgamma(1.0 - arg) - std::log(pi) - n * lx : -n * lx;
        if (env > prev && n > 2)
            break; // divergent tail
        prev = env;
        if (is_nonpositive_integer(arg))
            continue;
        // x^{-n}/Gamma(arg) in logs to avoid overflow of 1/Gamma
        const double rg = rgamma(arg);
        double term;
        if (std::isfinite(rg) && std::abs(rg) < 1e300) {
            term = rg * std::exp(-n * lx);
        } else {
            const double lg = std::lgamma(1.0 - arg) + std::log(std::abs(sin_pi(arg))) - std::log(pi);
            term = std::copysign(std::exp(lg - n * lx), sin_pi(arg));
        }
        if (n % 2 == 1)
            term = -term; // x^{-n} with x < 0
        sum -= term;
        if (sum != 0.0 && env < std::log(1e-17 * std::abs(sum)))
            break;
    }
    return sum;
}

double integral(const MlParams& p, double x)
{
    const double a = p.alpha;
    const double b = p.beta;
    if (!(a > 0.0 && a < 1.0) || b >= 1.0 + a)
        throw DomainError("mittag_leffler: integral representation needs alpha<1, beta<1+alpha");
    if (x == 0.0)
        return rgamma(b);
    // chi = u^alpha turns the kernel into u^{alpha-beta} e^{-u} times a bounded factor
    const double s1 = std::sin(pi * (1.0 - b));
    const double s2 = std::sin(pi * (1.0 - b + a));
    const double ca = std::cos(pi * a);
    auto f = [&](double u) {
        if (u <= 0.0)
            return 0.0;
        const double ua = std::pow(u, a);
        const double den = ua * ua - 2.0 * ua * x * ca + x * x;
        return std::pow(u, a - b) * std::exp(-u) * (ua * s1 - x * s2) / den;
    };
    double split = 1.0;
    if (ca < 0.0)
        split = std::pow(std::abs(x) * -ca, 1.0 / a); // near-pole of the denominator
    split = std::max(split, 1e-3);

    static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    static thread_local boost::math::quadrature::exp_sinh<double> es(12);
    double err = 0.0;
    const double left = ts.integrate(f, 0.0, split, 1e-15, &err);
    auto g = [&](double v) { return f(split + v); };
    const double right = es.integrate(g, 1e-15, &err);
    return (left + right) / pi;
}

} // namespace ml_detail

namespace {

double ml_alpha_one(double beta, double x)
{
    if (beta == 1.0)
        return std::exp(x);
    if (std::abs(x) <= 1.0)
        return ml_detail::series({1.0, beta}, x);
    if (beta < 1.0)
        return rgamma(beta) + x * ml_alpha_one(beta + 1.0, x);
    if (std::abs(x) >= 50.0)
        return ml_detail::asymptotic({1.0, beta}, x); // e^x part is below roundoff
    // Euler integral (1/Gamma(beta-1)) int_0^1 e^{x(1-u)} u^{beta-2} du
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    auto f = [&](double u) { return std::exp(x * (1.0 - u)) * std::pow(u, beta - 2.0); };
    double err = 0.0;
    return rgamma(beta - 1.0) * ts.integrate(f, 0.0, 1.0, 1e-15, &err);
}

} // namespace

double mittag_leffler(const MlParams& p, double x)
{
    if (!(p.alpha > 0.0 && p.alpha <= 1.0) || !(p.beta > 0.0))
        throw DomainError("mittag_leffler: need alpha in (0,1], beta > 0");
    if (std::isnan(x) || x > 0.0)
        throw DomainError("mittag_leffler: argument must be <= 0");
    if (p.alpha == 1.0)
        return ml_alpha_one(p.beta, x);
    const double ax = std::abs(x);
    if (ax <= 1.0)
        return ml_detail::series(p, x);
    if (ax >= 50.0)
        return ml_detail::asymptotic(p, x);
    if (p.beta >= 1.0 + p.alpha) {
        const double lower = mittag_leffler({p.alpha, p.beta - p.alpha}, x);
        return (lower - rgamma(p.beta - p.alpha)) / x;
    }
    return ml_detail::integral(p, x);
}

} // namespace fracsplit
