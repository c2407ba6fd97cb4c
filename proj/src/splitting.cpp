#include "fracsplit/splitting.hpp"

#include "fracsplit/cq.hpp"
#include "fracsplit/error.hpp"
#include "fracsplit/quadrature.hpp"
#include "fracsplit/special_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <numbers>

namespace fracsplit {

namespace {

constexpr double pi = std::numbers::pi;

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace

// ---------------------------------------------------------------- problem

int FracProblem::steps() const
{
    if (!(T > 0.0) || !(tau > 0.0))
        throw DomainError("FracProblem: T and tau must be positive");
    const double q = T / tau;
    const double N = std::round(q);
    if (N < 1.0 || std::abs(q - N) > 1e-9 * std::max(1.0, q))
        throw DomainError("FracProblem: T/tau must be an integer");
    return static_cast<int>(N);
}

int FracProblem::taylor_depth(const SourceSpec& s) const
{
    if (s.K >= 0)
        return s.K;
    return std::max(0, static_cast<int>(std::floor((m - 1) * alpha)) + k);
}

Strategy parse_strategy(const std::string& s)
{
    if (s == "plain")
        return Strategy::plain;
    if (s == "dirac_corrected")
        return Strategy::dirac_corrected;
    if (s == "graded_plain")
        return Strategy::graded_plain;
    throw ConfigError("unknown strategy '" + s + "'");
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::plain:
        return "plain";
    case Strategy::dirac_corrected:
        return "dirac_corrected";
    case Strategy::graded_plain:
        return "graded_plain";
    }
    return "plain";
}

namespace {

void check_problem(const FracProblem& p)
{
    if (!(p.alpha > 0.0 && p.alpha <= 1.0))
        throw DomainError("FracProblem: alpha must lie in (0,1]");
    if (p.m < 0)
        throw DomainError("FracProblem: m must be non-negative");
    if (p.k < 1 || p.k > 6)
        throw UnsupportedOrder("FracProblem: BDF order must lie in 1..6");
    p.steps();
}

} // namespace

// ---------------------------------------------------------------- Dirac correction

DiracCorrection::DiracCorrection(Point x0, int p, double r0, double r1, int jmax)
    : x0_(x0), p_(p), r0_(r0), r1_(r1)
{
    if (p < 0)
        throw DomainError("DiracCorrection: smoothness must be non-negative");
    if (!(r0 > 0.0 && r1 > r0))
        throw DomainError("DiracCorrection: need 0 < r0 < r1");
    a_.assign(jmax + 2, 0.0);
    c_.assign(jmax + 2, 0.0);
    a_[1] = -1.0 / (2.0 * pi);
    c_[1] = 0.0;
    for (int n = 1; n <= jmax; ++n) {
        const double nn = 4.0 * n * n;
        a_[n + 1] = -a_[n] / nn;
        c_[n + 1] = -(c_[n] + 4.0 * n * a_[n + 1]) / nn;
    }
    step_.assign(2 * p + 2, 0.0);
    for (int k = 0; k <= p; ++k)
        step_[p + 1 + k] = binomial(p + k, k) * binomial(2 * p + 1, p - k) * ((k % 2) ? -1.0 : 1.0);
}

std::shared_ptr<const DiracCorrection> DiracCorrection::make(Point x0, int m, double r0, double r1)
{
    const double dmin = std::min({x0.x, 1.0 - x0.x, x0.y, 1.0 - x0.y});
    if (!(dmin > 0.0))
        throw PointOutsideDomain("DiracCorrection: center must lie inside the unit square");
    const double s = std::min(1.0, 0.9 * dmin / r1);
    return std::make_shared<DiracCorrection>(x0, 2 * m + 3, r0 * s, r1 * s, std::max(m, 2));
}

double DiracCorrection::qhat_radial(int j, double rho) const
{
    const double L = std::log(rho);
    return std::pow(rho, 2 * (j - 1)) * (a_.at(j) * L + c_.at(j));
}

double DiracCorrection::qhat_dr(int j, double rho) const
{
    const double L = std::log(rho);
    return std::pow(rho, 2 * j - 3) * (2.0 * (j - 1) * (a_.at(j) * L + c_.at(j)) + a_.at(j));
}

double DiracCorrection::qhat_laplacian(int j, double rho) const
{
    // Laplace(rho^s ln rho) = rho^{s-2}(s^2 ln rho + 2s), Laplace(rho^s) = s^2 rho^{s-2}
    const double s = 2.0 * (j - 1);
    const double L = std::log(rho);
    return std::pow(rho, s - 2.0) * (a_.at(j) * (s * s * L + 2.0 * s) + c_.at(j) * s * s);
}

double DiracCorrection::qhat(int j, Point x) const
{
    return qhat_radial(j, distance(x, x0_));
}

Point DiracCorrection::grad_qhat(int j, Point x) const
{
    const Point d = x - x0_;
    const double rho = std::hypot(d.x, d.y);
    return (qhat_dr(j, rho) / rho) * d;
}

double DiracCorrection::chi(double rho) const
{
    const double s = (rho - r0_) / (r1_ - r0_);
    if (s <= 0.0)
        return 0.0;
    if (s >= 1.0)
        return 1.0;
    double v = 0.0;
    for (std::size_t i = step_.size(); i-- > 0;)
        v = v * s + step_[i];
    return v;
}

double DiracCorrection::chi_dr(double rho) const
{
    const double s = (rho - r0_) / (r1_ - r0_);
    if (s <= 0.0 || s >= 1.0)
        return 0.0;
    double v = 0.0;
    for (std::size_t i = step_.size(); i-- > 1;)
        v = v * s + i * step_[i];
    return v / (r1_ - r0_);
}

double DiracCorrection::chi_drr(double rho) const
{
    const double s = (rho - r0_) / (r1_ - r0_);
    if (s <= 0.0 || s >= 1.0)
        return 0.0;
    double v = 0.0;
    for (std::size_t i = step_.size(); i-- > 2;)
        v = v * s + i * (i - 1.0) * step_[i];
    return v / ((r1_ - r0_) * (r1_ - r0_));
}

double DiracCorrection::chi(Point x) const
{
    return chi(distance(x, x0_));
}

double DiracCorrection::correction_density(int j, Point x) const
{
    const double rho = distance(x, x0_);
    if (rho <= r0_ || rho >= r1_)
        return 0.0;
    const double d1 = chi_dr(rho);
    const double lap = chi_drr(rho) + d1 / rho;
    return -(qhat_radial(j, rho) * lap + 2.0 * d1 * qhat_dr(j, rho));
}

double DiracCorrection::outer_part(int j, Point x) const
{
    const double rho = distance(x, x0_);
    if (rho <= r0_)
        return 0.0;
    return (1.0 - chi(rho)) * qhat_radial(j, rho);
}

double SingularFunction::eval(Point x) const
{
    double v = discrete.eval(x);
    if (dirac)
        v += dirac->outer_part(j, x);
    return v;
}

// ---------------------------------------------------------------- singular parts

SingularParts singular_parts(const SpacePtr& space, const FracProblem& problem, Strategy strategy,
                             const SpacePtr& graded_space)
{
    check_problem(problem);
    SingularParts out;
    out.strategy = strategy;
    const int m = problem.m;
    const auto kind = problem.initial.kind;
    using Kind = LoadSpec::Kind;

    if (strategy == Strategy::dirac_corrected && kind != Kind::point)
        throw StrategyMismatch("dirac_corrected requires point initial data");
    if (strategy == Strategy::graded_plain) {
        if (kind != Kind::line)
            throw StrategyMismatch("graded_plain requires line initial data");
        if (!graded_space)
            throw StrategyMismatch("graded_plain requires a graded space");
    }
    if (m >= 1 && space->degree < 2 * m + 1)
        out.warnings.push_back("degree " + std::to_string(space->degree) + " is below 2m+1 = " +
                               std::to_string(2 * m + 1));

    if (kind == Kind::none) {
        out.seed = FeFunction::zero(space);
        for (int j = 1; j <= m; ++j)
            out.phi.push_back({FeFunction::zero(space), nullptr, j});
        return out;
    }

    const LoadFunctional load = assemble_load(*space, problem.initial);
    if (m == 0) {
        out.seed = FeFunction(space, space->solve_mass(load.free));
        return out;
    }
    const auto powers = discrete_neg_powers(space, load, m);
    out.seed = powers.back();

    switch (strategy) {
    case Strategy::plain:
        for (int j = 1; j <= m; ++j)
            out.phi.push_back({powers[j - 1], nullptr, j});
        break;
    case Strategy::dirac_corrected: {
        if (problem.initial.weight != 1.0)
            throw StrategyMismatch("dirac_corrected supports unit point weight only");
        const auto dc = DiracCorrection::make(problem.initial.x0, m, problem.cutoff_r0, problem.cutoff_r1);
        const int qdeg = std::min(40, 2 * space->degree + 12);
        // the loads of f_j are independent
        std::vector<std::future<std::vector<double>>> jobs;
        for (int j = 1; j <= m; ++j)
            jobs.push_back(std::async(std::launch::async, [&, j] {
                const auto f = [&, j](Point x) { return dc->correction_density(j, x); };
                return assemble_load(*space, LoadSpec::density(f), qdeg).free;
            }));
        std::vector<double> prev;
        for (int j = 1; j <= m; ++j) {
            std::vector<double> b = jobs[j - 1].get();
            if (j > 1) {
                const auto Mv = space->M * prev;
                for (std::size_t i = 0; i < b.size(); ++i)
                    b[i] += Mv[i];
            }
            prev = space->solve_stiffness(b);
            out.phi.push_back({FeFunction(space, prev), dc, j});
        }
        break;
    }
    case Strategy::graded_plain: {
        const LoadFunctional gload = assemble_load(*graded_space, problem.initial);
        out.graded = discrete_neg_powers(graded_space, gload, m);
        for (int j = 1; j <= m; ++j) {
            const FeFunction& g = out.graded[j - 1];
            out.phi.push_back({interpolate(space, [&g](Point x) { return g.eval(x); }), nullptr, j});
        }
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------- time stepping

namespace {

// Shared per-step loop: (tau^{-a} w0 M + K) U^n = M (rhs_n - tau^{-a} sum_{j>=1} w_j U^{n-j}),
// rhs_n = sum_s coeff(s, n) * vec_s.
std::vector<FeFunction> run_scheme(const SpacePtr& space, const FracProblem& problem,
                                   const std::vector<std::vector<double>>& vecs,
                                   const std::vector<std::vector<double>>& coeff, long* iterations)
{
    const int N = problem.steps();
    const int nf = space->n_free();
    const BdfGen gen = bdf_gen(problem.k);
    const auto wa = cq_weights(gen, problem.alpha, N).omega;
    const double ta = std::pow(problem.tau, -problem.alpha);

    std::vector<FeFunction> traj;
    traj.reserve(N + 1);
    bool all_zero = true;
    for (const auto& v : vecs)
        for (double x : v)
            if (x != 0.0)
                all_zero = false;
    if (all_zero) {
        for (int n = 0; n <= N; ++n)
            traj.push_back(FeFunction::zero(space));
        return traj;
    }

    SpdSolver solver(SparseSym::combine(ta * wa[0], space->M, 1.0, space->K), space->solver);
    std::vector<double> h(nf), g(nf);
    for (int n = 0; n <= N; ++n) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t s = 0; s < vecs.size(); ++s) {
            const double c = coeff[s][n];
            if (c != 0.0)
                for (int i = 0; i < nf; ++i)
                    g[i] += c * vecs[s][i];
        }
        if (n > 0) {
            std::fill(h.begin(), h.end(), 0.0);
            for (int j = 1; j <= n; ++j) {
                const double w = wa[j];
                const double* u = traj[n - j].coeffs.data();
                for (int i = 0; i < nf; ++i)
                    h[i] += w * u[i];
            }
            for (int i = 0; i < nf; ++i)
                g[i] -= ta * h[i];
        }
        traj.emplace_back(space, solver.solve(space->M * g));
    }
    if (iterations)
        *iterations += solver.total_iterations();
    return traj;
}

} // namespace

std::vector<FeFunction> step_regular(const SpacePtr& space, const FracProblem& problem, const FeFunction& seed,
                                     long* iterations)
{
    check_problem(problem);
    if (seed.space.get() != space.get())
        throw DomainError("step_regular: seed lives on a different space");
    const int N = problem.steps();
    const double beta = (1 + problem.m) * problem.alpha - 1.0;
    const auto wb = cq_weights(bdf_gen(problem.k), beta, N).omega;
    const double sgn = (problem.m % 2) ? -1.0 : 1.0;
    const double tb = sgn * std::pow(problem.tau, -(1 + problem.m) * problem.alpha);
    std::vector<double> c(N + 1);
    for (int n = 0; n <= N; ++n)
        c[n] = tb * wb[n];
    return run_scheme(space, problem, {seed.coeffs}, {c}, iterations);
}

FeFunction cauchy_integral_regular(const SpacePtr& space, const FracProblem& problem, const FeFunction& seed,
                                   int n, double rho, int Q, double tol)
{
    check_problem(problem);
    if (!(rho > 0.0 && rho < 1.0))
        throw DomainError("cauchy_integral_regular: rho must lie in (0,1)");
    if (Q <= 0)
        Q = default_cauchy_points(n);
    if (Q < 2 * (n + 1))
        throw DomainError("cauchy_integral_regular: Q must be at least 2(n+1)");
    const BdfGen gen = bdf_gen(problem.k);
    const double alpha = problem.alpha, tau = problem.tau;
    const double beta = (1 + problem.m) * alpha - 1.0;
    const double sgn = (problem.m % 2) ? -1.0 : 1.0;
    const int nf = space->n_free();
    const auto Mp = space->M * seed.coeffs;
    std::vector<std::complex<double>> b(Mp.begin(), Mp.end());

    std::vector<double> sum(nf, 0.0);
    // points q and Q-q are conjugate; the real part of their sum is twice one of them
    for (int q = 0; q <= Q / 2; ++q) {
        const double theta = 2.0 * pi * q / Q;
        const std::complex<double> zeta = std::polar(rho, theta);
        const auto da = delta_pow(gen, zeta, alpha) * std::pow(tau, -alpha);
        const auto db = delta_pow(gen, zeta, beta) * std::pow(tau, -beta);
        const auto res = complex_shift_solve(space->M, space->K, da, b, tol);
        if (!res.report.converged)
            throw NotConverged("cauchy_integral_regular: shifted solve failed", res.report);
        const auto f = sgn / tau * db * std::polar(std::pow(rho, -n), -n * theta);
        const double mult = (q == 0 || 2 * q == Q) ? 1.0 : 2.0;
        for (int i = 0; i < nf; ++i)
            sum[i] += mult * (f * res.x[i]).real();
    }
    for (double& v : sum)
        v /= Q;
    return FeFunction(space, std::move(sum));
}

// ---------------------------------------------------------------- recombination

double singular_coefficient(int j, double alpha, double t)
{
    const double sgn = (j % 2) ? 1.0 : -1.0;
    return sgn * std::pow(t, -j * alpha) * rgamma(1.0 - j * alpha);
}

double Field::eval(Point x) const
{
    double v = discrete.eval(x);
    for (const auto& a : analytic)
        v += a.coeff * a.dirac->outer_part(a.j, x);
    return v;
}

Field recombine(const SplitSolution& sol, int n)
{
    const int N = static_cast<int>(sol.regular.size()) - 1;
    if (n < 0 || n > N)
        throw DomainError("recombine: step index out of range");
    Field out;
    out.discrete = sol.regular[n];
    if (sol.m == 0 || sol.singular.empty())
        return out;
    if (n == 0)
        throw SingularAtZero("recombine: singular parts are unbounded at t = 0");
    const double t = n * sol.tau;
    for (const auto& s : sol.singular) {
        const double c = singular_coefficient(s.j, sol.alpha, t);
        out.discrete = axpy(out.discrete, c, s.discrete);
        if (s.dirac)
            out.analytic.push_back({c, s.dirac, s.j});
    }
    return out;
}

// ---------------------------------------------------------------- sources

double taylor_remainder(const TimeDerivs& g, int K, double t)
{
    if (t <= 0.0)
        return 0.0;
    double kfact = 1.0;
    for (int i = 2; i <= K; ++i)
        kfact *= i;
    const auto f = [&](double s) { return std::pow(t - s, K) / kfact * g(K + 1, s); };
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, t, 15, 1e-13, &err, &l1);
    // a tolerance near machine epsilon makes the bisection accumulate roundoff
    if (!(err <= std::max(1e-14, 1e-11 * l1)))
        throw QuadratureFailure("taylor_remainder: tolerance not reached");
    return v;
}

FeFunction SourceSolution::total(int n) const
{
    FeFunction u = regular.at(n);
    for (std::size_t j = 0; j < singular_factors.size(); ++j)
        u = axpy(u, G[j].at(n), singular_factors[j]);
    return u;
}

SourceSolution source_solve(const SpacePtr& space, const FracProblem& problem, long* iterations)
{
    check_problem(problem);
    const int N = problem.steps();
    const int m = problem.m;
    const double alpha = problem.alpha, tau = problem.tau;
    const BdfGen gen = bdf_gen(problem.k);
    const double sgn = (m % 2) ? -1.0 : 1.0;

    SourceSolution out;

    std::vector<std::vector<double>> vecs, coeffs;
    for (const auto& src : problem.sources) {
        if (!src.g)
            throw DomainError("source_solve: missing time factor");
        const int K = problem.taylor_depth(src);
        const LoadFunctional load = assemble_load(*space, src.f);

        std::vector<double> R(N + 1);
        for (int n = 0; n <= N; ++n)
            R[n] = taylor_remainder(src.g, K, n * tau);
        std::vector<double> d0(K + 1);
        for (int l = 0; l <= K; ++l)
            d0[l] = src.g(l, 0.0);

        // regular part: seed A_h^{-m} P_h f, forcing (-1)^m CQ of z^{m alpha} g-hat
        std::vector<double> p;
        std::vector<FeFunction> powers;
        if (m == 0) {
            p = space->solve_mass(load.free);
        } else {
            powers = discrete_neg_powers(space, load, m);
            p = powers.back().coeffs;
        }
        std::vector<double> c(N + 1, 0.0);
        for (int l = 0; l <= K; ++l) {
            if (d0[l] == 0.0)
                continue;
            const double b = m * alpha - l - 1.0;
            const auto w = cq_weights(gen, b, N).omega;
            const double s = sgn * d0[l] * std::pow(tau, l - m * alpha);
            for (int n = 0; n <= N; ++n)
                c[n] += s * w[n];
        }
        {
            const auto w = cq_weights(gen, m * alpha, N).omega;
            const double s = sgn * std::pow(tau, -m * alpha);
            for (int n = 0; n <= N; ++n) {
                double acc = 0.0;
                for (int i = 0; i <= n; ++i)
                    acc += w[i] * R[n - i];
                c[n] += s * acc;
            }
        }
        vecs.push_back(std::move(p));
        coeffs.push_back(std::move(c));

        // singular parts: (-1)^j A_h^{-(j+1)} P_h f times G_j(t_n)
        for (int j = 0; j < m; ++j) {
            const auto w = cq_weights(gen, j * alpha, N).omega;
            std::vector<double> G(N + 1, 0.0);
            for (int n = 0; n <= N; ++n) {
                const double t = n * tau;
                double v = 0.0;
                for (int l = 0; l <= K; ++l) {
                    if (d0[l] == 0.0)
                        continue;
                    const double e = l - j * alpha;
                    if (t > 0.0)
                        v += d0[l] * std::pow(t, e) * rgamma(e + 1.0);
                    else if (e == 0.0)
                        v += d0[l];
                    else if (e < 0.0)
                        v += d0[l] * std::numeric_limits<double>::infinity();
                }
                double acc = 0.0;
                for (int i = 0; i <= n; ++i)
                    acc += w[i] * R[n - i];
                G[n] = v + std::pow(tau, -j * alpha) * acc;
            }
            out.singular_factors.push_back(axpy(FeFunction::zero(space), (j % 2) ? -1.0 : 1.0, powers[j]));
            out.G.push_back(std::move(G));
        }
    }
    out.regular = run_scheme(space, problem, vecs, coeffs, iterations);
    return out;
}

// ---------------------------------------------------------------- spectral reference

namespace {

// sum_l 2 sin(l pi y) sin(l pi y0) / ((l pi)^2 + mu^2)^j for j = 1, 2
double green_1d(int j, double mu, double y, double y0)
{
    const double a = std::min(y, y0), b = std::max(y, y0);
    if (a <= 0.0 || b >= 1.0)
        return 0.0;
    const double d = b - a;
    const double e1 = std::exp(-2.0 * mu * a), e2 = std::exp(-2.0 * mu * (1.0 - b)), e3 = std::exp(-2.0 * mu);
    // g = E / mu with E = e^{-mu d}(1-e1)(1-e2) / (2(1-e3))
    const double E = std::exp(-mu * d) * (1.0 - e1) * (1.0 - e2) / (2.0 * (1.0 - e3));
    if (j == 1)
        return E / mu;
    const double L = -d + 2.0 * a * e1 / (1.0 - e1) + 2.0 * (1.0 - b) * e2 / (1.0 - e2) - 2.0 * e3 / (1.0 - e3);
    const double dg = E * (L * mu - 1.0) / (mu * mu);
    return -dg / (2.0 * mu);
}

void sine_table(int P, double x, std::vector<double>& s)
{
    s.assign(P + 1, 0.0);
    const double th = pi * x;
    for (int k = 1; k <= P; ++k)
        s[k] = std::sin(k * th);
}

// (v, phi_kl) for a density by tensor Gauss-Legendre quadrature
std::vector<double> density_coefficients(const ScalarFn& f, int P)
{
    const int nq = 2 * P + 64;
    const Rule1d r = gauss_legendre(nq);
    std::vector<double> x(nq), w(nq);
    for (int i = 0; i < nq; ++i) {
        x[i] = 0.5 * (r.x[i] + 1.0);
        w[i] = 0.5 * r.w[i];
    }
    std::vector<std::vector<double>> S(nq);
    for (int i = 0; i < nq; ++i)
        sine_table(P, x[i], S[i]);
    // inner[i][l] = sum_j w_j f(x_i, y_j) sin(l pi y_j)
    std::vector<double> inner(static_cast<std::size_t>(nq) * P, 0.0);
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
            const double v = w[j] * f({x[i], x[j]});
            if (v == 0.0)
                continue;
            for (int l = 1; l <= P; ++l)
                inner[static_cast<std::size_t>(i) * P + l - 1] += v * S[j][l];
        }
    std::vector<double> c(static_cast<std::size_t>(P) * P, 0.0);
    for (int i = 0; i < nq; ++i)
        for (int k = 1; k <= P; ++k) {
            const double s = 2.0 * w[i] * S[i][k];
            for (int l = 1; l <= P; ++l)
                c[static_cast<std::size_t>(k - 1) * P + l - 1] += s * inner[static_cast<std::size_t>(i) * P + l - 1];
        }
    return c;
}

// int_0^1 cos(t0 + t1 s) ds
double cos_mean(double t0, double t1)
{
    if (std::abs(t1) < 1e-8)
        return std::cos(t0) - 0.5 * t1 * std::sin(t0);
    return (std::sin(t0 + t1) - std::sin(t0)) / t1;
}

std::vector<double> line_coefficients(Point a, Point b, int P)
{
    const double len = distance(a, b);
    const Point d = b - a;
    std::vector<double> c(static_cast<std::size_t>(P) * P);
    for (int k = 1; k <= P; ++k)
        for (int l = 1; l <= P; ++l) {
            // 2 sin A sin B = cos(A-B) - cos(A+B)
            const double m0 = pi * (k * a.x - l * a.y), m1 = pi * (k * d.x - l * d.y);
            const double p0 = pi * (k * a.x + l * a.y), p1 = pi * (k * d.x + l * d.y);
            c[static_cast<std::size_t>(k - 1) * P + l - 1] = len * (cos_mean(m0, m1) - cos_mean(p0, p1));
        }
    return c;
}

} // namespace

SpectralReference::SpectralReference(const FracProblem& problem, int P) : problem_(problem), P_(P)
{
    if (P < 1)
        throw DomainError("SpectralReference: truncation must be positive");
    const auto& u0 = problem.initial;
    using Kind = LoadSpec::Kind;
    c_.assign(static_cast<std::size_t>(P) * P, 0.0);
    switch (u0.kind) {
    case Kind::none:
        break;
    case Kind::point: {
        std::vector<double> sx, sy;
        sine_table(P, u0.x0.x, sx);
        sine_table(P, u0.x0.y, sy);
        for (int k = 1; k <= P; ++k)
            for (int l = 1; l <= P; ++l)
                c_[static_cast<std::size_t>(k - 1) * P + l - 1] = 2.0 * u0.weight * sx[k] * sy[l];
        break;
    }
    case Kind::line: {
        c_ = line_coefficients(u0.a, u0.b, P);
        for (double& v : c_)
            v *= u0.weight;
        break;
    }
    case Kind::density:
        c_ = density_coefficients(u0.f, P);
        break;
    }
    for (const auto& src : problem.sources) {
        std::vector<double> s;
        if (src.f.kind == Kind::density)
            s = density_coefficients(src.f.f, P);
        else if (src.f.kind == Kind::line)
            s = line_coefficients(src.f.a, src.f.b, P);
        else if (src.f.kind == Kind::point) {
            std::vector<double> sx, sy;
            sine_table(P, src.f.x0.x, sx);
            sine_table(P, src.f.x0.y, sy);
            s.resize(static_cast<std::size_t>(P) * P);
            for (int k = 1; k <= P; ++k)
                for (int l = 1; l <= P; ++l)
                    s[static_cast<std::size_t>(k - 1) * P + l - 1] = 2.0 * sx[k] * sy[l];
        }
        double smax = 0.0;
        for (double v : s)
            smax = std::max(smax, std::abs(v));
        std::vector<Mode> modes;
        for (int k = 1; k <= P; ++k)
            for (int l = 1; l <= P; ++l) {
                const double v = s.empty() ? 0.0 : s[static_cast<std::size_t>(k - 1) * P + l - 1];
                if (std::abs(v) > 1e-14 * smax)
                    modes.push_back({k, l, v});
            }
        source_modes_.push_back(std::move(modes));
    }
}

double SpectralReference::mode_value(double lambda, double t) const
{
    const double a = problem_.alpha;
    double v = mittag_leffler({a, 1.0}, -lambda * std::pow(t, a));
    if (problem_.initial.kind == LoadSpec::Kind::point)
        for (int j = 1; j <= 2; ++j)
            v -= singular_coefficient(j, a, t) * std::pow(lambda, -j);
    return v;
}

double SpectralReference::green(int j, Point x) const
{
    const Point x0 = problem_.initial.x0;
    const int PG = 8 * P_;
    double s = 0.0;
    for (int k = 1; k <= PG; ++k) {
        const double mu = k * pi;
        const double g = green_1d(j, mu, x.y, x0.y);
        if (g == 0.0 && k > P_)
            break;
        s += 2.0 * std::sin(mu * x.x) * std::sin(mu * x0.x) * g;
    }
    return problem_.initial.weight * s;
}

const std::vector<double>& SpectralReference::coefficients(double t) const
{
    if (t == cached_t_)
        return cached_;
    const int P = P_;
    const double a = problem_.alpha;
    std::vector<double> A(static_cast<std::size_t>(P) * P, 0.0);
    if (problem_.initial.kind != LoadSpec::Kind::none)
        for (int k = 1; k <= P; ++k)
            for (int l = 1; l <= P; ++l) {
                const std::size_t i = static_cast<std::size_t>(k - 1) * P + l - 1;
                if (c_[i] != 0.0)
                    A[i] = c_[i] * mode_value(pi * pi * (k * k + l * l), t);
            }
    // Duhamel term with u = (sigma/t)^alpha absorbing the (t-s)^{alpha-1} weight:
    // int_0^t s^{a-1} E_{a,a}(-lambda s^a) g(t-s) ds = t^a/a int_0^1 E_{a,a}(-lambda t^a u) g(t - t u^{1/a}) du
    if (!source_modes_.empty()) {
        const Rule1d r = gauss_legendre(64);
        const double ta = std::pow(t, a);
        for (std::size_t s = 0; s < source_modes_.size(); ++s) {
            const auto& g = problem_.sources[s].g;
            std::vector<double> gv(r.x.size());
            for (std::size_t q = 0; q < r.x.size(); ++q) {
                const double uq = 0.5 * (r.x[q] + 1.0);
                gv[q] = 0.5 * r.w[q] * g(0, t - t * std::pow(uq, 1.0 / a));
            }
            for (const auto& md : source_modes_[s]) {
                const double lambda = pi * pi * (md.k * md.k + md.l * md.l);
                double d = 0.0;
                for (std::size_t q = 0; q < r.x.size(); ++q)
                    d += mittag_leffler({a, a}, -lambda * ta * 0.5 * (r.x[q] + 1.0)) * gv[q];
                A[static_cast<std::size_t>(md.k - 1) * P + md.l - 1] += md.s * d * ta / a;
            }
        }
    }
    cached_ = std::move(A);
    cached_t_ = t;
    return cached_;
}

double SpectralReference::series(const std::vector<double>& A, Point x) const
{
    const int P = P_;
    std::vector<double> sx, sy;
    sine_table(P, x.x, sx);
    sine_table(P, x.y, sy);
    double u = 0.0;
    for (int k = 1; k <= P; ++k) {
        const double* row = A.data() + static_cast<std::size_t>(k - 1) * P;
        double acc = 0.0;
        for (int l = 1; l <= P; ++l)
            acc += row[l - 1] * sy[l];
        u += 2.0 * sx[k] * acc;
    }
    return u;
}

double SpectralReference::operator()(Point x, double t) const
{
    if (!(t > 0.0))
        throw SingularAtZero("SpectralReference: t must be positive");
    double u;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        u = series(coefficients(t), x);
    }
    if (problem_.initial.kind == LoadSpec::Kind::point)
        for (int j = 1; j <= 2; ++j)
            u += singular_coefficient(j, problem_.alpha, t) * green(j, x);
    return u;
}

double SpectralReference::neg_power(int j, Point x) const
{
    if (j < 1 || j > 2)
        throw DomainError("SpectralReference: neg_power supports j = 1, 2");
    if (problem_.initial.kind == LoadSpec::Kind::point)
        return green(j, x);
    const int P = P_;
    std::vector<double> A(c_.size());
    for (int k = 1; k <= P; ++k)
        for (int l = 1; l <= P; ++l) {
            const std::size_t i = static_cast<std::size_t>(k - 1) * P + l - 1;
            A[i] = c_[i] * std::pow(pi * pi * (k * k + l * l), -j);
        }
    return series(A, x);
}

} // namespace fracsplit
