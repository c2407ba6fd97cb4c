// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--known-failures=1,4,8] [--only=3,5]
// Criteria listed in --known-failures still print FAIL but do not change the
// exit status; any other failure exits with status 1.

#include "fracsplit/cq.hpp"
#include "fracsplit/error.hpp"
#include "fracsplit/harness.hpp"
#include "fracsplit/quadrature.hpp"
#include "fracsplit/special_functions.hpp"
#include "fracsplit/splitting.hpp"

#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fracsplit;

namespace {

const double pi = 3.14159265358979323846;

// tolerances
const double kScalarOrderTol = 0.1;
const double kScalarEquivTol = 1e-10;
const double kMatrixEquivTol = 1e-8;
const double kTimeOrderTol = 0.2;
const double kStdFemOrderTol = 0.25;
const double kControlOrderTol = 0.3;
const double kRegularOrderTol = 0.25;
const double kSingularOrderTol = 0.3;
const double kM2OrderTol = 0.3;
const double kLineM0OrderTol = 0.25;
const double kLineRegularOrderTol = 0.3;
const double kGradedOrderTol = 0.35;
const double kNegPowerOrderTol = 0.3;
const double kSourceOrderTol = 0.15;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void check(bool ok, const std::string& what)
    {
        if (!ok)
            pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [out of tolerance]");
    }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string orders_str(const std::vector<double>& o)
{
    std::string s = "[";
    for (std::size_t i = 1; i < o.size(); ++i)
        s += (i > 1 ? " " : "") + fmt("%.2f", o[i]);
    return s + "]";
}

// The finest pair is the asymptotic one and is the one judged.
bool last_order_near(const std::vector<double>& o, double target, double tol)
{
    return !o.empty() && std::isfinite(o.back()) && std::abs(o.back() - target) <= tol;
}

StudyConfig config(const std::string& name)
{
    return load_config(std::string(FRACSPLIT_CONFIG_DIR) + "/" + name);
}

// ------------------------------------------------------------------ 1

Outcome criterion1()
{
    Outcome out;
    const double a = 0.6, lambda = 1.0;
    const double exact = mittag_leffler({a, 1.0}, -lambda) - singular_coefficient(1, a, 1.0) / lambda;
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> e;
        for (int N : {32, 64, 128, 256})
            e.push_back(std::abs(scalar_regular_step(k, a, 1, lambda, 1.0 / N, N, 1.0)[N] - exact));
        const auto o = observed_orders(e);
        out.check(last_order_near(o, k, kScalarOrderTol), "k=" + std::to_string(k) + " " + orders_str(o));
    }
    return out;
}

// ------------------------------------------------------------------ 2

Outcome criterion2()
{
    Outcome out;
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k)
        for (int m = 0; m <= 2; ++m) {
            const auto s = scalar_regular_step(k, 0.6, m, 1.0, 0.1, 9, 1.0);
            for (int n : {1, 4, 9}) {
                const double c = cauchy_integral_scalar(k, 0.6, m, 1.0, 0.1, n, std::exp(-1.0 / (n + 1)), 48 * (n + 1));
                worst = std::max(worst, std::abs(c - s[n]) / std::abs(s[n]));
            }
        }
    out.check(worst <= kScalarEquivTol, "scalar max rel " + fmt("%.1e", worst));

    const auto space = build_space(structured_square(8), 2);
    const auto seed = interpolate(space, [](Point x) { return x.x * (1 - x.x) * std::exp(x.y) * std::sin(pi * x.y); });
    double mworst = 0.0;
    for (int m = 0; m <= 1; ++m) {
        FracProblem p;
        p.alpha = 0.6;
        p.m = m;
        p.k = 2;
        p.tau = 0.1;
        p.T = 0.9;
        const auto traj = step_regular(space, p, seed);
        for (int n : {1, 4, 9}) {
            const auto c = cauchy_integral_regular(space, p, seed, n, std::exp(-1.0 / (n + 1)), 48 * (n + 1));
            double d = 0.0, s = 0.0;
            for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
                d = std::max(d, std::abs(c.coeffs[i] - traj[n].coeffs[i]));
                s = std::max(s, std::abs(traj[n].coeffs[i]));
            }
            mworst = std::max(mworst, d / s);
        }
    }
    out.check(mworst <= kMatrixEquivTol, "matrix n=8 max rel " + fmt("%.1e", mworst));
    return out;
}

// ------------------------------------------------------------------ 3

Outcome criterion3()
{
    Outcome out;
    for (int k = 1; k <= 4; ++k) {
        auto cfg = config("point_m1_time.toml");
        cfg.k = k;
        const auto o = observed_orders(run_time_study(cfg).column("recombined").error);
        out.check(last_order_near(o, k, kTimeOrderTol), "k=" + std::to_string(k) + " " + orders_str(o));
    }
    return out;
}

// ------------------------------------------------------------------ 4

Outcome criterion4()
{
    Outcome out;
    for (int r = 1; r <= 3; ++r) {
        auto cfg = config("point_m0_space.toml");
        cfg.r = r;
        const auto o = observed_orders(run_space_study(cfg).column("recombined").error);
        out.check(last_order_near(o, 1.0, kStdFemOrderTol), "alpha=0.6 r=" + std::to_string(r) + " " + orders_str(o));
    }
    for (int r = 1; r <= 3; ++r) {
        auto cfg = config("point_m0_alpha1_space.toml");
        cfg.r = r;
        const auto o = observed_orders(run_space_study(cfg).column("recombined").error);
        out.check(last_order_near(o, r + 1.0, kControlOrderTol), "alpha=1 r=" + std::to_string(r) + " " + orders_str(o));
    }
    return out;
}

// ------------------------------------------------------------------ 5

Outcome criterion5()
{
    Outcome out;
    const double reg[] = {2, 3, 3}, sing[] = {2, 3, 4};
    for (int r = 1; r <= 3; ++r) {
        auto cfg = config("point_m1_space.toml");
        cfg.r = r;
        const auto rep = run_space_study(cfg);
        const auto orr = observed_orders(rep.column("regular").error);
        const auto os = observed_orders(rep.column("singular").error);
        out.check(last_order_near(orr, reg[r - 1], kRegularOrderTol), "r=" + std::to_string(r) + " regular " + orders_str(orr));
        out.check(last_order_near(os, sing[r - 1], kSingularOrderTol), "singular " + orders_str(os));
    }
    return out;
}

// ------------------------------------------------------------------ 6

Outcome criterion6()
{
    Outcome out;
    const auto o = observed_orders(run_space_study(config("point_m2_space.toml")).column("regular").error);
    out.check(last_order_near(o, 4.0, kM2OrderTol), "r=3 regular " + orders_str(o));
    return out;
}

// ------------------------------------------------------------------ 7

Outcome criterion7()
{
    Outcome out;
    for (int r = 2; r <= 3; ++r) {
        auto cfg = config("line_m0_space.toml");
        cfg.r = r;
        const auto o = observed_orders(run_space_study(cfg).column("recombined").error);
        out.check(last_order_near(o, 2.0, kLineM0OrderTol), "m=0 r=" + std::to_string(r) + " " + orders_str(o));
    }
    const double reg[] = {2, 3, 3.9};
    for (int r = 1; r <= 3; ++r) {
        auto cfg = config("line_m1_graded_space.toml");
        cfg.r = r;
        const auto rep = run_space_study(cfg);
        const auto orr = observed_orders(rep.column("regular").error);
        const auto os = observed_orders(rep.column("singular").error);
        out.check(last_order_near(orr, reg[r - 1], kLineRegularOrderTol),
                  "m=1 r=" + std::to_string(r) + " regular " + orders_str(orr));
        out.check(last_order_near(os, r + 1.0, kGradedOrderTol), "graded singular " + orders_str(os));
    }
    return out;
}

// ------------------------------------------------------------------ 8

// cosh(mu s)/cosh(mu/2) and sinh(mu s)/cosh(mu/2) for |s| <= 1/2 without overflow
double cosh_ratio(double mu, double s)
{
    s = std::abs(s);
    return std::exp(mu * (s - 0.5)) * (1 + std::exp(-2 * mu * s)) / (1 + std::exp(-mu));
}

double sinh_ratio(double mu, double s)
{
    const double a = std::abs(s);
    const double v = std::exp(mu * (a - 0.5)) * (1 - std::exp(-2 * mu * a)) / (1 + std::exp(-mu));
    return s < 0 ? -v : v;
}

// A^{-j} 1 on the unit square: sine series in x, closed-form profiles in y
double neg_power_of_one(int j, Point x)
{
    const double s = x.y - 0.5;
    double u = 0.0;
    for (int k = 1; k <= 4001; k += 2) {
        const double mu = k * pi;
        double w;
        if (j == 1) {
            w = (1 - cosh_ratio(mu, s)) / (mu * mu);
        } else {
            const double m3 = mu * mu * mu, m4 = m3 * mu;
            w = 1 / m4 + s * sinh_ratio(mu, s) / (2 * m3) - (1 / m4 + std::tanh(mu / 2) / (4 * m3)) * cosh_ratio(mu, s);
        }
        u += 4 / (k * pi) * std::sin(mu * x.x) * w;
    }
    return u;
}

Outcome criterion8()
{
    Outcome out;
    const int r = 3;
    std::vector<double> e1, e2;
    for (int n : {4, 8, 16, 32}) {
        const auto s = build_space(structured_square(n), r);
        const auto load = assemble_load(*s, LoadSpec::density([](Point) { return 1.0; }));
        const auto ph = discrete_neg_powers(s, load, 2);
        e1.push_back(norms(ph[0], [](Point x) { return neg_power_of_one(1, x); }).l2_error);
        e2.push_back(norms(ph[1], [](Point x) { return neg_power_of_one(2, x); }).l2_error);
    }
    const auto o1 = observed_orders(e1), o2 = observed_orders(e2);
    out.check(last_order_near(o1, std::min(2, r + 1), kNegPowerOrderTol), "u0=1 j=1 " + orders_str(o1));
    out.check(last_order_near(o2, std::min(4, r + 1), kNegPowerOrderTol), "j=2 " + orders_str(o2));
    return out;
}

// ------------------------------------------------------------------ 9

double fft_weight_error(int k, double beta)
{
    const int count = 513, Q = 1 << 15;
    const long double rho = 0.9975L, lpi = 3.141592653589793238462643383279502884L;
    const BdfGen g = bdf_gen(k);
    fftwl_complex* buf = fftwl_alloc_complex(Q);
    fftwl_plan plan = fftwl_plan_dft_1d(Q, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (int q = 0; q < Q; ++q) {
        const std::complex<long double> z = std::polar(rho, 2.0L * lpi * q / Q);
        std::complex<long double> d = 0.0L, zp = 1.0L;
        for (int i = 0; i <= k; ++i) {
            d += static_cast<long double>(g.coeffs[i]) * zp;
            zp *= z;
        }
        const auto v = std::pow(d, static_cast<long double>(beta));
        buf[q][0] = v.real();
        buf[q][1] = v.imag();
    }
    fftwl_execute(plan);
    const auto w = cq_weights(g, beta, count - 1).omega;
    double scale = 0.0, worst = 0.0;
    for (double v : w)
        scale = std::max(scale, std::abs(v));
    for (int j = 0; j < count; ++j) {
        const double o = static_cast<double>(buf[j][0] / Q / std::pow(rho, static_cast<long double>(j)));
        worst = std::max(worst, std::abs(w[j] - o) / std::max(std::abs(w[j]), 1e-3 * scale));
    }
    fftwl_destroy_plan(plan);
    fftwl_free(buf);
    return worst;
}

double bubble(Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y) * std::exp(p.x - p.y); }

Point grad_bubble(Point p)
{
    const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y), e = std::exp(p.x - p.y);
    return {e * sy * (pi * std::cos(pi * p.x) + sx), e * sx * (pi * std::cos(pi * p.y) - sy)};
}

Outcome criterion9()
{
    Outcome out;

    double ml = 0.0;
    for (double a : {0.3, 0.5, 0.6, 0.8, 0.9})
        for (double b : {a, 1.0}) {
            const MlParams p{a, b};
            for (int i = 0; i <= 30; ++i) {
                const double x1 = -(0.5 + 1.5 * i / 30.0), x2 = -(30.0 + 70.0 * i / 30.0);
                const double s = ml_detail::series(p, x1), q1 = ml_detail::integral(p, x1);
                const double q2 = ml_detail::integral(p, x2), as = ml_detail::asymptotic(p, x2);
                ml = std::max({ml, std::abs(q1 - s) / std::abs(s), std::abs(as - q2) / std::abs(q2)});
            }
        }
    out.check(ml <= 1e-10, "ML cross-regime " + fmt("%.1e", ml));

    double fw = 0.0;
    for (int k = 1; k <= 6; ++k)
        for (double beta : {0.6, -0.4, 0.2, 1.0})
            fw = std::max(fw, fft_weight_error(k, beta));
    out.check(fw <= 1e-11, "weights vs FFT " + fmt("%.1e", fw));

    const DiracCorrection d({0.5, 0.5}, 5, 0.05, 0.4, 3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1e-3, 2.0);
    double q = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double rho = u(rng);
        q = std::max(q, std::abs(d.qhat_laplacian(2, rho) + d.qhat_radial(1, rho)));
    }
    out.check(q <= 1e-10, "-Laplace q2 - q1 " + fmt("%.1e", q));

    {
        const auto s = build_space(structured_square(6), 3);
        const auto& mesh = *s->mesh;
        const auto R = ritz_project(s, grad_bubble);
        const auto KR = s->K * R.coeffs;
        const auto& rule = triangle_rule(8);
        double worst = 0.0;
        for (unsigned seed = 0; seed < 10; ++seed) {
            std::mt19937_64 g(seed);
            std::normal_distribution<double> nd;
            std::vector<double> c(s->n_free());
            for (auto& v : c)
                v = nd(g);
            const FeFunction chi(s, c);
            double a = 0.0;
            for (int t = 0; t < static_cast<int>(mesh.n_triangles()); ++t) {
                const auto& T = mesh.triangles[t];
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    const std::array<double, 3> l{rule.l0[i], rule.l1[i], rule.l2[i]};
                    const Point x = l[0] * mesh.vertices[T[0]] + l[1] * mesh.vertices[T[1]] + l[2] * mesh.vertices[T[2]];
                    const Point gv = grad_bubble(x), gc = chi.grad_local(t, l);
                    a += rule.w[i] * mesh.area(t) * (gv.x * gc.x + gv.y * gc.y);
                }
            }
            worst = std::max(worst, std::abs(a - dot(KR, chi.coeffs)) / std::abs(a));
        }
        out.check(worst <= 1e-10, "Galerkin orthogonality " + fmt("%.1e", worst));
    }

    bool conform = true;
    try {
        MeshPtr m = structured_square(2);
        for (int i = 0; i < 3; ++i) {
            m = red_refine(m);
            check_conformity(*m);
        }
        MeshPtr f = segment_fitted_square({0.25, 0.75}, {0.75, 0.5});
        check_conformity(*f);
        check_conformity(*red_refine(f));
        GradingSpec gs;
        gs.centers = {{0.25, 0.75}, {0.75, 0.5}};
        gs.gamma = 0.2;
        gs.h = 1.0 / 8;
        check_conformity(*graded_refine(structured_square(8), gs));
        gs.centers = {{0.5, 0.5}};
        check_conformity(*graded_refine(red_refine(f), gs));
    } catch (const Error&) {
        conform = false;
    }
    out.check(conform, std::string("conformity after refinement ") + (conform ? "ok" : "broken"));

    bool rates = true;
    for (int r = 1; r <= 3; ++r) {
        std::vector<double> el2, ei;
        for (int n : {4, 8, 16}) {
            const auto s = build_space(structured_square(n), r);
            el2.push_back(norms(l2_project(s, bubble), bubble).l2_error);
            ei.push_back(norms(interpolate(s, bubble), bubble).l2_error);
        }
        const double target = std::pow(2.0, r + 1);
        for (std::size_t i = 1; i < el2.size(); ++i)
            for (double ratio : {el2[i - 1] / el2[i], ei[i - 1] / ei[i]})
                rates = rates && std::abs(ratio / target - 1.0) <= 0.25;
    }
    out.check(rates, std::string("projection rates ") + (rates ? "ok" : "off"));

    bool est = true;
    for (int p = 1; p <= 4; ++p) {
        std::vector<double> e;
        for (int j = 0; j < 5; ++j)
            e.push_back(2.0 * std::pow(0.5, p * j));
        const auto o = observed_orders(e);
        for (int j = 1; j < 5; ++j)
            est = est && std::abs(o[j] - p) <= 1e-12;
    }
    out.check(est, std::string("order estimator ") + (est ? "exact" : "inexact"));
    return out;
}

// ------------------------------------------------------------------ 10

Outcome criterion10()
{
    Outcome out;
    const auto s = build_space(structured_square(4), 2);
    // lowest discrete eigenpair by inverse iteration
    auto v = interpolate(s, [](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); }).coeffs;
    for (int it = 0; it < 60; ++it) {
        v = s->solve_stiffness(s->M * v);
        const double n = std::sqrt(dot(v, s->M * v));
        for (double& x : v)
            x /= n;
    }
    const double lambda = dot(v, s->K * v);
    const FeFunction fv(s, v);
    const double alpha = 0.6;
    const double exact = (1.0 - mittag_leffler({alpha, 1.0}, -lambda)) / lambda;
    const TimeDerivs one = [](int l, double) { return l == 0 ? 1.0 : 0.0; };
    for (int m = 0; m <= 1; ++m)
        for (int k = 1; k <= 2; ++k) {
            std::vector<double> e;
            for (int N : {32, 64, 128, 256}) {
                FracProblem p;
                p.alpha = alpha;
                p.m = m;
                p.k = k;
                p.tau = 1.0 / N;
                p.T = 1.0;
                p.sources = {{one, LoadSpec::density([fv](Point x) { return fv.eval(x); }), -1}};
                const auto u = source_solve(s, p).total(N);
                double err = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    err = std::max(err, std::abs(u.coeffs[i] - exact * v[i]));
                e.push_back(err);
            }
            const auto o = observed_orders(e);
            out.check(last_order_near(o, k, kSourceOrderTol),
                      "m=" + std::to_string(m) + " k=" + std::to_string(k) + " " + orders_str(o));
        }
    return out;
}

std::set<int> parse_list(const std::string& s)
{
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> known, only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a.rfind("--known-failures=", 0) == 0)
            known = parse_list(a.substr(17));
        else if (a.rfind("--only=", 0) == 0)
            only = parse_list(a.substr(7));
        else {
            std::fprintf(stderr, "usage: acceptance [--known-failures=1,4,8] [--only=3,5]\n");
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"scalar CQ order k=1..4", criterion1},
        {"time stepping vs Cauchy integral", criterion2},
        {"temporal PDE study, point data m=1", criterion3},
        {"standard FEM, point data m=0", criterion4},
        {"splitting m=1, point data", criterion5},
        {"splitting m=2, point data", criterion6},
        {"line data, m=0 and graded m=1", criterion7},
        {"discrete negative powers", criterion8},
        {"property suites", criterion9},
        {"source-driven eigenmode solve", criterion10},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool excused = !o.pass && known.count(id);
        std::printf("criterion %2d: %s  %s (%.1f s): %s%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                    o.detail.str().c_str(), excused ? " [known failure]" : "");
        std::fflush(stdout);
        if (!o.pass && !excused)
            ++unexpected;
    }
    return unexpected ? 1 : 0;
}
