#pragma once

#include "fracsplit/fem.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fracsplit {

// g^{(l)}(t)
using TimeDerivs = std::function<double(int l, double t)>;

struct SourceSpec {
    TimeDerivs g;   // must provide derivatives 0..K+1
    LoadSpec f;
    int K = -1;     // Taylor depth; < 0 selects floor((m-1) alpha) + k
};

struct FracProblem {
    double alpha = 0.5;
    double T = 1.0;
    int m = 0;
    int k = 1;
    double tau = 0.1;
    LoadSpec initial;                      // Kind::none for zero data
    std::vector<SourceSpec> sources;       // superposed separable sources
    double cutoff_r0 = 0.05;               // Dirac cutoff annulus, shrunk to fit in the domain
    double cutoff_r1 = 0.4;

    int steps() const;                     // N = T/tau, checked to be integral
    int taylor_depth(const SourceSpec& s) const;
};

enum class Strategy { plain, dirac_corrected, graded_plain };

Strategy parse_strategy(const std::string& s);
std::string to_string(Strategy s);

// Closed-form fundamental-solution iterates about x0 and a radial cutoff.
// qhat_1 = -(1/2pi) ln rho solves -Laplace qhat_1 = delta_{x0};
// qhat_{j+1} = rho^{2j}(a_{j+1} ln rho + c_{j+1}) solves -Laplace qhat_{j+1} = qhat_j.
class DiracCorrection {
public:
    DiracCorrection(Point x0, int p, double r0, double r1, int jmax);
    // smoothness p = 2m+3; the annulus is shrunk to stay inside the unit square
    static std::shared_ptr<const DiracCorrection> make(Point x0, int m, double r0 = 0.05, double r1 = 0.4);

    Point center() const { return x0_; }
    int smoothness() const { return p_; }
    double r0() const { return r0_; }
    double r1() const { return r1_; }
    double coeff_a(int j) const { return a_.at(j); }
    double coeff_c(int j) const { return c_.at(j); }

    double qhat(int j, Point x) const;
    Point grad_qhat(int j, Point x) const;
    double qhat_radial(int j, double rho) const;
    double qhat_dr(int j, double rho) const;
    double qhat_laplacian(int j, double rho) const;

    double chi(double rho) const;
    double chi_dr(double rho) const;
    double chi_drr(double rho) const;
    double chi(Point x) const;

    // f_j = -2 chi' dq_j/drho - q_j Laplace(chi); supported in r0 < rho < r1
    double correction_density(int j, Point x) const;
    // (1 - chi) qhat_j
    double outer_part(int j, Point x) const;

private:
    Point x0_;
    int p_;
    double r0_, r1_;
    std::vector<double> a_, c_;
    std::vector<double> step_; // smoothstep coefficients, increasing powers
};

// A singular coefficient function: FE part plus an optional closed-form part.
struct SingularFunction {
    FeFunction discrete;
    std::shared_ptr<const DiracCorrection> dirac;
    int j = 0;
    double eval(Point x) const;
};

struct SingularParts {
    Strategy strategy = Strategy::plain;
    std::vector<SingularFunction> phi;     // on the working space
    std::vector<FeFunction> graded;        // graded_plain: untransferred values
    FeFunction seed;                       // A_h^{-m} P_h u0 on the working space
    std::vector<std::string> warnings;
};

SingularParts singular_parts(const SpacePtr& space, const FracProblem& problem, Strategy strategy,
                             const SpacePtr& graded_space = nullptr);

// Regular-part time stepping from n = 0 to N; returns U^0..U^N. Linear-solver
// iterations are added to *iterations when given.
std::vector<FeFunction> step_regular(const SpacePtr& space, const FracProblem& problem, const FeFunction& seed,
                                     long* iterations = nullptr);

// U^n of the regular-part scheme through the trapezoidal rule on |zeta| = rho,
// one complex shifted solve per circle point (conjugate symmetry halves them).
// Q <= 0 selects max(8(n+1), 64).
FeFunction cauchy_integral_regular(const SpacePtr& space, const FracProblem& problem, const FeFunction& seed,
                                   int n, double rho = 0.5, int Q = 0, double tol = 1e-13);

struct SplitSolution {
    std::vector<SingularFunction> singular;
    std::vector<FeFunction> regular;
    double alpha = 0.5;
    double tau = 0.1;
    int m = 0;
};

// coefficient (-1)^{j+1} t^{-j alpha} / Gamma(1 - j alpha)
double singular_coefficient(int j, double alpha, double t);

struct AnalyticTerm {
    double coeff = 0.0;
    std::shared_ptr<const DiracCorrection> dirac;
    int j = 0;
};

// Recombined solution: FE part plus closed-form Dirac terms (if any).
struct Field {
    FeFunction discrete;
    std::vector<AnalyticTerm> analytic;
    double eval(Point x) const;
};

Field recombine(const SplitSolution& sol, int n);

struct SourceSolution {
    std::vector<FeFunction> regular;                // U^{n,r}, n = 0..N
    // paired terms: (-1)^j A_h^{-(j+1)} P_h f_s and G_j(t_n) for each source s, j = 0..m-1
    std::vector<FeFunction> singular_factors;
    std::vector<std::vector<double>> G;
    FeFunction total(int n) const;
};

SourceSolution source_solve(const SpacePtr& space, const FracProblem& problem, long* iterations = nullptr);

// Remainder R_K(t) = int_0^t (t-s)^K / K! g^{(K+1)}(s) ds
double taylor_remainder(const TimeDerivs& g, int K, double t);

// Truncated eigen-expansion on the unit square. Point data uses a
// mode-wise splitting so the truncated tail decays like lambda^{-3}.
class SpectralReference {
public:
    SpectralReference(const FracProblem& problem, int P);
    double operator()(Point x, double t) const;
    // closed-form or truncated iterates A^{-j} u0 (j = 1, 2)
    double neg_power(int j, Point x) const;

private:
    FracProblem problem_;
    int P_;
    std::vector<double> c_;                       // (u0, phi_kl), k-major
    struct Mode { int k, l; double s; };
    std::vector<std::vector<Mode>> source_modes_; // per source
    double mode_value(double lambda, double t) const;
    double green(int j, Point x) const;
    double series(const std::vector<double>& a, Point x) const;
    const std::vector<double>& coefficients(double t) const;
    mutable std::mutex mutex_;
    mutable double cached_t_ = -1.0;
    mutable std::vector<double> cached_;
};

} // namespace fracsplit
