#pragma once

#include "fracsplit/error.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace fracsplit {

struct Triplet {
    int row;
    int col;
    double value;
};

// Symmetric sparse matrix in CSR form (both triangles stored).
class SparseSym {
public:
    SparseSym() = default;
    // Duplicates are summed; exact zeros off the diagonal are dropped.
    static SparseSym from_triplets(int n, std::vector<Triplet> t);
    static SparseSym identity(int n);

    int size() const { return n_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<int>& row_offsets() const { return rows_; }
    const std::vector<int>& columns() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    double entry(int i, int j) const;
    std::vector<double> diagonal() const;
    double sum() const;

    void multiply(const double* x, double* y) const;
    std::vector<double> operator*(const std::vector<double>& x) const;
    void multiply(const std::complex<double>* x, std::complex<double>* y) const;

    // a*A + b*B on the union pattern.
    static SparseSym combine(double a, const SparseSym& A, double b, const SparseSym& B);

private:
    int n_ = 0;
    std::vector<int> rows_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

class NotConverged : public Error {
public:
    NotConverged(const std::string& what, SolveReport r) : Error(what), report_(r) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct CgResult {
    std::vector<double> x;
    SolveReport report;
};

using CgMonitor = std::function<void(int, const std::vector<double>&)>;

// Jacobi-preconditioned CG; relative residual ||b-Ax||/||b|| <= tol.
CgResult cg_solve(const SparseSym& A, const std::vector<double>& b, double tol = 1e-12, int maxit = 0,
                  const CgMonitor& monitor = {}, const std::vector<double>* x0 = nullptr);

struct ComplexResult {
    std::vector<std::complex<double>> x;
    SolveReport report;
};

// Solves (sigma M + K) x = b by Jacobi-preconditioned COCG.
ComplexResult complex_shift_solve(const SparseSym& M, const SparseSym& K, std::complex<double> sigma,
                                  const std::vector<std::complex<double>>& b, double tol = 1e-12,
                                  int maxit = 0);

enum class SolverKind { direct, cg };

struct SolverOptions {
    SolverKind kind = SolverKind::direct;
    double tol = 1e-12;
    int maxit = 0;
};

// Reusable SPD solver for a fixed matrix: a sparse Cholesky factorization
// or CG with a cached diagonal.
class SpdSolver {
public:
    SpdSolver(const SparseSym& A, SolverOptions opt = {});
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    std::vector<double> solve(const std::vector<double>& b);
    const SolveReport& last_report() const { return last_; }
    long total_iterations() const { return total_iterations_; }
    const SolverOptions& options() const { return opt_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverOptions opt_;
    SolveReport last_;
    long total_iterations_ = 0;
};

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

} // namespace fracsplit
