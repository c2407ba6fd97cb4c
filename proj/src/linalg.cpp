#include "fracsplit/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracsplit {

SparseSym SparseSym::from_triplets(int n, std::vector<Triplet> t)
{
    for (const auto& e : t)
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw DomainError("SparseSym: triplet index out of range");
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseSym A;
    A.n_ = n;
    A.rows_.assign(n + 1, 0);
    std::size_t i = 0;
    for (int r = 0; r < n; ++r) {
        bool diag_seen = false;
        while (i < t.size() && t[i].row == r) {
            const int c = t[i].col;
            double v = 0.0;
            while (i < t.size() && t[i].row == r && t[i].col == c)
                v += t[i++].value;
            if (c > r && !diag_seen) {
                A.cols_.push_back(r);
                A.values_.push_back(0.0);
                diag_seen = true;
            }
            if (c == r)
                diag_seen = true;
            if (v == 0.0 && c != r)
                continue;
            A.cols_.push_back(c);
            A.values_.push_back(v);
        }
        if (!diag_seen) {
            A.cols_.push_back(r);
            A.values_.push_back(0.0);
        }
        A.rows_[r + 1] = static_cast<int>(A.cols_.size());
    }
    return A;
}

SparseSym SparseSym::identity(int n)
{
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
        t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
}

double SparseSym::entry(int i, int j) const
{
    const auto b = cols_.begin() + rows_[i];
    const auto e = cols_.begin() + rows_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    if (it != e && *it == j)
        return values_[it - cols_.begin()];
    return 0.0;
}

std::vector<double> SparseSym::diagonal() const
{
    std::vector<double> d(n_);
    for (int i = 0; i < n_; ++i)
        d[i] = entry(i, i);
    return d;
}

double SparseSym::sum() const
{
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

void SparseSym::multiply(const double* x, double* y) const
{
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int p = rows_[i]; p < rows_[i + 1]; ++p)
            s += values_[p] * x[cols_[p]];
        y[i] = s;
    }
}

void SparseSym::multiply(const std::complex<double>* x, std::complex<double>* y) const
{
    for (int i = 0; i < n_; ++i) {
        std::complex<double> s = 0.0;
        for (int p = rows_[i]; p < rows_[i + 1]; ++p)
            s += values_[p] * x[cols_[p]];
        y[i] = s;
    }
}

std::vector<double> SparseSym::operator*(const std::vector<double>& x) const
{
    std::vector<double> y(n_);
    multiply(x.data(), y.data());
    return y;
}

SparseSym SparseSym::combine(double a, const SparseSym& A, double b, const SparseSym& B)
{
    if (A.n_ != B.n_)
        throw DomainError("SparseSym::combine: size mismatch");
    SparseSym C;
    C.n_ = A.n_;
    C.rows_.assign(C.n_ + 1, 0);
    for (int i = 0; i < C.n_; ++i) {
        int p = A.rows_[i], q = B.rows_[i];
        const int pe = A.rows_[i + 1], qe = B.rows_[i + 1];
        while (p < pe || q < qe) {
            int c;
            double v = 0.0;
            if (q >= qe || (p < pe && A.cols_[p] < B.cols_[q])) {
                c = A.cols_[p];
                v = a * A.values_[p++];
            } else if (p >= pe || B.cols_[q] < A.cols_[p]) {
                c = B.cols_[q];
                v = b * B.values_[q++];
            } else {
                c = A.cols_[p];
                v = a * A.values_[p++] + b * B.values_[q++];
            }
            C.cols_.push_back(c);
            C.values_.push_back(v);
        }
        C.rows_[i + 1] = static_cast<int>(C.cols_.size());
    }
    return C;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a)
{
    return std::sqrt(dot(a, a));
}

namespace {

std::vector<double> inverse_diagonal(const SparseSym& A)
{
    auto d = A.diagonal();
    for (auto& v : d) {
        if (!(v > 0.0))
            throw DomainError("cg_solve: non-positive diagonal entry");
        v = 1.0 / v;
    }
    return d;
}

CgResult pcg(const SparseSym& A, const std::vector<double>& dinv, const std::vector<double>& b, double tol,
             int maxit, const CgMonitor& monitor, const std::vector<double>* x0)
{
    const int n = A.size();
    if (static_cast<int>(b.size()) != n)
        throw DomainError("cg_solve: size mismatch");
    if (maxit <= 0)
        maxit = std::max(10 * n, 100);
    CgResult res;
    res.x = x0 ? *x0 : std::vector<double>(n, 0.0);
    auto& x = res.x;
    const double bn = norm2(b);
    if (bn == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.report = {0, 0.0, true};
        return res;
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    A.multiply(x.data(), q.data());
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - q[i];
    double rn = norm2(r);
    if (rn <= tol * bn) {
        res.report = {0, rn / bn, true};
        return res;
    }
    for (int i = 0; i < n; ++i)
        z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    int it = 0;
    while (it < maxit) {
        ++it;
        A.multiply(p.data(), q.data());
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            break;
        const double a = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        if (monitor)
            monitor(it, x);
        rn = norm2(r);
        if (rn <= tol * bn) {
            // confirm with the true residual
            A.multiply(x.data(), q.data());
            for (int i = 0; i < n; ++i)
                r[i] = b[i] - q[i];
            rn = norm2(r);
            if (rn <= tol * bn)
                break;
        }
        for (int i = 0; i < n; ++i)
            z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    res.report = {it, rn / bn, rn <= tol * bn};
    if (!res.report.converged)
        throw NotConverged("cg_solve: tolerance not reached", res.report);
    return res;
}

} // namespace

CgResult cg_solve(const SparseSym& A, const std::vector<double>& b, double tol, int maxit,
                  const CgMonitor& monitor, const std::vector<double>* x0)
{
    if (!(tol > 0.0 && tol < 1.0))
        throw DomainError("cg_solve: tol must lie in (0,1)");
    return pcg(A, inverse_diagonal(A), b, tol, maxit, monitor, x0);
}

ComplexResult complex_shift_solve(const SparseSym& M, const SparseSym& K, std::complex<double> sigma,
                                  const std::vector<std::complex<double>>& b, double tol, int maxit)
{
    using cd = std::complex<double>;
    const int n = M.size();
    if (K.size() != n || static_cast<int>(b.size()) != n)
        throw DomainError("complex_shift_solve: size mismatch");
    if (maxit <= 0)
        maxit = std::max(20 * n, 200);
    ComplexResult res;
    res.x.assign(n, 0.0);
    double bn = 0.0;
    for (const auto& v : b)
        bn += std::norm(v);
    bn = std::sqrt(bn);
    if (bn == 0.0) {
        res.report = {0, 0.0, true};
        return res;
    }
    const auto dm = M.diagonal();
    const auto dk = K.diagonal();
    std::vector<cd> dinv(n);
    for (int i = 0; i < n; ++i)
        dinv[i] = 1.0 / (sigma * dm[i] + dk[i]);

    std::vector<cd> tm(n), tk(n);
    auto apply = [&](const std::vector<cd>& x, std::vector<cd>& y) {
        M.multiply(x.data(), tm.data());
        K.multiply(x.data(), tk.data());
        for (int i = 0; i < n; ++i)
            y[i] = sigma * tm[i] + tk[i];
    };
    // bilinear (unconjugated) product
    auto bdot = [](const std::vector<cd>& a, const std::vector<cd>& c) {
        cd s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * c[i];
        return s;
    };
    auto nrm = [](const std::vector<cd>& a) {
        double s = 0.0;
        for (const auto& v : a)
            s += std::norm(v);
        return std::sqrt(s);
    };

    auto& x = res.x;
    std::vector<cd> r = b, z(n), p(n), q(n);
    for (int i = 0; i < n; ++i)
        z[i] = dinv[i] * r[i];
    p = z;
    cd rz = bdot(r, z);
    double rn = bn;
    int it = 0;
    for (int restart = 0; restart < 4 && rn > tol * bn; ++restart) {
        while (it < maxit) {
            ++it;
            apply(p, q);
            const cd pq = bdot(p, q);
            if (std::abs(pq) == 0.0)
                break;
            const cd a = rz / pq;
            for (int i = 0; i < n; ++i) {
                x[i] += a * p[i];
                r[i] -= a * q[i];
            }
            rn = nrm(r);
            if (rn <= tol * bn)
                break;
            for (int i = 0; i < n; ++i)
                z[i] = dinv[i] * r[i];
            const cd rz_new = bdot(r, z);
            const cd beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i)
                p[i] = z[i] + beta * p[i];
        }
        // true residual, restart from it if the recursion drifted
        apply(x, q);
        for (int i = 0; i < n; ++i)
            r[i] = b[i] - q[i];
        rn = nrm(r);
        for (int i = 0; i < n; ++i)
            z[i] = dinv[i] * r[i];
        p = z;
        rz = bdot(r, z);
    }
    res.report = {it, rn / bn, rn <= tol * bn};
    if (!res.report.converged)
        throw NotConverged("complex_shift_solve: tolerance not reached", res.report);
    return res;
}

struct SpdSolver::Impl {
    const SparseSym* A = nullptr;
    SparseSym copy;
    std::vector<double> dinv;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

SpdSolver::SpdSolver(const SparseSym& A, SolverOptions opt) : impl_(std::make_unique<Impl>()), opt_(opt)
{
    impl_->copy = A;
    impl_->A = &impl_->copy;
    if (opt_.kind == SolverKind::cg) {
        impl_->dinv = inverse_diagonal(A);
        return;
    }
    const int n = A.size();
    if (n == 0)
        return;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A.nnz());
    for (int i = 0; i < n; ++i)
        for (int p = A.row_offsets()[i]; p < A.row_offsets()[i + 1]; ++p)
            t.emplace_back(i, A.columns()[p], A.values()[p]);
    Eigen::SparseMatrix<double> S(n, n);
    S.setFromTriplets(t.begin(), t.end());
    impl_->llt.compute(S);
    if (impl_->llt.info() != Eigen::Success)
        throw DomainError("SpdSolver: matrix is not positive definite");
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

std::vector<double> SpdSolver::solve(const std::vector<double>& b)
{
    const SparseSym& A = *impl_->A;
    const int n = A.size();
    if (static_cast<int>(b.size()) != n)
        throw DomainError("SpdSolver: size mismatch");
    if (n == 0)
        return {};
    if (opt_.kind == SolverKind::cg) {
        auto r = pcg(A, impl_->dinv, b, opt_.tol, opt_.maxit, {}, nullptr);
        last_ = r.report;
        total_iterations_ += r.report.iterations;
        return std::move(r.x);
    }
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
    std::vector<double> x(n);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), n);
    xv = impl_->llt.solve(bv);
    const double bn = bv.norm();
    std::vector<double> r(n);
    double rel = 0.0;
    int steps = 0;
    for (;;) {
        A.multiply(x.data(), r.data());
        for (int i = 0; i < n; ++i)
            r[i] = b[i] - r[i];
        rel = bn > 0.0 ? norm2(r) / bn : 0.0;
        if (rel <= opt_.tol || steps == 3)
            break;
        // iterative refinement
        Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
        xv += impl_->llt.solve(rv);
        ++steps;
    }
    last_ = {1 + steps, rel, rel <= opt_.tol};
    total_iterations_ += 1 + steps;
    return x;
}

} // namespace fracsplit
