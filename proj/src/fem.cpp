#include "fracsplit/fem.hpp"

#include "fracsplit/error.hpp"
#include "fracsplit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace fracsplit {

// ---------------------------------------------------------------- element

LagrangeElement::LagrangeElement(int r) : r_(r)
{
    if (r < 1 || r > 5)
        throw UnsupportedDegree("Lagrange degree must be in 1..5");
    index_.push_back({r, 0, 0});
    index_.push_back({0, r, 0});
    index_.push_back({0, 0, r});
    for (int e = 0; e < 3; ++e)
        for (int s = 1; s < r; ++s) {
            std::array<int, 3> m{0, 0, 0};
            m[e] = r - s;
            m[(e + 1) % 3] = s;
            index_.push_back(m);
        }
    for (int a = r - 2; a >= 1; --a)
        for (int b = r - 1 - a; b >= 1; --b)
            index_.push_back({a, b, r - a - b});
}

namespace {

// R_n(l) = prod_{s<n} (r l - s)/(s+1) and its derivative
inline void silvester(int r, int n, double l, double& v, double& d)
{
    v = 1.0;
    d = 0.0;
    for (int s = 0; s < n; ++s) {
        const double f = (r * l - s) / (s + 1);
        const double df = static_cast<double>(r) / (s + 1);
        d = d * f + v * df;
        v *= f;
    }
}

} // namespace

void LagrangeElement::values(const std::array<double, 3>& l, double* out) const
{
    double R[3][6], D[3][6];
    for (int i = 0; i < 3; ++i)
        for (int n = 0; n <= r_; ++n)
            silvester(r_, n, l[i], R[i][n], D[i][n]);
    for (std::size_t a = 0; a < index_.size(); ++a) {
        const auto& m = index_[a];
        out[a] = R[0][m[0]] * R[1][m[1]] * R[2][m[2]];
    }
}

void LagrangeElement::bary_derivatives(const std::array<double, 3>& l, double (*out)[3]) const
{
    double R[3][6], D[3][6];
    for (int i = 0; i < 3; ++i)
        for (int n = 0; n <= r_; ++n)
            silvester(r_, n, l[i], R[i][n], D[i][n]);
    for (std::size_t a = 0; a < index_.size(); ++a) {
        const auto& m = index_[a];
        out[a][0] = D[0][m[0]] * R[1][m[1]] * R[2][m[2]];
        out[a][1] = R[0][m[0]] * D[1][m[1]] * R[2][m[2]];
        out[a][2] = R[0][m[0]] * R[1][m[1]] * D[2][m[2]];
    }
}

// ---------------------------------------------------------------- tables

namespace {

struct Tables {
    const TriangleRule* rule = nullptr;
    int n = 0;
    std::vector<double> phi;     // q * n + a
    std::vector<double> dphi;    // (q * n + a) * 3 + i
};

Tables make_tables(const LagrangeElement& el, int quad_degree)
{
    Tables t;
    t.rule = &triangle_rule(quad_degree);
    t.n = el.size();
    const std::size_t nq = t.rule->size();
    t.phi.resize(nq * t.n);
    t.dphi.resize(nq * t.n * 3);
    double v[21], d[21][3];
    for (std::size_t q = 0; q < nq; ++q) {
        const std::array<double, 3> l{t.rule->l0[q], t.rule->l1[q], t.rule->l2[q]};
        el.values(l, v);
        el.bary_derivatives(l, d);
        for (int a = 0; a < t.n; ++a) {
            t.phi[q * t.n + a] = v[a];
            for (int i = 0; i < 3; ++i)
                t.dphi[(q * t.n + a) * 3 + i] = d[a][i];
        }
    }
    return t;
}

struct Geometry {
    Point p[3];
    double area;
    double g[3][2]; // gradients of the barycentric coordinates
};

Geometry geometry(const TriMesh& m, int t)
{
    Geometry G;
    const auto& T = m.triangles[t];
    for (int i = 0; i < 3; ++i)
        G.p[i] = m.vertices[T[i]];
    G.area = m.signed_area(t);
    const double s = 1.0 / (2.0 * G.area);
    for (int i = 0; i < 3; ++i) {
        const Point a = G.p[(i + 1) % 3], b = G.p[(i + 2) % 3];
        G.g[i][0] = (a.y - b.y) * s;
        G.g[i][1] = (b.x - a.x) * s;
    }
    return G;
}

inline Point physical(const Geometry& G, double l0, double l1, double l2)
{
    return {l0 * G.p[0].x + l1 * G.p[1].x + l2 * G.p[2].x, l0 * G.p[0].y + l1 * G.p[1].y + l2 * G.p[2].y};
}

int default_quad(int r)
{
    return 2 * r + 2;
}

} // namespace

// ---------------------------------------------------------------- space

std::vector<double> FeSpace::solve_stiffness(const std::vector<double>& b) const
{
    std::lock_guard<std::mutex> lock(mutex_);
    if (!k_solver_)
        k_solver_ = std::make_unique<SpdSolver>(K, solver);
    return k_solver_->solve(b);
}

std::vector<double> FeSpace::solve_mass(const std::vector<double>& b) const
{
    std::lock_guard<std::mutex> lock(mutex_);
    if (!m_solver_)
        m_solver_ = std::make_unique<SpdSolver>(M, solver);
    return m_solver_->solve(b);
}

long FeSpace::solver_iterations() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    long s = 0;
    if (k_solver_)
        s += k_solver_->total_iterations();
    if (m_solver_)
        s += m_solver_->total_iterations();
    return s;
}

namespace {

void assemble_matrices(const FeSpace& S, bool free_only, SparseSym* M, SparseSym* K)
{
    const int n = S.n_local();
    const Tables tab = make_tables(S.element, 2 * S.degree);
    const std::size_t nq = tab.rule->size();
    // reference mass and stiffness blocks
    std::vector<double> Mref(n * n, 0.0), Sref(n * n * 9, 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
        const double w = tab.rule->w[q];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Mref[a * n + b] += w * tab.phi[q * n + a] * tab.phi[q * n + b];
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        Sref[(a * n + b) * 9 + i * 3 + j] +=
                            w * tab.dphi[(q * n + a) * 3 + i] * tab.dphi[(q * n + b) * 3 + j];
            }
    }
    const int size = free_only ? S.n_free() : S.n_dofs();
    auto index = [&](int dof) { return free_only ? S.free_index[dof] : dof; };
    std::vector<Triplet> tm, tk;
    const std::size_t nt = S.mesh->n_triangles();
    if (M)
        tm.reserve(nt * n * n);
    if (K)
        tk.reserve(nt * n * n);
    for (std::size_t t = 0; t < nt; ++t) {
        const Geometry G = geometry(*S.mesh, static_cast<int>(t));
        double gg[9];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                gg[i * 3 + j] = G.g[i][0] * G.g[j][0] + G.g[i][1] * G.g[j][1];
        const int* d = S.dofs(static_cast<int>(t));
        for (int a = 0; a < n; ++a) {
            const int ia = index(d[a]);
            if (ia < 0)
                continue;
            for (int b = 0; b < n; ++b) {
                const int ib = index(d[b]);
                if (ib < 0)
                    continue;
                if (M)
                    tm.push_back({ia, ib, G.area * Mref[a * n + b]});
                if (K) {
                    double s = 0.0;
                    const double* sr = &Sref[(a * n + b) * 9];
                    for (int k = 0; k < 9; ++k)
                        s += gg[k] * sr[k];
                    tk.push_back({ia, ib, G.area * s});
                }
            }
        }
    }
    if (M)
        *M = SparseSym::from_triplets(size, std::move(tm));
    if (K)
        *K = SparseSym::from_triplets(size, std::move(tk));
}

} // namespace

SpacePtr build_space(const MeshPtr& mesh, int r, SolverOptions solver)
{
    if (r < 1 || r > 5)
        throw UnsupportedDegree("build_space: degree must be in 1..5");
    auto S = std::make_shared<FeSpace>();
    S->mesh = mesh;
    S->degree = r;
    S->element = LagrangeElement(r);
    S->solver = solver;
    const auto& topo = mesh->topology();
    const int nv = static_cast<int>(mesh->n_vertices());
    const int ne = static_cast<int>(topo.edges.size());
    const int nt = static_cast<int>(mesh->n_triangles());
    const int n = S->n_local();
    const int ni = S->element.n_interior();
    const int n_all = nv + ne * (r - 1) + nt * ni;

    S->cell_dofs.resize(static_cast<std::size_t>(nt) * n);
    S->dof_coords.assign(n_all, {});
    for (int t = 0; t < nt; ++t) {
        const auto& T = mesh->triangles[t];
        int* d = S->cell_dofs.data() + static_cast<std::size_t>(t) * n;
        int a = 0;
        for (int i = 0; i < 3; ++i)
            d[a++] = T[i];
        for (int e = 0; e < 3; ++e) {
            const int ge = topo.tri_edges[t][e];
            const bool forward = T[e] < T[(e + 1) % 3];
            for (int s = 1; s < r; ++s) {
                const int k = forward ? s - 1 : r - 1 - s;
                d[a++] = nv + ge * (r - 1) + k;
            }
        }
        for (int k = 0; k < ni; ++k)
            d[a++] = nv + ne * (r - 1) + t * ni + k;
        const Point p0 = mesh->vertices[T[0]], p1 = mesh->vertices[T[1]], p2 = mesh->vertices[T[2]];
        for (int b = 0; b < n; ++b) {
            const auto& m = S->element.multi_index(b);
            const double l0 = static_cast<double>(m[0]) / r, l1 = static_cast<double>(m[1]) / r,
                         l2 = static_cast<double>(m[2]) / r;
            S->dof_coords[d[b]] = {l0 * p0.x + l1 * p1.x + l2 * p2.x, l0 * p0.y + l1 * p1.y + l2 * p2.y};
        }
    }

    std::vector<char> bnd(n_all, 0);
    for (const auto& be : mesh->boundary_edges) {
        bnd[be.a] = bnd[be.b] = 1;
        const int ge = topo.find_edge(be.a, be.b);
        for (int k = 0; k < r - 1; ++k)
            bnd[nv + ge * (r - 1) + k] = 1;
    }
    S->free_index.assign(n_all, -1);
    for (int i = 0; i < n_all; ++i) {
        if (bnd[i]) {
            S->boundary_dofs.push_back(i);
        } else {
            S->free_index[i] = static_cast<int>(S->free_dofs.size());
            S->free_dofs.push_back(i);
        }
    }
    assemble_matrices(*S, true, &S->M, &S->K);
    return S;
}

SparseSym full_mass_matrix(const FeSpace& space)
{
    SparseSym M;
    assemble_matrices(space, false, &M, nullptr);
    return M;
}

// ---------------------------------------------------------------- functions

FeFunction::FeFunction(SpacePtr s, std::vector<double> c) : space(std::move(s)), coeffs(std::move(c))
{
    if (static_cast<int>(coeffs.size()) != space->n_free())
        throw DomainError("FeFunction: coefficient count does not match the space");
}

FeFunction FeFunction::zero(SpacePtr s)
{
    const int n = s->n_free();
    return FeFunction(std::move(s), std::vector<double>(n, 0.0));
}

double FeFunction::dof_value(int dof) const
{
    const int k = space->free_index[dof];
    return k < 0 ? 0.0 : coeffs[k];
}

double FeFunction::eval_local(int t, const std::array<double, 3>& l) const
{
    double phi[21];
    space->element.values(l, phi);
    const int* d = space->dofs(t);
    double s = 0.0;
    for (int a = 0; a < space->n_local(); ++a)
        s += phi[a] * dof_value(d[a]);
    return s;
}

Point FeFunction::grad_local(int t, const std::array<double, 3>& l) const
{
    double dphi[21][3];
    space->element.bary_derivatives(l, dphi);
    const Geometry G = geometry(*space->mesh, t);
    const int* d = space->dofs(t);
    double gl[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < space->n_local(); ++a) {
        const double c = dof_value(d[a]);
        for (int i = 0; i < 3; ++i)
            gl[i] += c * dphi[a][i];
    }
    Point g;
    for (int i = 0; i < 3; ++i) {
        g.x += gl[i] * G.g[i][0];
        g.y += gl[i] * G.g[i][1];
    }
    return g;
}

double FeFunction::eval(Point p) const
{
    const int t = space->mesh->locate(p);
    if (t < 0)
        throw PointOutsideDomain("FeFunction::eval: point outside the mesh");
    return eval_local(t, space->mesh->barycentric(t, p));
}

FeFunction axpy(const FeFunction& u, double s, const FeFunction& v)
{
    if (u.space != v.space)
        throw DomainError("axpy: functions live on different spaces");
    FeFunction w = u;
    for (std::size_t i = 0; i < w.coeffs.size(); ++i)
        w.coeffs[i] += s * v.coeffs[i];
    return w;
}

// ---------------------------------------------------------------- loads

LoadSpec LoadSpec::density(ScalarFn f)
{
    LoadSpec s;
    s.kind = Kind::density;
    s.f = std::move(f);
    return s;
}

LoadSpec LoadSpec::point(Point x0)
{
    LoadSpec s;
    s.kind = Kind::point;
    s.x0 = x0;
    return s;
}

LoadSpec LoadSpec::line(Point a, Point b)
{
    LoadSpec s;
    s.kind = Kind::line;
    s.a = a;
    s.b = b;
    return s;
}

namespace {

bool on_boundary(const TriMesh& m, Point p, double tol)
{
    for (const auto& be : m.boundary_edges)
        if (distance_to_segment(p, m.vertices[be.a], m.vertices[be.b]) <= tol)
            return true;
    return false;
}

void add_point_values(const FeSpace& S, int t, Point p, double w, std::vector<double>& full)
{
    double phi[21];
    S.element.values(S.mesh->barycentric(t, p), phi);
    const int* d = S.dofs(t);
    for (int a = 0; a < S.n_local(); ++a)
        full[d[a]] += w * phi[a];
}

} // namespace

LoadFunctional assemble_load(const FeSpace& S, const LoadSpec& spec, int quad_degree)
{
    LoadFunctional L;
    L.spec = spec;
    L.full.assign(S.n_dofs(), 0.0);
    const TriMesh& mesh = *S.mesh;
    const int n = S.n_local();
    switch (spec.kind) {
    case LoadSpec::Kind::none:
        break;
    case LoadSpec::Kind::density: {
        if (!spec.f)
            throw DomainError("assemble_load: density load without a function");
        const Tables tab = make_tables(S.element, quad_degree < 0 ? default_quad(S.degree) : quad_degree);
        const auto& R = *tab.rule;
        for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
            const Geometry G = geometry(mesh, static_cast<int>(t));
            const int* d = S.dofs(static_cast<int>(t));
            for (std::size_t q = 0; q < R.size(); ++q) {
                const double fv = spec.f(physical(G, R.l0[q], R.l1[q], R.l2[q])) * R.w[q] * G.area;
                for (int a = 0; a < n; ++a)
                    L.full[d[a]] += fv * tab.phi[q * n + a];
            }
        }
        break;
    }
    case LoadSpec::Kind::point: {
        const int t = mesh.locate(spec.x0);
        if (t < 0 || on_boundary(mesh, spec.x0, 1e-14))
            throw PointOutsideDomain("assemble_load: point must lie strictly inside the domain");
        add_point_values(S, t, spec.x0, spec.weight, L.full);
        break;
    }
    case LoadSpec::Kind::line: {
        const Point a = spec.a, b = spec.b;
        const double len = distance(a, b);
        if (mesh.locate(a) < 0 || mesh.locate(b) < 0)
            throw SegmentOutsideDomain("assemble_load: segment endpoint outside the domain");
        const auto& topo = mesh.topology();
        const Rule1d g = gauss_legendre(S.degree + 1);
        double covered = 0.0;
        const double bx0 = std::min(a.x, b.x), bx1 = std::max(a.x, b.x);
        const double by0 = std::min(a.y, b.y), by1 = std::max(a.y, b.y);
        for (std::size_t tt = 0; tt < mesh.n_triangles(); ++tt) {
            const int t = static_cast<int>(tt);
            const auto& T = mesh.triangles[t];
            double tx0 = 1e300, tx1 = -1e300, ty0 = 1e300, ty1 = -1e300;
            for (int v : T) {
                tx0 = std::min(tx0, mesh.vertices[v].x);
                tx1 = std::max(tx1, mesh.vertices[v].x);
                ty0 = std::min(ty0, mesh.vertices[v].y);
                ty1 = std::max(ty1, mesh.vertices[v].y);
            }
            if (tx1 < bx0 - 1e-14 || tx0 > bx1 + 1e-14 || ty1 < by0 - 1e-14 || ty0 > by1 + 1e-14)
                continue;
            // clip s in [0,1] against l_i(a + s(b-a)) >= 0
            const auto la = mesh.barycentric(t, a);
            const auto lb = mesh.barycentric(t, b);
            double s0 = 0.0, s1 = 1.0;
            const double eps = 1e-13;
            for (int i = 0; i < 3 && s0 <= s1; ++i) {
                const double c0 = la[i], c1 = lb[i] - la[i];
                if (std::abs(c1) < 1e-12) {
                    if (c0 < -eps)
                        s1 = -1.0;
                } else {
                    const double s = -c0 / c1;
                    if (c1 > 0.0)
                        s0 = std::max(s0, s);
                    else
                        s1 = std::min(s1, s);
                }
            }
            if (s1 - s0 <= 0.0 || (s1 - s0) * len < 1e-14)
                continue;
            // a piece lying on an interior edge is shared by both neighbours
            double w = 1.0;
            for (int i = 0; i < 3; ++i) {
                const double e0 = la[i] + s0 * (lb[i] - la[i]);
                const double e1 = la[i] + s1 * (lb[i] - la[i]);
                if (std::abs(e0) < 1e-10 && std::abs(e1) < 1e-10) {
                    const int local_edge = (i + 1) % 3;
                    if (topo.neighbor(t, local_edge) >= 0)
                        w = 0.5;
                }
            }
            const double piece = (s1 - s0) * len;
            covered += w * piece;
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const double s = s0 + 0.5 * (1.0 + g.x[q]) * (s1 - s0);
                const Point p = a + s * (b - a);
                add_point_values(S, t, p, spec.weight * w * 0.5 * g.w[q] * piece, L.full);
            }
        }
        if (std::abs(covered - len) > 1e-9 * std::max(len, 1.0))
            throw SegmentOutsideDomain("assemble_load: segment leaves the domain");
        break;
    }
    }
    L.free.resize(S.n_free());
    for (int i = 0; i < S.n_free(); ++i)
        L.free[i] = L.full[S.free_dofs[i]];
    return L;
}

std::vector<double> load_from_function(const FeSpace& space, const FeFunction& v)
{
    if (v.space.get() != &space)
        throw DomainError("load_from_function: function must live on the same space");
    return space.M * v.coeffs;
}

FeFunction l2_project(const SpacePtr& space, const ScalarFn& f)
{
    const auto L = assemble_load(*space, LoadSpec::density(f));
    return FeFunction(space, space->solve_mass(L.free));
}

FeFunction ritz_project(const SpacePtr& space, const GradFn& grad_v)
{
    const FeSpace& S = *space;
    const int n = S.n_local();
    const Tables tab = make_tables(S.element, default_quad(S.degree));
    const auto& R = *tab.rule;
    std::vector<double> b(S.n_free(), 0.0);
    for (std::size_t t = 0; t < S.mesh->n_triangles(); ++t) {
        const Geometry G = geometry(*S.mesh, static_cast<int>(t));
        const int* d = S.dofs(static_cast<int>(t));
        for (std::size_t q = 0; q < R.size(); ++q) {
            const Point gv = grad_v(physical(G, R.l0[q], R.l1[q], R.l2[q]));
            const double w = R.w[q] * G.area;
            for (int a = 0; a < n; ++a) {
                const int k = S.free_index[d[a]];
                if (k < 0)
                    continue;
                double gx = 0.0, gy = 0.0;
                for (int i = 0; i < 3; ++i) {
                    const double di = tab.dphi[(q * n + a) * 3 + i];
                    gx += di * G.g[i][0];
                    gy += di * G.g[i][1];
                }
                b[k] += w * (gv.x * gx + gv.y * gy);
            }
        }
    }
    return FeFunction(space, space->solve_stiffness(b));
}

FeFunction interpolate(const SpacePtr& space, const ScalarFn& v)
{
    std::vector<double> c(space->n_free());
    for (int i = 0; i < space->n_free(); ++i)
        c[i] = v(space->dof_coords[space->free_dofs[i]]);
    return FeFunction(space, std::move(c));
}

std::vector<FeFunction> discrete_neg_powers(const SpacePtr& space, const LoadFunctional& load, int j)
{
    if (j < 1)
        throw DomainError("discrete_neg_power: j must be at least 1");
    std::vector<FeFunction> out;
    std::vector<double> x = space->solve_stiffness(load.free);
    out.emplace_back(space, x);
    for (int p = 2; p <= j; ++p) {
        x = space->solve_stiffness(space->M * x);
        out.emplace_back(space, x);
    }
    return out;
}

FeFunction discrete_neg_power(const SpacePtr& space, const LoadFunctional& load, int j)
{
    return discrete_neg_powers(space, load, j).back();
}

// ---------------------------------------------------------------- norms

NormResult norms(const FeFunction& u, const ScalarFn& v, const GradFn& grad_v, int quad_degree)
{
    const FeSpace& S = *u.space;
    const auto& R = triangle_rule(quad_degree < 0 ? default_quad(S.degree) : quad_degree);
    double e2 = 0.0, g2 = 0.0, n2 = 0.0;
    for (std::size_t tt = 0; tt < S.mesh->n_triangles(); ++tt) {
        const int t = static_cast<int>(tt);
        const Geometry G = geometry(*S.mesh, t);
        for (std::size_t q = 0; q < R.size(); ++q) {
            const std::array<double, 3> l{R.l0[q], R.l1[q], R.l2[q]};
            const Point x = physical(G, l[0], l[1], l[2]);
            const double w = R.w[q] * G.area;
            const double uh = u.eval_local(t, l);
            const double d = uh - (v ? v(x) : 0.0);
            e2 += w * d * d;
            n2 += w * uh * uh;
            if (grad_v) {
                const Point gu = u.grad_local(t, l);
                const Point gv = grad_v(x);
                g2 += w * ((gu.x - gv.x) * (gu.x - gv.x) + (gu.y - gv.y) * (gu.y - gv.y));
            }
        }
    }
    NormResult r;
    r.l2_error = std::sqrt(e2);
    r.h1_error = grad_v ? std::sqrt(g2) : std::numeric_limits<double>::quiet_NaN();
    r.l2_norm = std::sqrt(n2);
    return r;
}

NormResult norms(const FeFunction& u, const FeFunction& v, int quad_degree)
{
    const TriMesh& mu = *u.space->mesh;
    const TriMesh& mv = *v.space->mesh;
    const bool u_fine = is_ancestor(mu, mv);
    if (!u_fine && !is_ancestor(mv, mu))
        throw NonNestedMeshes("norms: meshes are not nested");
    const FeFunction& fine = u_fine ? u : v;
    const FeFunction& coarse = u_fine ? v : u;
    const TriMesh& mf = *fine.space->mesh;
    const TriMesh& mc = *coarse.space->mesh;
    const auto map = ancestor_map(mf, mc);
    const int deg = quad_degree < 0 ? default_quad(std::max(u.space->degree, v.space->degree)) : quad_degree;
    const auto& R = triangle_rule(deg);
    double e2 = 0.0, g2 = 0.0, n2 = 0.0;
    for (std::size_t tt = 0; tt < mf.n_triangles(); ++tt) {
        const int t = static_cast<int>(tt);
        const int tc = map[t];
        const Geometry G = geometry(mf, t);
        for (std::size_t q = 0; q < R.size(); ++q) {
            const std::array<double, 3> l{R.l0[q], R.l1[q], R.l2[q]};
            const Point x = physical(G, l[0], l[1], l[2]);
            const auto lc = mc.barycentric(tc, x);
            const double w = R.w[q] * G.area;
            const double vf = fine.eval_local(t, l);
            const double vc = coarse.eval_local(tc, lc);
            const double d = vf - vc;
            e2 += w * d * d;
            const double uu = u_fine ? vf : vc;
            n2 += w * uu * uu;
            const Point gf = fine.grad_local(t, l);
            const Point gc = coarse.grad_local(tc, lc);
            g2 += w * ((gf.x - gc.x) * (gf.x - gc.x) + (gf.y - gc.y) * (gf.y - gc.y));
        }
    }
    return {std::sqrt(e2), std::sqrt(g2), std::sqrt(n2)};
}

double l2_norm(const FeFunction& u)
{
    return norms(u, ScalarFn{}).l2_norm;
}

// ---------------------------------------------------------------- export

void write_csv(const FeFunction& u, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("write_csv: cannot open " + path);
    out << std::setprecision(17) << "x,y,value\n";
    const auto& m = *u.space->mesh;
    for (std::size_t v = 0; v < m.n_vertices(); ++v)
        out << m.vertices[v].x << "," << m.vertices[v].y << "," << u.dof_value(static_cast<int>(v)) << "\n";
}

void write_vtk(const FeFunction& u, const std::string& path, const std::string& name)
{
    std::ofstream out(path);
    if (!out)
        throw Error("write_vtk: cannot open " + path);
    const auto& m = *u.space->mesh;
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << m.n_vertices() << " double\n";
    for (const auto& p : m.vertices)
        out << p.x << " " << p.y << " 0\n";
    out << "CELLS " << m.n_triangles() << " " << 4 * m.n_triangles() << "\n";
    for (const auto& t : m.triangles)
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << m.n_triangles() << "\n";
    for (std::size_t t = 0; t < m.n_triangles(); ++t)
        out << "5\n";
    out << "POINT_DATA " << m.n_vertices() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < m.n_vertices(); ++v)
        out << u.dof_value(static_cast<int>(v)) << "\n";
}

} // namespace fracsplit
