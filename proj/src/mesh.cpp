#include "fracsplit/mesh.hpp"

#include "fracsplit/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace fracsplit {

double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double distance_to_segment(Point p, Point a, Point b)
{
    const Point d = b - a;
    const double L2 = d.x * d.x + d.y * d.y;
    if (L2 == 0.0)
        return distance(p, a);
    double s = ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / L2;
    s = std::clamp(s, 0.0, 1.0);
    return distance(p, a + s * d);
}

namespace {

std::atomic<std::uint64_t> next_mesh_id{1};

std::uint64_t edge_key(int a, int b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double cross(Point a, Point b)
{
    return a.x * b.y - a.y * b.x;
}

} // namespace

int Topology::find_edge(int a, int b) const
{
    if (a < 0 || a >= static_cast<int>(vertex_edges_.size()))
        return -1;
    for (const auto& [other, e] : vertex_edges_[a])
        if (other == b)
            return e;
    return -1;
}

int Topology::neighbor(int tri, int local_edge) const
{
    const int e = tri_edges[tri][local_edge];
    const auto& et = edge_tris[e];
    return et[0] == tri ? et[1] : et[0];
}

double TriMesh::signed_area(int t) const
{
    const auto& T = triangles[t];
    const Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
    return 0.5 * cross(b - a, c - a);
}

double TriMesh::diameter(int t) const
{
    const auto& T = triangles[t];
    const Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
    return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

Point TriMesh::barycenter(int t) const
{
    const auto& T = triangles[t];
    const Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double TriMesh::max_diameter() const
{
    double h = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        h = std::max(h, diameter(static_cast<int>(t)));
    return h;
}

double TriMesh::min_diameter() const
{
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < triangles.size(); ++t)
        h = std::min(h, diameter(static_cast<int>(t)));
    return h;
}

double TriMesh::min_angle_deg() const
{
    double amin = 180.0;
    for (const auto& T : triangles) {
        for (int i = 0; i < 3; ++i) {
            const Point p = vertices[T[i]];
            const Point u = vertices[T[(i + 1) % 3]] - p;
            const Point v = vertices[T[(i + 2) % 3]] - p;
            const double ang = std::atan2(std::abs(cross(u, v)), u.x * v.x + u.y * v.y);
            amin = std::min(amin, ang * 180.0 / std::numbers::pi);
        }
    }
    return amin;
}

double TriMesh::total_area() const
{
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        s += signed_area(static_cast<int>(t));
    return s;
}

std::array<double, 3> TriMesh::barycentric(int t, Point p) const
{
    const auto& T = triangles[t];
    const Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
    const double det = cross(b - a, c - a);
    const double l1 = cross(p - a, c - a) / det;
    const double l2 = cross(b - a, p - a) / det;
    return {1.0 - l1 - l2, l1, l2};
}

int TriMesh::walk(Point p, int t, double tol) const
{
    const int nt = static_cast<int>(triangles.size());
    for (int step = 0; step < nt + 8; ++step) {
        const auto l = barycentric(t, p);
        int worst = 0;
        for (int i = 1; i < 3; ++i)
            if (l[i] < l[worst])
                worst = i;
        if (l[worst] >= -tol)
            return t;
        // edge opposite vertex `worst` is local edge worst+1
        const int nb = topo_.neighbor(t, (worst + 1) % 3);
        if (nb < 0)
            return -1;
        t = nb;
    }
    return -1;
}

int TriMesh::locate(Point p, double tol) const
{
    if (triangles.empty())
        return -1;
    int start = 0;
    if (grid_n_ > 0) {
        const int i = std::clamp(static_cast<int>((p.x - gx0_) / gdx_), 0, grid_n_ - 1);
        const int j = std::clamp(static_cast<int>((p.y - gy0_) / gdy_), 0, grid_n_ - 1);
        start = grid_[j * grid_n_ + i];
    }
    int t = walk(p, start, tol);
    if (t < 0) {
        // non-convex domains or degenerate walks
        for (std::size_t s = 0; s < triangles.size(); ++s) {
            const auto l = barycentric(static_cast<int>(s), p);
            if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) {
                t = static_cast<int>(s);
                break;
            }
        }
        if (t < 0)
            return -1;
    }
    const auto l = barycentric(t, p);
    if (std::min({l[0], l[1], l[2]}) > tol)
        return t;
    int best = t;
    for (int v : triangles[t])
        for (int s : topo_.vertex_tris[v]) {
            if (s >= best)
                continue;
            const auto ls = barycentric(s, p);
            if (ls[0] >= -tol && ls[1] >= -tol && ls[2] >= -tol)
                best = s;
        }
    return best;
}

namespace {

// Shared by finalize and check_conformity.
void build_topology(const TriMesh& m, Topology& topo, std::vector<std::vector<std::pair<int, int>>>& vedges)
{
    const int nv = static_cast<int>(m.vertices.size());
    const int nt = static_cast<int>(m.triangles.size());
    vedges.assign(nv, {});
    topo.edges.clear();
    topo.tri_edges.assign(nt, {-1, -1, -1});
    topo.edge_tris.clear();
    topo.vertex_tris.assign(nv, {});
    std::unordered_map<std::uint64_t, int> ids;
    ids.reserve(3 * nt / 2 + 16);
    for (int t = 0; t < nt; ++t) {
        const auto& T = m.triangles[t];
        for (int i = 0; i < 3; ++i) {
            if (T[i] < 0 || T[i] >= nv)
                throw NonConforming("triangle references a missing vertex");
            topo.vertex_tris[T[i]].push_back(t);
            const int a = T[i], b = T[(i + 1) % 3];
            if (a == b)
                throw NonConforming("degenerate triangle");
            const auto key = edge_key(a, b);
            auto it = ids.find(key);
            int e;
            if (it == ids.end()) {
                e = static_cast<int>(topo.edges.size());
                ids.emplace(key, e);
                topo.edges.push_back({std::min(a, b), std::max(a, b)});
                topo.edge_tris.push_back({t, -1});
                vedges[a].push_back({b, e});
                vedges[b].push_back({a, e});
            } else {
                e = it->second;
                if (topo.edge_tris[e][1] != -1)
                    throw NonConforming("edge shared by more than two triangles");
                topo.edge_tris[e][1] = t;
            }
            topo.tri_edges[t][i] = e;
        }
    }
}

// Boundary edges oriented as in their triangle; checks closed, unfolded loops.
std::vector<BoundaryEdge> boundary_of(const TriMesh& m, const Topology& topo)
{
    std::vector<BoundaryEdge> out;
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (int i = 0; i < 3; ++i) {
            const int e = topo.tri_edges[t][i];
            if (topo.edge_tris[e][1] == -1)
                out.push_back({m.triangles[t][i], m.triangles[t][(i + 1) % 3], 0});
        }
    const int nv = static_cast<int>(m.vertices.size());
    std::vector<int> out_edge(nv, -1), in_edge(nv, -1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& be = out[k];
        if (out_edge[be.a] != -1 || in_edge[be.b] != -1)
            throw NonConforming("boundary is not a set of simple closed loops");
        out_edge[be.a] = static_cast<int>(k);
        in_edge[be.b] = static_cast<int>(k);
    }
    for (int v = 0; v < nv; ++v) {
        if ((out_edge[v] == -1) != (in_edge[v] == -1))
            throw NonConforming("open boundary chain");
        if (out_edge[v] == -1)
            continue;
        // a folded boundary vertex signals a hanging node
        const Point p = m.vertices[v];
        const Point u = m.vertices[out[in_edge[v]].a] - p;
        const Point w = m.vertices[out[out_edge[v]].b] - p;
        const double c = cross(u, w);
        const double d = u.x * w.x + u.y * w.y;
        if (std::abs(c) <= 1e-12 * std::hypot(u.x, u.y) * std::hypot(w.x, w.y) && d > 0.0)
            throw NonConforming("hanging node on an edge");
    }
    return out;
}

} // namespace

void check_conformity(const TriMesh& mesh)
{
    Topology topo;
    std::vector<std::vector<std::pair<int, int>>> ve;
    build_topology(mesh, topo, ve);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (!(mesh.signed_area(static_cast<int>(t)) > 0.0))
            throw NonConforming("triangle with non-positive orientation");
    boundary_of(mesh, topo);
}

MeshPtr TriMesh::finalize(TriMesh m, bool reorient)
{
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        double a = m.signed_area(static_cast<int>(t));
        if (reorient && a < 0.0) {
            std::swap(m.triangles[t][1], m.triangles[t][2]);
            a = -a;
        }
        if (!(a > 0.0))
            throw NonConforming("triangle with non-positive orientation");
    }
    build_topology(m, m.topo_, m.topo_.vertex_edges_);
    auto bnd = boundary_of(m, m.topo_);
    std::unordered_map<std::uint64_t, int> markers;
    for (const auto& be : m.boundary_edges)
        markers[edge_key(be.a, be.b)] = be.marker;
    for (auto& be : bnd) {
        auto it = markers.find(edge_key(be.a, be.b));
        if (it != markers.end())
            be.marker = it->second;
    }
    m.boundary_edges = std::move(bnd);
    m.id_ = next_mesh_id.fetch_add(1);

    // bucket grid for locate()
    if (!m.triangles.empty()) {
        double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
        for (const auto& v : m.vertices) {
            x0 = std::min(x0, v.x);
            x1 = std::max(x1, v.x);
            y0 = std::min(y0, v.y);
            y1 = std::max(y1, v.y);
        }
        m.grid_n_ = std::max(1, static_cast<int>(std::sqrt(m.triangles.size() / 2.0)));
        m.gx0_ = x0;
        m.gy0_ = y0;
        m.gdx_ = std::max(x1 - x0, 1e-300) / m.grid_n_;
        m.gdy_ = std::max(y1 - y0, 1e-300) / m.grid_n_;
        m.grid_.assign(static_cast<std::size_t>(m.grid_n_) * m.grid_n_, -1);
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            const Point c = m.barycenter(static_cast<int>(t));
            const int i = std::clamp(static_cast<int>((c.x - x0) / m.gdx_), 0, m.grid_n_ - 1);
            const int j = std::clamp(static_cast<int>((c.y - y0) / m.gdy_), 0, m.grid_n_ - 1);
            auto& g = m.grid_[j * m.grid_n_ + i];
            if (g < 0)
                g = static_cast<int>(t);
        }
        int last = 0;
        for (auto& g : m.grid_) {
            if (g < 0)
                g = last;
            last = g;
        }
    }
    return std::make_shared<const TriMesh>(std::move(m));
}

MeshPtr structured_square(int n)
{
    if (n < 1)
        throw DomainError("structured_square: n must be positive");
    TriMesh m;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            // diagonal of positive slope
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    for (int i = 0; i < n; ++i) {
        m.boundary_edges.push_back({id(i, 0), id(i + 1, 0), 1});
        m.boundary_edges.push_back({id(n, i), id(n, i + 1), 2});
        m.boundary_edges.push_back({id(i + 1, n), id(i, n), 3});
        m.boundary_edges.push_back({id(0, i + 1), id(0, i), 4});
    }
    return TriMesh::finalize(std::move(m));
}

MeshPtr segment_fitted_square(Point p, Point q)
{
    auto inside = [](Point a) { return a.x > 0.0 && a.x < 1.0 && a.y > 0.0 && a.y < 1.0; };
    if (!inside(p) || !inside(q))
        throw SegmentOutsideDomain("segment_fitted_square: endpoints must be interior");
    for (int attempt = 0; attempt < 2; ++attempt) {
        TriMesh m;
        m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, p, q};
        m.triangles = {{3, 0, 4}, {0, 5, 4}, {0, 1, 5}, {1, 2, 5}, {2, 4, 5}, {2, 3, 4}};
        bool ok = true;
        for (int t = 0; t < 6; ++t)
            ok = ok && m.signed_area(t) > 0.0;
        if (ok && std::abs(m.total_area() - 1.0) < 1e-12) {
            m.boundary_edges = {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {3, 0, 4}};
            return TriMesh::finalize(std::move(m));
        }
        std::swap(p, q);
    }
    throw UnsupportedDomain("segment_fitted_square: segment orientation not supported by the base template");
}

MeshPtr red_refine(const MeshPtr& mesh)
{
    const TriMesh& c = *mesh;
    const auto& topo = c.topology();
    TriMesh m;
    const int nv = static_cast<int>(c.vertices.size());
    m.vertices = c.vertices;
    for (const auto& e : topo.edges)
        m.vertices.push_back(0.5 * (c.vertices[e[0]] + c.vertices[e[1]]));
    m.triangles.reserve(4 * c.triangles.size());
    m.parent.reserve(4 * c.triangles.size());
    for (std::size_t t = 0; t < c.triangles.size(); ++t) {
        const auto& T = c.triangles[t];
        const auto& E = topo.tri_edges[t];
        const int m0 = nv + E[0], m1 = nv + E[1], m2 = nv + E[2];
        m.triangles.push_back({T[0], m0, m2});
        m.triangles.push_back({m0, T[1], m1});
        m.triangles.push_back({m2, m1, T[2]});
        m.triangles.push_back({m0, m1, m2});
        for (int k = 0; k < 4; ++k)
            m.parent.push_back(static_cast<int>(t));
    }
    for (const auto& be : c.boundary_edges) {
        const int mid = nv + topo.find_edge(be.a, be.b);
        m.boundary_edges.push_back({be.a, mid, be.marker});
        m.boundary_edges.push_back({mid, be.b, be.marker});
    }
    m.level = c.level + 1;
    m.parent_mesh = mesh;
    return TriMesh::finalize(std::move(m));
}

double default_d0(Point c)
{
    const double db = std::min({c.x, 1.0 - c.x, c.y, 1.0 - c.y});
    return std::min(0.25, 0.5 * db);
}

namespace {

// Local index i such that edge (i, i+1) is the longest; ties go to the
// smaller global edge id.
int longest_local_edge(const TriMesh& m, int t)
{
    const auto& T = m.triangles[t];
    const auto& E = m.topology().tri_edges[t];
    int best = 0;
    double bl = -1.0;
    for (int i = 0; i < 3; ++i) {
        const Point d = m.vertices[T[(i + 1) % 3]] - m.vertices[T[i]];
        const double l = d.x * d.x + d.y * d.y;
        if (l > bl * (1.0 + 1e-12)) {
            best = i;
            bl = l;
        } else if (l >= bl * (1.0 - 1e-12) && E[i] < E[best]) {
            best = i;
            bl = std::max(bl, l);
        }
    }
    return best;
}

// One pass of longest-edge bisection with conforming closure.
TriMesh bisect(const TriMesh& c, const std::vector<char>& marked)
{
    const auto& topo = c.topology();
    const int nt = static_cast<int>(c.triangles.size());
    std::vector<int> longest(nt);
    for (int t = 0; t < nt; ++t)
        longest[t] = longest_local_edge(c, t);
    std::vector<char> edge_marked(topo.edges.size(), 0);
    std::vector<int> stack;
    auto mark_edge = [&](int e) {
        if (!edge_marked[e]) {
            edge_marked[e] = 1;
            stack.push_back(e);
        }
    };
    for (int t = 0; t < nt; ++t)
        if (marked[t])
            mark_edge(topo.tri_edges[t][longest[t]]);
    while (!stack.empty()) {
        const int e = stack.back();
        stack.pop_back();
        for (int t : topo.edge_tris[e])
            if (t >= 0)
                mark_edge(topo.tri_edges[t][longest[t]]);
    }

    TriMesh m;
    m.vertices = c.vertices;
    std::vector<int> mid(topo.edges.size(), -1);
    for (std::size_t e = 0; e < topo.edges.size(); ++e)
        if (edge_marked[e]) {
            mid[e] = static_cast<int>(m.vertices.size());
            m.vertices.push_back(0.5 * (c.vertices[topo.edges[e][0]] + c.vertices[topo.edges[e][1]]));
        }
    for (int t = 0; t < nt; ++t) {
        const auto& T = c.triangles[t];
        const auto& E = topo.tri_edges[t];
        const int L = longest[t];
        if (!edge_marked[E[L]]) {
            m.triangles.push_back(T);
            m.parent.push_back(t);
            continue;
        }
        const int p0 = T[L], p1 = T[(L + 1) % 3], p2 = T[(L + 2) % 3];
        const int mm = mid[E[L]];
        const int m12 = mid[E[(L + 1) % 3]];
        const int m20 = mid[E[(L + 2) % 3]];
        if (m20 < 0) {
            m.triangles.push_back({p0, mm, p2});
        } else {
            m.triangles.push_back({p0, mm, m20});
            m.triangles.push_back({mm, p2, m20});
        }
        if (m12 < 0) {
            m.triangles.push_back({mm, p1, p2});
        } else {
            m.triangles.push_back({mm, p1, m12});
            m.triangles.push_back({mm, m12, p2});
        }
        while (m.parent.size() < m.triangles.size())
            m.parent.push_back(t);
    }
    for (const auto& be : c.boundary_edges) {
        const int e = topo.find_edge(be.a, be.b);
        if (mid[e] < 0) {
            m.boundary_edges.push_back(be);
        } else {
            m.boundary_edges.push_back({be.a, mid[e], be.marker});
            m.boundary_edges.push_back({mid[e], be.b, be.marker});
        }
    }
    m.level = c.level;
    return m;
}

} // namespace

MeshPtr graded_refine(const MeshPtr& mesh, const GradingSpec& spec)
{
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
        throw DomainError("graded_refine: gamma must lie in (0,1)");
    if (!(spec.h > 0.0) || !(spec.d0 > 0.0))
        throw DomainError("graded_refine: h and d0 must be positive");
    const double h_star = spec.h_star > 0.0 ? spec.h_star : std::pow(spec.h, 1.0 / spec.gamma);
    if (h_star > spec.h)
        throw DomainError("graded_refine: h_star must not exceed h");

    auto violates = [&](const TriMesh& m, int t) {
        const Point b = m.barycenter(t);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : spec.centers)
            d = std::min(d, distance(b, c));
        if (d > spec.d0)
            return false;
        const double target = std::max(h_star, std::pow(d, 1.0 - spec.gamma) * spec.h);
        return m.diameter(t) > target;
    };

    MeshPtr cur = mesh;
    std::vector<int> to_input(mesh->n_triangles());
    for (std::size_t t = 0; t < to_input.size(); ++t)
        to_input[t] = static_cast<int>(t);
    for (;;) {
        const int nt = static_cast<int>(cur->n_triangles());
        std::vector<char> marked(nt, 0);
        bool any = false;
        for (int t = 0; t < nt; ++t)
            if (violates(*cur, t))
                marked[t] = any = true;
        if (!any)
            break;
        TriMesh next = bisect(*cur, marked);
        if (next.triangles.size() > spec.budget)
            throw BudgetExceeded("graded_refine: triangle budget exceeded");
        std::vector<int> map(next.triangles.size());
        for (std::size_t t = 0; t < map.size(); ++t)
            map[t] = to_input[next.parent[t]];
        to_input = std::move(map);
        next.parent.clear();
        cur = TriMesh::finalize(std::move(next));
    }
    TriMesh out = *cur;
    out.parent_mesh = mesh;
    out.parent = std::move(to_input);
    out.level = mesh->level;
    return TriMesh::finalize(std::move(out));
}

std::vector<int> ancestor_map(const TriMesh& fine, const TriMesh& coarse)
{
    std::vector<int> map(fine.n_triangles());
    for (std::size_t t = 0; t < map.size(); ++t)
        map[t] = static_cast<int>(t);
    const TriMesh* cur = &fine;
    while (cur->id() != coarse.id()) {
        if (!cur->parent_mesh)
            throw NonNestedMeshes("meshes are not related by refinement");
        for (auto& t : map)
            t = cur->parent[t];
        cur = cur->parent_mesh.get();
    }
    return map;
}

bool is_ancestor(const TriMesh& fine, const TriMesh& coarse)
{
    const TriMesh* cur = &fine;
    while (cur) {
        if (cur->id() == coarse.id())
            return true;
        cur = cur->parent_mesh.get();
    }
    return false;
}

MeshPtr read_msh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("read_msh: cannot open " + path);
    long lineno = 0;
    std::string line;
    auto next_line = [&](const char* what) -> std::string {
        if (!std::getline(in, line))
            throw ParseError(std::string("read_msh: unexpected end of file while reading ") + what, lineno + 1);
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    };
    auto expect = [&](const std::string& tag) {
        const auto l = next_line(tag.c_str());
        if (l != tag)
            throw ParseError("read_msh: expected " + tag, lineno);
    };

    std::map<long, int> node_index;
    std::vector<Point> nodes;
    std::vector<std::array<long, 3>> tris;
    std::vector<std::array<long, 3>> lines; // a, b, marker
    bool have_format = false, have_nodes = false, have_elements = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line == "$MeshFormat") {
            std::istringstream ss(next_line("$MeshFormat"));
            double version = 0;
            int filetype = -1;
            if (!(ss >> version >> filetype))
                throw ParseError("read_msh: malformed format line", lineno);
            if (version < 2.0 || version >= 3.0 || filetype != 0)
                throw ParseError("read_msh: only ASCII MSH 2.x is supported", lineno);
            expect("$EndMeshFormat");
            have_format = true;
        } else if (line == "$Nodes") {
            std::istringstream hs(next_line("$Nodes"));
            long n = -1;
            if (!(hs >> n) || n < 0)
                throw ParseError("read_msh: bad node count", lineno);
            for (long i = 0; i < n; ++i) {
                std::istringstream ss(next_line("$Nodes"));
                long id;
                double x, y, z;
                if (!(ss >> id >> x >> y >> z))
                    throw ParseError("read_msh: malformed node", lineno);
                if (std::abs(z) > 1e-12)
                    throw NonPlanar("read_msh: node with nonzero z at line " + std::to_string(lineno));
                node_index[id] = static_cast<int>(nodes.size());
                nodes.push_back({x, y});
            }
            expect("$EndNodes");
            have_nodes = true;
        } else if (line == "$Elements") {
            std::istringstream hs(next_line("$Elements"));
            long n = -1;
            if (!(hs >> n) || n < 0)
                throw ParseError("read_msh: bad element count", lineno);
            for (long i = 0; i < n; ++i) {
                std::istringstream ss(next_line("$Elements"));
                long id, type, ntags;
                if (!(ss >> id >> type >> ntags) || ntags < 0)
                    throw ParseError("read_msh: malformed element", lineno);
                std::vector<long> tags(ntags);
                for (auto& t : tags)
                    if (!(ss >> t))
                        throw ParseError("read_msh: malformed element tags", lineno);
                const int nn = type == 1 ? 2 : type == 2 ? 3 : type == 15 ? 1 : -1;
                if (nn < 0)
                    throw ParseError("read_msh: unsupported element type " + std::to_string(type), lineno);
                std::array<long, 3> v{0, 0, 0};
                for (int k = 0; k < nn; ++k)
                    if (!(ss >> v[k]))
                        throw ParseError("read_msh: missing element nodes", lineno);
                for (int k = 0; k < nn; ++k)
                    if (!node_index.count(v[k]))
                        throw ParseError("read_msh: element references unknown node", lineno);
                if (type == 2)
                    tris.push_back(v);
                else if (type == 1)
                    lines.push_back({v[0], v[1], tags.empty() ? 0 : tags[0]});
            }
            expect("$EndElements");
            have_elements = true;
        } else if (line.front() == '$') {
            // skip unknown sections
            const std::string end = "$End" + line.substr(1);
            for (;;)
                if (next_line(line.c_str()) == end)
                    break;
        } else {
            throw ParseError("read_msh: unexpected content", lineno);
        }
    }
    if (!have_format || !have_nodes || !have_elements)
        throw ParseError("read_msh: missing required section", lineno + 1);
    if (tris.empty())
        throw ParseError("read_msh: no triangle elements", lineno + 1);

    TriMesh m;
    std::vector<int> remap(nodes.size(), -1);
    auto use = [&](long id) {
        const int k = node_index.at(id);
        if (remap[k] < 0) {
            remap[k] = static_cast<int>(m.vertices.size());
            m.vertices.push_back(nodes[k]);
        }
        return remap[k];
    };
    for (const auto& t : tris)
        m.triangles.push_back({use(t[0]), use(t[1]), use(t[2])});
    for (const auto& l : lines) {
        const int a = remap[node_index.at(l[0])], b = remap[node_index.at(l[1])];
        if (a >= 0 && b >= 0)
            m.boundary_edges.push_back({a, b, static_cast<int>(l[2])});
    }
    return TriMesh::finalize(std::move(m), true);
}

void write_msh(const TriMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("write_msh: cannot open " + path);
    out << std::setprecision(17);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.vertices.size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        out << i + 1 << " " << mesh.vertices[i].x << " " << mesh.vertices[i].y << " 0\n";
    out << "$EndNodes\n";
    out << "$Elements\n" << mesh.boundary_edges.size() + mesh.triangles.size() << "\n";
    std::size_t id = 1;
    for (const auto& be : mesh.boundary_edges)
        out << id++ << " 1 2 " << be.marker << " " << be.marker << " " << be.a + 1 << " " << be.b + 1 << "\n";
    for (const auto& t : mesh.triangles)
        out << id++ << " 2 2 0 1 " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    out << "$EndElements\n";
    if (!out)
        throw Error("write_msh: write failed for " + path);
}

} // namespace fracsplit
