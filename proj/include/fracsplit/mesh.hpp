#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace fracsplit {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
double distance(Point a, Point b);
double distance_to_segment(Point p, Point a, Point b);

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int marker = 0;
};

// Edge and adjacency data derived from the triangle list.
// Local edge i of a triangle joins vertices i and (i+1)%3.
struct Topology {
    std::vector<std::array<int, 2>> edges;      // (lo, hi)
    std::vector<std::array<int, 3>> tri_edges;  // triangle -> edge ids
    std::vector<std::array<int, 2>> edge_tris;  // edge -> triangles (-1 if none)
    std::vector<std::vector<int>> vertex_tris;  // vertex -> incident triangles
    int find_edge(int a, int b) const;
    int neighbor(int tri, int local_edge) const;

private:
    friend class TriMesh;
    std::vector<std::vector<std::pair<int, int>>> vertex_edges_; // vertex -> (other, edge)
};

class TriMesh;
using MeshPtr = std::shared_ptr<const TriMesh>;

class TriMesh {
public:
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    int level = 0;

    // refinement lineage: every triangle lies inside parent[t] of parent_mesh
    MeshPtr parent_mesh;
    std::vector<int> parent;

    std::uint64_t id() const { return id_; }
    const Topology& topology() const { return topo_; }

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_triangles() const { return triangles.size(); }

    double signed_area(int t) const;
    double area(int t) const { return signed_area(t); }
    double diameter(int t) const;
    Point barycenter(int t) const;
    double max_diameter() const;
    double min_diameter() const;
    double min_angle_deg() const;
    double total_area() const;

    // Barycentric coordinates of p in triangle t.
    std::array<double, 3> barycentric(int t, Point p) const;

    // Containing triangle of p, -1 when outside. Points on shared edges or
    // vertices resolve to the lowest-index containing triangle.
    int locate(Point p, double tol = 1e-12) const;

    // Builds topology, checks orientation and conformity, infers boundary
    // edges (markers of `given` are kept for matching edges).
    static MeshPtr finalize(TriMesh m, bool reorient = false);

private:
    std::uint64_t id_ = 0;
    Topology topo_;
    // coarse bucket grid of start triangles for point location
    int grid_n_ = 0;
    double gx0_ = 0.0, gy0_ = 0.0, gdx_ = 1.0, gdy_ = 1.0;
    std::vector<int> grid_;
    int walk(Point p, int start, double tol) const;
};

struct GradingSpec {
    std::vector<Point> centers;
    double gamma = 0.5;
    double h = 0.1;
    double d0 = 0.25;
    double h_star = 0.0; // <= 0 selects h^{1/gamma}
    std::size_t budget = 2000000;
};

MeshPtr structured_square(int n);

// Unit square triangulated so that the segment p-q is a union of mesh edges.
MeshPtr segment_fitted_square(Point p, Point q);

MeshPtr red_refine(const MeshPtr& mesh);

MeshPtr graded_refine(const MeshPtr& mesh, const GradingSpec& spec);

// Default patch radius: half the distance from c to the boundary of the unit
// square, capped at 0.25.
double default_d0(Point c);

// Maps each triangle of `fine` to its ancestor in `coarse` by walking the
// refinement lineage; throws NonNestedMeshes when `coarse` is not an ancestor.
std::vector<int> ancestor_map(const TriMesh& fine, const TriMesh& coarse);
bool is_ancestor(const TriMesh& fine, const TriMesh& coarse);

// Throws NonConforming when edge-use counts or boundary loops are invalid.
void check_conformity(const TriMesh& mesh);

MeshPtr read_msh(const std::string& path);
void write_msh(const TriMesh& mesh, const std::string& path);

} // namespace fracsplit
