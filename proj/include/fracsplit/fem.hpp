#pragma once

#include "fracsplit/linalg.hpp"
#include "fracsplit/mesh.hpp"

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace fracsplit {

using ScalarFn = std::function<double(Point)>;
using GradFn = std::function<Point(Point)>;

// Lagrange element of degree r on the reference triangle, nodes given by
// barycentric multi-indices: vertices, edge nodes (edge i runs from vertex i
// to vertex i+1), interior nodes.
class LagrangeElement {
public:
    explicit LagrangeElement(int r);
    int degree() const { return r_; }
    int size() const { return static_cast<int>(index_.size()); }
    const std::array<int, 3>& multi_index(int a) const { return index_[a]; }
    int n_edge() const { return r_ - 1; }
    int n_interior() const { return size() - 3 - 3 * (r_ - 1); }

    void values(const std::array<double, 3>& l, double* out) const;
    // derivatives with respect to l0, l1, l2 treated as independent
    void bary_derivatives(const std::array<double, 3>& l, double (*out)[3]) const;

private:
    int r_;
    std::vector<std::array<int, 3>> index_;
};

class FeSpace {
public:
    MeshPtr mesh;
    int degree = 1;
    LagrangeElement element{1};
    std::vector<int> cell_dofs;        // n_triangles x n_local, global numbering
    std::vector<Point> dof_coords;     // all DOFs
    std::vector<int> free_index;       // DOF -> free index, -1 on the boundary
    std::vector<int> free_dofs;        // free index -> DOF
    std::vector<int> boundary_dofs;
    SparseSym M;                       // mass on free DOFs
    SparseSym K;                       // stiffness on free DOFs
    SolverOptions solver;

    int n_local() const { return element.size(); }
    int n_dofs() const { return static_cast<int>(dof_coords.size()); }
    int n_free() const { return static_cast<int>(free_dofs.size()); }
    const int* dofs(int t) const { return cell_dofs.data() + static_cast<std::size_t>(t) * n_local(); }

    // Cached factorizations / preconditioners for K and M.
    std::vector<double> solve_stiffness(const std::vector<double>& b) const;
    std::vector<double> solve_mass(const std::vector<double>& b) const;
    long solver_iterations() const;

private:
    mutable std::mutex mutex_;
    mutable std::unique_ptr<SpdSolver> k_solver_, m_solver_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

SpacePtr build_space(const MeshPtr& mesh, int r, SolverOptions solver = {});

// Mass matrix over all DOFs, boundary included.
SparseSym full_mass_matrix(const FeSpace& space);

struct FeFunction {
    SpacePtr space;
    std::vector<double> coeffs; // free DOFs

    FeFunction() = default;
    FeFunction(SpacePtr s, std::vector<double> c);
    static FeFunction zero(SpacePtr s);

    double dof_value(int dof) const;
    double eval(Point p) const;                               // throws PointOutsideDomain
    double eval_local(int t, const std::array<double, 3>& l) const;
    Point grad_local(int t, const std::array<double, 3>& l) const;
};

// u + s*v on the same space
FeFunction axpy(const FeFunction& u, double s, const FeFunction& v);

struct LoadSpec {
    enum class Kind { none, density, point, line };
    Kind kind = Kind::none;
    ScalarFn f;          // density
    Point x0;            // point
    Point a, b;          // line segment
    double weight = 1.0; // scales point and line loads

    static LoadSpec density(ScalarFn f);
    static LoadSpec point(Point x0);
    static LoadSpec line(Point a, Point b);
};

struct LoadFunctional {
    LoadSpec spec;
    std::vector<double> full; // b_i for every DOF
    std::vector<double> free; // restriction to free DOFs
};

// quad_degree < 0 selects 2r+2 for densities.
LoadFunctional assemble_load(const FeSpace& space, const LoadSpec& spec, int quad_degree = -1);

// Load b_i = (v, phi_i) of a finite element function living on the same
// space or on a nested coarser/finer mesh.
std::vector<double> load_from_function(const FeSpace& space, const FeFunction& v);

FeFunction l2_project(const SpacePtr& space, const ScalarFn& f);
FeFunction ritz_project(const SpacePtr& space, const GradFn& grad_v);
FeFunction interpolate(const SpacePtr& space, const ScalarFn& v);

// phi_1 = K^{-1} b, phi_j = K^{-1} M phi_{j-1}; returns phi_1..phi_j.
std::vector<FeFunction> discrete_neg_powers(const SpacePtr& space, const LoadFunctional& load, int j);
FeFunction discrete_neg_power(const SpacePtr& space, const LoadFunctional& load, int j);

struct NormResult {
    double l2_error = 0.0;
    double h1_error = 0.0; // NaN when no gradient was supplied
    double l2_norm = 0.0;  // of u
};

NormResult norms(const FeFunction& u, const ScalarFn& v, const GradFn& grad_v = {}, int quad_degree = -1);
// Cross-mesh norms on nested meshes; throws NonNestedMeshes otherwise.
NormResult norms(const FeFunction& u, const FeFunction& v, int quad_degree = -1);

double l2_norm(const FeFunction& u);

// Vertex values as "x,y,value" rows.
void write_csv(const FeFunction& u, const std::string& path);
// Legacy ASCII VTK unstructured grid with vertex values.
void write_vtk(const FeFunction& u, const std::string& path, const std::string& name = "u");

} // namespace fracsplit
