#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace conv {

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Uniform node lattice on the rectangle [0,lx] x [0,ly].
/// Nodes sit at (i*hx, j*hy) for 0 <= i <= nx, 0 <= j <= ny.
struct Grid {
    double lx = 0.0;
    double ly = 0.0;
    int nx = 0;
    int ny = 0;

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    int num_nodes() const { return (nx + 1) * (ny + 1); }
    int index(int i, int j) const { return j * (nx + 1) + i; }
    double x(int i) const { return i * hx(); }
    double y(int j) const { return j * hy(); }
    bool is_boundary(int i, int j) const {
        return i == 0 || i == nx || j == 0 || j == ny;
    }
    bool operator==(const Grid&) const = default;
};

Grid build_grid(double lx, double ly, int nx, int ny);

enum class Edge { left, right, bottom, top };

Edge edge_from_name(const std::string& name);
std::string edge_name(Edge e);

/// Splits the four rectangle edges into Gamma1 (Dirichlet for psi) and the
/// complementary Gamma2 (zero-flux).  Gamma1 must be nonempty and each part
/// must be contiguous along the perimeter.  A corner node counts as Gamma1
/// if any adjacent edge is in Gamma1.
struct BoundaryPartition {
    std::vector<Edge> gamma1;

    bool contains(Edge e) const;
    std::vector<Edge> gamma2() const;
};

BoundaryPartition make_partition(std::vector<Edge> gamma1);

enum class NodeClass { interior, gamma1, gamma2 };

NodeClass classify_node(const Grid& grid, const BoundaryPartition& bp, int i, int j);

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double init = 0.0)
        : grid(g), v(static_cast<std::size_t>(g.num_nodes()), init) {}

    double& at(int i, int j) { return v[grid.index(i, j)]; }
    double at(int i, int j) const { return v[grid.index(i, j)]; }
};

struct VectorField {
    Grid grid;
    std::vector<double> x;
    std::vector<double> y;

    VectorField() = default;
    explicit VectorField(const Grid& g, double ix = 0.0, double iy = 0.0)
        : grid(g),
          x(static_cast<std::size_t>(g.num_nodes()), ix),
          y(static_cast<std::size_t>(g.num_nodes()), iy) {}

    double& xat(int i, int j) { return x[grid.index(i, j)]; }
    double xat(int i, int j) const { return x[grid.index(i, j)]; }
    double& yat(int i, int j) { return y[grid.index(i, j)]; }
    double yat(int i, int j) const { return y[grid.index(i, j)]; }
};

/// Second-order gradient: central differences inside, one-sided
/// three-point stencils on the boundary.  Exact on quadratics inside.
VectorField gradient(const ScalarField& u);

/// (u, v) -> (v, -u) at every node.
VectorField perp(const VectorField& w);

/// 5-point Laplacian at interior nodes; boundary entries are left at zero
/// (residuals are only ever evaluated inside).
ScalarField laplacian(const ScalarField& u);

/// Pointwise dot product of two vector fields.
ScalarField dot(const VectorField& a, const VectorField& b);

// Trapezoidal product-rule integrals (boundary weights 1/2, corners 1/4).
double integral(const ScalarField& u);
double inner(const ScalarField& u, const ScalarField& v);
double l2_norm(const ScalarField& u);
double l2_norm(const VectorField& w);
double h1_seminorm(const ScalarField& u);
double linf_norm(const ScalarField& u);
/// Max over nodes of the Euclidean magnitude |w(node)|.
double linf_norm(const VectorField& w);

}  // namespace conv
