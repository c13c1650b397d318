#include "conv/grid.hpp"

#include <algorithm>
#include <cmath>

namespace conv {

Grid build_grid(double lx, double ly, int nx, int ny) {
    if (!(lx > 0.0) || !(ly > 0.0))
        throw invalid_parameter("build_grid: side lengths must be positive");
    if (nx < 2 || ny < 2)
        throw invalid_parameter("build_grid: need at least 2 cells per axis");
    return Grid{lx, ly, nx, ny};
}

Edge edge_from_name(const std::string& name) {
    if (name == "left") return Edge::left;
    if (name == "right") return Edge::right;
    if (name == "bottom") return Edge::bottom;
    if (name == "top") return Edge::top;
    throw invalid_parameter("unknown edge name: " + name);
}

std::string edge_name(Edge e) {
    switch (e) {
        case Edge::left: return "left";
        case Edge::right: return "right";
        case Edge::bottom: return "bottom";
        case Edge::top: return "top";
    }
    return "?";
}

bool BoundaryPartition::contains(Edge e) const {
    return std::find(gamma1.begin(), gamma1.end(), e) != gamma1.end();
}

std::vector<Edge> BoundaryPartition::gamma2() const {
    std::vector<Edge> out;
    for (Edge e : {Edge::left, Edge::right, Edge::bottom, Edge::top})
        if (!contains(e)) out.push_back(e);
    return out;
}

BoundaryPartition make_partition(std::vector<Edge> gamma1) {
    BoundaryPartition bp{std::move(gamma1)};
    if (bp.gamma1.empty())
        throw invalid_parameter("make_partition: gamma1 must be nonempty");
    for (std::size_t a = 0; a < bp.gamma1.size(); ++a)
        for (std::size_t b = a + 1; b < bp.gamma1.size(); ++b)
            if (bp.gamma1[a] == bp.gamma1[b])
                throw invalid_parameter("make_partition: duplicate edge in gamma1");
    // Contiguity around the perimeter: walk the cyclic order
    // bottom -> right -> top -> left and count membership flips.
    const Edge cyc[4] = {Edge::bottom, Edge::right, Edge::top, Edge::left};
    int flips = 0;
    for (int k = 0; k < 4; ++k)
        if (bp.contains(cyc[k]) != bp.contains(cyc[(k + 1) % 4])) ++flips;
    if (flips > 2)
        throw invalid_parameter("make_partition: gamma1 must be contiguous along the perimeter");
    return bp;
}

NodeClass classify_node(const Grid& grid, const BoundaryPartition& bp, int i, int j) {
    if (!grid.is_boundary(i, j)) return NodeClass::interior;
    bool on_g1 = false;
    // Dirichlet wins at corners: membership in any gamma1 edge decides.
    if (i == 0 && bp.contains(Edge::left)) on_g1 = true;
    if (i == grid.nx && bp.contains(Edge::right)) on_g1 = true;
    if (j == 0 && bp.contains(Edge::bottom)) on_g1 = true;
    if (j == grid.ny && bp.contains(Edge::top)) on_g1 = true;
    return on_g1 ? NodeClass::gamma1 : NodeClass::gamma2;
}

VectorField gradient(const ScalarField& u) {
    const Grid& g = u.grid;
    VectorField out(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            double gx;
            if (i == 0)
                gx = (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * hx);
            else if (i == g.nx)
                gx = (3.0 * u.at(g.nx, j) - 4.0 * u.at(g.nx - 1, j) + u.at(g.nx - 2, j)) / (2.0 * hx);
            else
                gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hx);
            double gy;
            if (j == 0)
                gy = (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) / (2.0 * hy);
            else if (j == g.ny)
                gy = (3.0 * u.at(i, g.ny) - 4.0 * u.at(i, g.ny - 1) + u.at(i, g.ny - 2)) / (2.0 * hy);
            else
                gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hy);
            out.xat(i, j) = gx;
            out.yat(i, j) = gy;
        }
    }
    return out;
}

VectorField perp(const VectorField& w) {
    VectorField out(w.grid);
    for (std::size_t k = 0; k < w.x.size(); ++k) {
        out.x[k] = w.y[k];
        out.y[k] = -w.x[k];
    }
    return out;
}

ScalarField laplacian(const ScalarField& u) {
    const Grid& g = u.grid;
    ScalarField out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.at(i, j) = (u.at(i - 1, j) - 2.0 * u.at(i, j) + u.at(i + 1, j)) * ihx2 +
                           (u.at(i, j - 1) - 2.0 * u.at(i, j) + u.at(i, j + 1)) * ihy2;
    return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
    if (!(a.grid == b.grid)) throw invalid_parameter("dot: grid mismatch");
    ScalarField out(a.grid);
    for (std::size_t k = 0; k < a.x.size(); ++k)
        out.v[k] = a.x[k] * b.x[k] + a.y[k] * b.y[k];
    return out;
}

namespace {

double trap_weight(const Grid& g, int i, int j) {
    double w = g.hx() * g.hy();
    if (i == 0 || i == g.nx) w *= 0.5;
    if (j == 0 || j == g.ny) w *= 0.5;
    return w;
}

}  // namespace

double integral(const ScalarField& u) {
    const Grid& g = u.grid;
    double s = 0.0;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) s += trap_weight(g, i, j) * u.at(i, j);
    return s;
}

double inner(const ScalarField& u, const ScalarField& v) {
    if (!(u.grid == v.grid)) throw invalid_parameter("inner: grid mismatch");
    const Grid& g = u.grid;
    double s = 0.0;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) s += trap_weight(g, i, j) * u.at(i, j) * v.at(i, j);
    return s;
}

double l2_norm(const ScalarField& u) { return std::sqrt(inner(u, u)); }

double l2_norm(const VectorField& w) {
    const Grid& g = w.grid;
    double s = 0.0;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const int k = g.index(i, j);
            s += trap_weight(g, i, j) * (w.x[k] * w.x[k] + w.y[k] * w.y[k]);
        }
    return std::sqrt(s);
}

double h1_seminorm(const ScalarField& u) { return l2_norm(gradient(u)); }

double linf_norm(const ScalarField& u) {
    double m = 0.0;
    for (double val : u.v) m = std::max(m, std::abs(val));
    return m;
}

double linf_norm(const VectorField& w) {
    double m = 0.0;
    for (std::size_t k = 0; k < w.x.size(); ++k)
        m = std::max(m, std::hypot(w.x[k], w.y[k]));
    return m;
}

}  // namespace conv
