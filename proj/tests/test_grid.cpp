#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conv/grid.hpp"

using namespace conv;

TEST_CASE("grid geometry and indexing") {
    Grid g = build_grid(2.0, 1.0, 4, 5);
    CHECK(g.hx() == doctest::Approx(0.5));
    CHECK(g.hy() == doctest::Approx(0.2));
    CHECK(g.num_nodes() == 30);
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(4, 0) == 4);
    CHECK(g.index(0, 1) == 5);
    CHECK(g.x(3) == doctest::Approx(1.5));
    CHECK(g.y(5) == doctest::Approx(1.0));
    CHECK(g.is_boundary(0, 2));
    CHECK(g.is_boundary(2, 5));
    CHECK(!g.is_boundary(2, 2));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(build_grid(0.0, 1.0, 4, 4), invalid_parameter);
    CHECK_THROWS_AS(build_grid(1.0, -1.0, 4, 4), invalid_parameter);
    CHECK_THROWS_AS(build_grid(1.0, 1.0, 1, 4), invalid_parameter);
    CHECK_THROWS_AS(build_grid(1.0, 1.0, 4, 0), invalid_parameter);
}

TEST_CASE("edge names round-trip") {
    for (Edge e : {Edge::left, Edge::right, Edge::bottom, Edge::top})
        CHECK(edge_from_name(edge_name(e)) == e);
    CHECK_THROWS_AS(edge_from_name("north"), invalid_parameter);
}

TEST_CASE("boundary partition contiguity") {
    CHECK_NOTHROW(make_partition({Edge::left}));
    CHECK_NOTHROW(make_partition({Edge::bottom, Edge::right}));
    CHECK_NOTHROW(make_partition({Edge::top, Edge::left, Edge::bottom}));
    CHECK_NOTHROW(make_partition({Edge::left, Edge::right, Edge::bottom, Edge::top}));
    // opposite edges alone split both parts
    CHECK_THROWS_AS(make_partition({Edge::left, Edge::right}), invalid_parameter);
    CHECK_THROWS_AS(make_partition({Edge::bottom, Edge::top}), invalid_parameter);
    CHECK_THROWS_AS(make_partition({}), invalid_parameter);
    CHECK_THROWS_AS(make_partition({Edge::left, Edge::left}), invalid_parameter);
}

TEST_CASE("node classification, corner favors gamma1") {
    Grid g = build_grid(1.0, 1.0, 4, 4);
    BoundaryPartition bp = make_partition({Edge::left});
    CHECK(classify_node(g, bp, 2, 2) == NodeClass::interior);
    CHECK(classify_node(g, bp, 0, 2) == NodeClass::gamma1);
    CHECK(classify_node(g, bp, 4, 2) == NodeClass::gamma2);
    CHECK(classify_node(g, bp, 2, 0) == NodeClass::gamma2);
    // corners adjacent to the left edge are Dirichlet
    CHECK(classify_node(g, bp, 0, 0) == NodeClass::gamma1);
    CHECK(classify_node(g, bp, 0, 4) == NodeClass::gamma1);
    CHECK(classify_node(g, bp, 4, 0) == NodeClass::gamma2);
}

namespace {

ScalarField sample(const Grid& g, double (*f)(double, double)) {
    ScalarField u(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) u.at(i, j) = f(g.x(i), g.y(j));
    return u;
}

}  // namespace

TEST_CASE("gradient exact on quadratics at interior nodes") {
    Grid g = build_grid(1.5, 1.0, 12, 10);
    ScalarField u = sample(g, [](double x, double y) { return x * x + 3.0 * x * y - y * y; });
    VectorField gu = gradient(u);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            CHECK(gu.xat(i, j) == doctest::Approx(2.0 * g.x(i) + 3.0 * g.y(j)).epsilon(1e-10));
            CHECK(gu.yat(i, j) == doctest::Approx(3.0 * g.x(i) - 2.0 * g.y(j)).epsilon(1e-10));
        }
}

TEST_CASE("perp rotates and preserves magnitude") {
    Grid g = build_grid(1.0, 1.0, 4, 4);
    VectorField w(g, 2.0, -3.0);
    VectorField p = perp(w);
    CHECK(p.xat(1, 1) == doctest::Approx(-3.0));
    CHECK(p.yat(1, 1) == doctest::Approx(-2.0));
    // w . perp(w) = 0 pointwise
    ScalarField z = dot(w, p);
    for (double v : z.v) CHECK(v == doctest::Approx(0.0));
    CHECK(linf_norm(p) == doctest::Approx(linf_norm(w)));
}

TEST_CASE("laplacian of a harmonic polynomial vanishes inside") {
    Grid g = build_grid(1.0, 2.0, 8, 8);
    ScalarField u = sample(g, [](double x, double y) { return x * x - y * y + 2.0 * x * y; });
    ScalarField lap = laplacian(u);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            CHECK(std::abs(lap.at(i, j)) < 1e-9);
    CHECK(lap.at(0, 3) == 0.0);  // boundary rows untouched
}

TEST_CASE("trapezoid integral exact for bilinear integrands") {
    Grid g = build_grid(2.0, 3.0, 7, 9);
    ScalarField one(g, 1.0);
    CHECK(integral(one) == doctest::Approx(6.0));
    ScalarField xy = sample(g, [](double x, double y) { return x * y; });
    CHECK(integral(xy) == doctest::Approx(2.0 * 4.5));
    CHECK(inner(one, xy) == doctest::Approx(9.0));
}

TEST_CASE("norms on a known field") {
    Grid g = build_grid(1.0, 1.0, 64, 64);
    const double pi = std::acos(-1.0);
    ScalarField u(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            u.at(i, j) = std::sin(pi * g.x(i)) * std::sin(pi * g.y(j));
    // ||u||_2 = 1/2, |u|_H1 = pi/sqrt(2), ||u||_inf = 1 (node hit at 32,32)
    CHECK(l2_norm(u) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(h1_seminorm(u) == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(linf_norm(u) == doctest::Approx(1.0));
    VectorField w(g, 3.0, 4.0);
    CHECK(linf_norm(w) == doctest::Approx(5.0));
    CHECK(l2_norm(w) == doctest::Approx(5.0));
}
