#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "conv/analysis.hpp"
#include "conv/grid.hpp"

using namespace conv;

namespace {

const double pi = std::acos(-1.0);

// Smooth random field from low-frequency sine modes, zero on the boundary.
// Rough nodal noise is useless here: its central-difference gradient nearly
// vanishes, so norms would not behave like their continuous counterparts.
ScalarField smooth_random(const Grid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double a[3][3];
    for (auto& row : a)
        for (double& c : row) c = coef(rng);
    ScalarField u(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double s = 0.0;
            for (int k = 1; k <= 3; ++k)
                for (int l = 1; l <= 3; ++l)
                    s += a[k - 1][l - 1] * std::sin(k * pi * g.x(i) / g.lx) *
                         std::sin(l * pi * g.y(j) / g.ly);
            u.at(i, j) = s;
        }
    return u;
}

ScalarField sample(const Grid& g, double (*f)(double, double)) {
    ScalarField u(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) u.at(i, j) = f(g.x(i), g.y(j));
    return u;
}

}  // namespace

TEST_CASE("skew-symmetrized trilinear form vanishes on equal arguments") {
    Grid g = build_grid(1.0, 1.0, 20, 20);
    std::mt19937 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField u = smooth_random(g, rng);
        ScalarField w = smooth_random(g, rng);
        const double scale =
            linf_norm(u) * h1_seminorm(u) * h1_seminorm(w) + 1e-300;
        CHECK(std::abs(trilinear_a_skew(u, u, w)) / scale < 1e-13);
    }
}

TEST_CASE("trilinear bound |a(u,v,w)| <= |u|_inf |v|_H1 |w|_H1") {
    Grid g = build_grid(1.3, 0.8, 18, 14);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField u = smooth_random(g, rng);
        ScalarField v = smooth_random(g, rng);
        ScalarField w = smooth_random(g, rng);
        const double cap = linf_norm(u) * h1_seminorm(v) * h1_seminorm(w);
        CHECK(std::abs(trilinear_a(u, v, w)) <= cap * (1.0 + 1e-12));
    }
}

TEST_CASE("trilinear a(u,u,v) decays with the mesh") {
    // the continuous value is zero by skew symmetry; the discrete one decays
    auto value = [](int n) {
        Grid g = build_grid(1.0, 1.0, n, n);
        ScalarField u = sample(g, [](double x, double y) {
            return std::sin(pi * x) * std::sin(2.0 * pi * y) * (x + 0.3);
        });
        ScalarField v = sample(g, [](double x, double y) { return std::exp(x) * std::cos(y); });
        return std::abs(trilinear_a(u, u, v));
    };
    const double a16 = value(16), a32 = value(32), a64 = value(64);
    CHECK(a16 / a32 > 1.8);  // at least first order
    CHECK(a32 / a64 > 1.8);
}

TEST_CASE("Poincare constant: Dirichlet unit square anchor") {
    Grid g = build_grid(1.0, 1.0, 64, 64);
    BoundaryPartition bp = make_partition({Edge::left});
    const double c = poincare_constant(g, bp, PoincareMode::dirichlet);
    CHECK(c == doctest::Approx(1.0 / std::sqrt(2.0 * pi * pi)).epsilon(0.01));
}

TEST_CASE("Poincare constant: mixed anchor 2/pi with Gamma1 = left") {
    Grid g = build_grid(1.0, 1.0, 64, 64);
    BoundaryPartition bp = make_partition({Edge::left});
    const double c = poincare_constant(g, bp, PoincareMode::mixed);
    CHECK(c == doctest::Approx(2.0 / pi).epsilon(0.02));
}

TEST_CASE("Dirichlet constant never exceeds the mixed one") {
    Grid g = build_grid(1.4, 0.9, 32, 24);
    for (auto edges : {std::vector<Edge>{Edge::bottom}, std::vector<Edge>{Edge::left, Edge::top},
                       std::vector<Edge>{Edge::left, Edge::bottom, Edge::right}}) {
        BoundaryPartition bp = make_partition(edges);
        EstimateContext ctx = make_estimate_context(g, bp);
        CHECK(ctx.C_dirichlet <= ctx.C_mixed * (1.0 + 1e-10));
        CHECK(ctx.C == doctest::Approx(std::max(ctx.C_dirichlet, ctx.C_mixed)));
        CHECK(ctx.mes_omega == doctest::Approx(1.4 * 0.9));
    }
}

TEST_CASE("Poincare eigenvalue error shrinks at second order") {
    BoundaryPartition bp = make_partition({Edge::left});
    const double exact = 1.0 / std::sqrt(2.0 * pi * pi);
    const double e32 =
        std::abs(poincare_constant(build_grid(1.0, 1.0, 32, 32), bp, PoincareMode::dirichlet) -
                 exact);
    const double e64 =
        std::abs(poincare_constant(build_grid(1.0, 1.0, 64, 64), bp, PoincareMode::dirichlet) -
                 exact);
    CHECK(e32 / e64 > 3.0);
    CHECK(e32 / e64 < 5.0);
}

TEST_CASE("Poincare inequality holds for smooth random fields") {
    Grid g = build_grid(1.0, 1.0, 32, 32);
    BoundaryPartition bp = make_partition({Edge::left});
    EstimateContext ctx = make_estimate_context(g, bp);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        ScalarField u = smooth_random(g, rng);
        CHECK(l2_norm(u) <= ctx.C_dirichlet * h1_seminorm(u) * 1.02);
    }
}

TEST_CASE("max principle check flags excursions") {
    Grid g = build_grid(1.0, 1.0, 8, 8);
    ScalarField tw(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (g.is_boundary(i, j)) tw.at(i, j) = 1.0 + g.x(i);
    ScalarField T = tw;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) T.at(i, j) = 1.5;
    CheckResult ok = check_max_principle(T, tw, 1e-12);
    CHECK(ok.satisfied);
    T.at(4, 4) = 2.5;  // above max_Gamma tw = 2
    CheckResult bad = check_max_principle(T, tw, 1e-12);
    CHECK(!bad.satisfied);
}

TEST_CASE("a priori checks go inapplicable when the precondition fails") {
    EstimateContext ctx{0.2, 0.4, 0.4, 1.0};
    SolveNorms norms;
    norms.lambda = 1.0;
    norms.K_linf = 1.0;
    norms.grad_theta_linf = 100.0;  // violates |grad Theta|_inf < lambda/(2 C^2 |K|)
    norms.grad_theta_l2 = 1.0;
    norms.mes_omega = 1.0;
    auto checks = check_apriori(norms, ctx);
    REQUIRE(checks.size() == 1);
    CHECK(!checks[0].applicable);

    norms.grad_theta_linf = 0.1;
    norms.grad_psi_l2 = 0.01;
    norms.grad_H_l2 = 0.5;
    auto ok = check_apriori(norms, ctx);
    REQUIRE(ok.size() == 4);
    for (const auto& c : ok) {
        CHECK(c.applicable);
        CHECK(c.satisfied);
    }
}

TEST_CASE("smallness report arithmetic and K = 0 degeneracy") {
    Grid g = build_grid(1.0, 1.0, 16, 16);
    BoundaryPartition bp = make_partition({Edge::left});
    EstimateContext ctx = make_estimate_context(g, bp);
    ScalarField theta = sample(g, [](double x, double y) { return 1.0 + x - 0.5 * y; });

    VectorField K(g, 0.3, -0.4);  // |K|_inf = 0.5
    SmallnessReport rep = smallness_report(K, 2.0, 1.5, theta, ctx);
    CHECK(rep.applicable);
    CHECK(rep.r_unique == doctest::Approx(1.5 * ctx.C * 0.5 / 2.0));
    const VectorField gth = gradient(theta);
    CHECK(rep.r_contract == doctest::Approx(ctx.C * ctx.C * 0.5 * linf_norm(gth) / 2.0));
    CHECK(rep.r_apriori == doctest::Approx(2.0 * rep.r_contract));
    CHECK(rep.k_grad_theta_l2 == doctest::Approx(l2_norm(dot(K, gth))));
    CHECK(rep.unique_ok == (rep.r_unique < 1.0));
    CHECK(rep.contract_ok == (rep.r_contract < 1.0));

    VectorField K0(g);
    SmallnessReport zero = smallness_report(K0, 1.0, 1.0, theta, ctx);
    CHECK(!zero.applicable);
    CHECK(zero.unique_ok);
    CHECK(zero.contract_ok);
    CHECK(zero.apriori_ok);
}
