#include "conv/coupled.hpp"

#include <cmath>

namespace conv {

ScalarField boundary_trace(const TwSpec& spec, const Grid& grid) {
    ScalarField out(grid);
    if (spec.kind == TwSpec::Kind::node_table &&
        static_cast<int>(spec.table.size()) != grid.num_nodes())
        throw invalid_parameter("boundary_trace: node table size does not match grid");
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            if (!grid.is_boundary(i, j)) continue;
            double val = 0.0;
            switch (spec.kind) {
                case TwSpec::Kind::constant: val = spec.value; break;
                case TwSpec::Kind::edge_linear:
                    val = spec.c0 + spec.cx * grid.x(i) + spec.cy * grid.y(j);
                    break;
                case TwSpec::Kind::node_table: val = spec.table[grid.index(i, j)]; break;
            }
            out.at(i, j) = val;
        }
    return out;
}

PhysicsParams make_params(const Grid& grid, const VectorField& K, double lambda,
                          const TwSpec& tw) {
    if (!(K.grid == grid)) throw invalid_parameter("make_params: K grid mismatch");
    if (!(lambda > 0.0)) throw invalid_parameter("make_params: lambda must be positive");
    for (std::size_t k = 0; k < K.x.size(); ++k)
        if (!std::isfinite(K.x[k]) || !std::isfinite(K.y[k]))
            throw invalid_parameter("make_params: K has non-finite entries");
    PhysicsParams p{K, lambda, boundary_trace(tw, grid)};
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i)
            if (grid.is_boundary(i, j) && p.tw.at(i, j) < 0.0)
                throw invalid_parameter("make_params: boundary temperature must be nonnegative");
    return p;
}

namespace {

ScalarField negate(ScalarField f) {
    for (double& v : f.v) v = -v;
    return f;
}

ScalarField solve_psi(const ScalarField& T_source, const PhysicsParams& params,
                      const BoundaryPartition& bp, const SolverConfig& cfg,
                      const char* stage) {
    // -lap(psi) = -K.grad(T_source), psi = 0 on Gamma1, zero flux on Gamma2
    EllipticProblem p;
    p.diffusion = 1.0;
    p.source = negate(dot(params.K, gradient(T_source)));
    p.dirichlet = ScalarField(T_source.grid);
    p.bc = psi_bc(T_source.grid, bp);
    try {
        return solve_linear(assemble(p, T_source.grid), cfg.linear_tol, cfg.linear_max_iter);
    } catch (const solver_error& e) {
        throw solver_error(std::string(stage) + ": " + e.what(), e.residual, e.iterations);
    }
}

double max_interior(const ScalarField& f) {
    const Grid& g = f.grid;
    double m = 0.0;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) m = std::max(m, std::abs(f.at(i, j)));
    return m;
}

double boundary_max(const ScalarField& tw) {
    const Grid& g = tw.grid;
    double m = 0.0;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (g.is_boundary(i, j)) m = std::max(m, tw.at(i, j));
    return m;
}

}  // namespace

std::pair<ScalarField, ScalarField> picard_step(const ScalarField& H_prev,
                                                const ScalarField& theta,
                                                const PhysicsParams& params,
                                                const BoundaryPartition& bp,
                                                const SolverConfig& cfg) {
    const Grid& grid = theta.grid;
    ScalarField T_prev(grid);
    for (std::size_t k = 0; k < T_prev.v.size(); ++k)
        T_prev.v[k] = H_prev.v[k] + theta.v[k];
    ScalarField psi = solve_psi(T_prev, params, bp, cfg, "psi-stage");

    // lambda lap(H) - v.grad(H) = v.grad(theta), v = perp(grad psi), H = 0 on Gamma
    const VectorField vel = perp(gradient(psi));
    EllipticProblem ph;
    ph.diffusion = params.lambda;
    ph.velocity = &vel;
    ph.scheme = cfg.advection_scheme;
    ph.source = negate(advect(vel, theta, cfg.advection_scheme));
    ph.dirichlet = ScalarField(grid);
    ph.bc = all_dirichlet_bc(grid);
    ScalarField H_raw;
    try {
        H_raw = solve_linear(assemble(ph, grid), cfg.linear_tol, cfg.linear_max_iter);
    } catch (const solver_error& e) {
        throw solver_error(std::string("H-stage: ") + e.what(), e.residual, e.iterations);
    }
    ScalarField H_next(grid);
    for (std::size_t k = 0; k < H_next.v.size(); ++k)
        H_next.v[k] = (1.0 - cfg.damping) * H_prev.v[k] + cfg.damping * H_raw.v[k];
    return {std::move(psi), std::move(H_next)};
}

SolveReport solve_coupled(const PhysicsParams& params, const Grid& grid,
                          const BoundaryPartition& bp, const SolverConfig& cfg,
                          const ScalarField* H0, const EstimateContext* ctx) {
    if (!(params.K.grid == grid)) throw invalid_parameter("solve_coupled: K grid mismatch");
    if (bp.gamma1.empty()) throw invalid_parameter("solve_coupled: gamma1 must be nonempty");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw invalid_parameter("solve_coupled: damping must lie in (0, 1]");

    SolveReport rep;
    {
        // The lift enters the T-equation residual as lambda * lap(theta); its
        // eliminated trace makes ||b|| large, so a relative tolerance alone
        // leaves an absolute defect above picard_tol.  Refine it down.
        EllipticProblem lift;
        lift.diffusion = 1.0;
        lift.source = ScalarField(grid);
        lift.dirichlet = params.tw;
        lift.bc = all_dirichlet_bc(grid);
        const double target = 0.05 * cfg.picard_tol / std::max(params.lambda, 1.0);
        rep.theta = solve_linear_refined(assemble(lift, grid), cfg.linear_tol,
                                         cfg.linear_max_iter, target);
    }
    rep.H = H0 ? *H0 : ScalarField(grid);
    ScalarField psi(grid);

    for (int it = 1; it <= cfg.picard_max_iter; ++it) {
        auto [psi_next, H_next] = picard_step(rep.H, rep.theta, params, bp, cfg);
        psi = std::move(psi_next);
        rep.H = std::move(H_next);

        ScalarField T(grid);
        for (std::size_t k = 0; k < T.v.size(); ++k) T.v[k] = rep.H.v[k] + rep.theta.v[k];
        auto [r_psi, r_T] = equation_residuals(psi, T, params, cfg.advection_scheme);
        const double res_psi = max_interior(r_psi);
        const double res_H = max_interior(r_T);
        rep.residual_history.push_back({it, res_psi, res_H});
        rep.iterations = it;
        if (std::max(res_psi, res_H) <= cfg.picard_tol) {
            rep.converged = true;
            break;
        }
    }

    rep.psi = std::move(psi);
    rep.T = ScalarField(grid);
    for (std::size_t k = 0; k < rep.T.v.size(); ++k)
        rep.T.v[k] = rep.H.v[k] + rep.theta.v[k];

    rep.ctx = ctx ? *ctx : make_estimate_context(grid, bp);
    rep.norms.grad_psi_l2 = h1_seminorm(rep.psi);
    rep.norms.grad_H_l2 = h1_seminorm(rep.H);
    const VectorField gtheta = gradient(rep.theta);
    rep.norms.grad_theta_l2 = l2_norm(gtheta);
    rep.norms.grad_theta_linf = linf_norm(gtheta);
    rep.norms.K_linf = linf_norm(params.K);
    rep.norms.M = boundary_max(params.tw);
    rep.norms.lambda = params.lambda;
    rep.norms.mes_omega = grid.lx * grid.ly;

    rep.smallness = smallness_report(params.K, params.lambda, rep.norms.M, rep.theta, rep.ctx);
    rep.checks.push_back(check_max_principle(rep.T, params.tw, cfg.linear_tol));
    if (rep.converged) {
        auto apriori = check_apriori(rep.norms, rep.ctx);
        rep.checks.insert(rep.checks.end(), apriori.begin(), apriori.end());
    } else {
        CheckResult skipped;
        skipped.name = "apriori_precondition";
        skipped.applicable = false;
        skipped.satisfied = true;
        rep.checks.push_back(skipped);
    }
    return rep;
}

LinearizedResult solve_linearized(const ScalarField& f, const ScalarField& g,
                                  const ScalarField& theta, const PhysicsParams& params,
                                  const Grid& grid, const BoundaryPartition& bp,
                                  const SolverConfig& cfg) {
    if (!(f.grid == grid) || !(g.grid == grid) || !(theta.grid == grid))
        throw invalid_parameter("solve_linearized: grid mismatch");
    const VectorField gtheta = gradient(theta);

    auto solve_phi = [&](const ScalarField& G) {
        // -lap(phi) = f - K.grad(G)
        EllipticProblem p;
        p.diffusion = 1.0;
        p.source = f;
        const ScalarField kg = dot(params.K, gradient(G));
        for (std::size_t k = 0; k < p.source.v.size(); ++k) p.source.v[k] -= kg.v[k];
        p.dirichlet = ScalarField(grid);
        p.bc = psi_bc(grid, bp);
        return solve_linear(assemble(p, grid), cfg.linear_tol, cfg.linear_max_iter);
    };
    auto solve_G = [&](const ScalarField& phi) {
        // -lambda lap(G1) = g - grad(theta).perp(grad(phi))
        EllipticProblem p;
        p.diffusion = params.lambda;
        p.source = g;
        const VectorField gphi_perp = perp(gradient(phi));
        for (std::size_t k = 0; k < p.source.v.size(); ++k)
            p.source.v[k] -= gtheta.x[k] * gphi_perp.x[k] + gtheta.y[k] * gphi_perp.y[k];
        p.dirichlet = ScalarField(grid);
        p.bc = all_dirichlet_bc(grid);
        return solve_linear(assemble(p, grid), cfg.linear_tol, cfg.linear_max_iter);
    };

    LinearizedResult out;
    ScalarField G(grid);
    out.phi = solve_phi(G);
    ScalarField G1 = solve_G(out.phi);
    const double first_increment = h1_seminorm(G1);
    if (first_increment == 0.0) {
        out.G = std::move(G1);
        out.iterations = 1;
        return out;
    }
    double prev_increment = first_increment;
    G = std::move(G1);
    for (int it = 2; it <= cfg.picard_max_iter; ++it) {
        out.phi = solve_phi(G);
        ScalarField G_next = solve_G(out.phi);
        ScalarField diff(grid);
        for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = G_next.v[k] - G.v[k];
        const double increment = h1_seminorm(diff);
        out.ratio_history.push_back(increment / prev_increment);
        G = std::move(G_next);
        out.iterations = it;
        if (increment <= cfg.picard_tol * first_increment) {
            out.G = std::move(G);
            return out;
        }
        prev_increment = increment;
    }
    throw linearized_divergence("solve_linearized: fixed point did not converge",
                                std::move(out.ratio_history));
}

std::pair<ScalarField, ScalarField> equation_residuals(const ScalarField& psi,
                                                       const ScalarField& T,
                                                       const PhysicsParams& params,
                                                       Scheme scheme) {
    if (!(psi.grid == T.grid) || !(psi.grid == params.K.grid))
        throw invalid_parameter("equation_residuals: grid mismatch");
    const Grid& grid = psi.grid;
    const ScalarField lap_psi = laplacian(psi);
    const ScalarField k_dot_gT = dot(params.K, gradient(T));
    ScalarField r_psi(grid);
    for (int j = 1; j < grid.ny; ++j)
        for (int i = 1; i < grid.nx; ++i) {
            const int k = grid.index(i, j);
            r_psi.v[k] = lap_psi.v[k] - k_dot_gT.v[k];
        }
    const ScalarField lap_T = laplacian(T);
    const ScalarField adv = advect(perp(gradient(psi)), T, scheme);
    ScalarField r_T(grid);
    for (int j = 1; j < grid.ny; ++j)
        for (int i = 1; i < grid.nx; ++i) {
            const int k = grid.index(i, j);
            r_T.v[k] = params.lambda * lap_T.v[k] - adv.v[k];
        }
    return {std::move(r_psi), std::move(r_T)};
}

}  // namespace conv
