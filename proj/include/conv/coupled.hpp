#pragma once

#include <utility>
#include <vector>

#include "conv/analysis.hpp"
#include "conv/elliptic.hpp"
#include "conv/grid.hpp"

namespace conv {

/// Boundary temperature specification.
struct TwSpec {
    enum class Kind { constant, edge_linear, node_table };
    Kind kind = Kind::constant;
    double value = 0.0;                  // constant
    double c0 = 0.0, cx = 0.0, cy = 0.0; // edge_linear: c0 + cx*x + cy*y
    std::vector<double> table;           // node_table: one entry per grid node
};

/// Values of the spec on the boundary nodes (interior entries zero).
ScalarField boundary_trace(const TwSpec& spec, const Grid& grid);

struct PhysicsParams {
    VectorField K;
    double lambda = 1.0;
    ScalarField tw;  // boundary trace
};

PhysicsParams make_params(const Grid& grid, const VectorField& K, double lambda,
                          const TwSpec& tw);

struct SolverConfig {
    double picard_tol = 1e-10;
    int picard_max_iter = 200;
    double linear_tol = 1e-12;
    int linear_max_iter = 20000;
    double damping = 1.0;
    Scheme advection_scheme = Scheme::upwind;
};

struct IterationRecord {
    int iter;
    double res_psi;
    double res_H;
};

struct SolveReport {
    ScalarField psi, H, theta, T;
    int iterations = 0;
    std::vector<IterationRecord> residual_history;
    bool converged = false;
    SolveNorms norms;
    std::vector<CheckResult> checks;  // max principle first, then a priori bounds
    SmallnessReport smallness;
    EstimateContext ctx;
};

/// One Gauss-Seidel sweep of the shifted system: solve the psi equation
/// with H frozen, then the H advection-diffusion equation with psi frozen,
/// then blend with the damping factor.
std::pair<ScalarField, ScalarField> picard_step(const ScalarField& H_prev,
                                                const ScalarField& theta,
                                                const PhysicsParams& params,
                                                const BoundaryPartition& bp,
                                                const SolverConfig& cfg);

/// Full nonlinear solve from H = 0 (or a caller-supplied start), iterated
/// until the max interior nodewise residual of both discrete equations
/// drops below picard_tol.  Non-convergence is reported, not thrown.
SolveReport solve_coupled(const PhysicsParams& params, const Grid& grid,
                          const BoundaryPartition& bp, const SolverConfig& cfg,
                          const ScalarField* H0 = nullptr,
                          const EstimateContext* ctx = nullptr);

struct LinearizedResult {
    ScalarField phi, G;
    std::vector<double> ratio_history;  // successive increment-norm ratios
    int iterations = 0;
};

struct linearized_divergence : std::runtime_error {
    std::vector<double> ratio_history;
    linearized_divergence(const std::string& what, std::vector<double> ratios)
        : std::runtime_error(what), ratio_history(std::move(ratios)) {}
};

/// Fixed-point iteration for the linearized system: solve the phi equation
/// from G, then the G equation from phi, until the H1-seminorm increment
/// stalls below picard_tol relative to the first sweep.
LinearizedResult solve_linearized(const ScalarField& f, const ScalarField& g,
                                  const ScalarField& theta, const PhysicsParams& params,
                                  const Grid& grid, const BoundaryPartition& bp,
                                  const SolverConfig& cfg);

/// Nodewise residuals of the unshifted equations, interior nodes only:
/// lap(psi) - K.grad(T)  and  lambda lap(T) - advect(perp(grad psi), T).
std::pair<ScalarField, ScalarField> equation_residuals(const ScalarField& psi,
                                                       const ScalarField& T,
                                                       const PhysicsParams& params,
                                                       Scheme scheme = Scheme::upwind);

}  // namespace conv
