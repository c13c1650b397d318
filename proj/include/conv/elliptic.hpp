#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "conv/grid.hpp"

namespace conv {

enum class Scheme { upwind, central };

enum class BcType : std::uint8_t { interior, dirichlet, neumann };

struct solver_error : std::runtime_error {
    double residual;
    int iterations;
    solver_error(const std::string& what, double res, int iters)
        : std::runtime_error(what), residual(res), iterations(iters) {}
};

/// -diffusion * lap(u) + velocity . grad(u) = source, one condition per
/// boundary node.  Neumann nodes get mirror-ghost elimination (second
/// order), Dirichlet rows are folded into the right-hand side.
struct EllipticProblem {
    double diffusion = 1.0;
    const VectorField* velocity = nullptr;  // nullptr: pure diffusion
    Scheme scheme = Scheme::upwind;
    ScalarField source;
    ScalarField dirichlet;        // read at Dirichlet nodes only
    std::vector<BcType> bc;       // one entry per node
};

struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void matvec(const std::vector<double>& x, std::vector<double>& y) const;
};

struct LinearSystem {
    CsrMatrix A;
    std::vector<double> b;
    std::vector<int> unknown_of_node;  // -1 at Dirichlet nodes
    std::vector<int> node_of_unknown;
    Grid grid;
    ScalarField dirichlet;
    bool symmetric = false;
};

LinearSystem assemble(const EllipticProblem& problem, const Grid& grid);

/// Jacobi-preconditioned CG (symmetric) or BiCGStab (advective / mixed-BC)
/// down to relative residual `tol`; throws solver_error past `max_iter`.
ScalarField solve_linear(const LinearSystem& system, double tol = 1e-12, int max_iter = 20000);

/// solve_linear followed by iterative refinement on the defect until the
/// nodewise residual reaches `abs_target` or stops improving.  Needed when a
/// large eliminated Dirichlet trace makes the relative tolerance too loose
/// in absolute terms.
ScalarField solve_linear_refined(const LinearSystem& system, double tol, int max_iter,
                                 double abs_target, int max_rounds = 6);

/// Discrete harmonic extension of the boundary trace tw into the grid.
ScalarField harmonic_lift(const ScalarField& tw, const Grid& grid,
                          double tol = 1e-12, int max_iter = 20000);

/// Nodewise velocity . grad(u) at interior nodes (zero on the boundary),
/// with the same stencils the assembler uses, so converged solutions of an
/// assembled system have matching pointwise residuals.
ScalarField advect(const VectorField& velocity, const ScalarField& u, Scheme scheme);

std::vector<BcType> all_dirichlet_bc(const Grid& grid);
std::vector<BcType> psi_bc(const Grid& grid, const BoundaryPartition& bp);

}  // namespace conv
