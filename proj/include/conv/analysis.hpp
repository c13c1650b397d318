#pragma once

#include <string>
#include <vector>

#include "conv/elliptic.hpp"
#include "conv/grid.hpp"

namespace conv {

/// Poincare constants of the domain: C_dirichlet for fields vanishing on
/// the whole boundary, C_mixed for fields vanishing on Gamma1 only.  All
/// inequality checks use the conservative C = max of the two.
struct EstimateContext {
    double C_dirichlet = 0.0;
    double C_mixed = 0.0;
    double C = 0.0;
    double mes_omega = 0.0;
};

struct CheckResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool satisfied = false;
    bool applicable = true;
};

/// a(u,v,w) = integral of u grad(v).perp(grad(w)), trapezoid quadrature.
double trilinear_a(const ScalarField& u, const ScalarField& v, const ScalarField& w);

/// (a(u,v,w) - a(v,u,w)) / 2: antisymmetric in (u,v) by construction.
double trilinear_a_skew(const ScalarField& u, const ScalarField& v, const ScalarField& w);

enum class PoincareMode { dirichlet, mixed };

/// 1/sqrt(lambda_1) with lambda_1 the smallest eigenvalue of the discrete
/// Laplacian (Dirichlet rows on Gamma, or on Gamma1 with zero-flux on
/// Gamma2), found by inverse power iteration.
double poincare_constant(const Grid& grid, const BoundaryPartition& bp, PoincareMode mode,
                         double eig_tol = 1e-8, double linear_tol = 1e-12,
                         int max_power_iter = 2000);

EstimateContext make_estimate_context(const Grid& grid, const BoundaryPartition& bp);

/// Boundary-extremum check: min tw - tol_abs <= T <= max tw + tol_abs at
/// every node, tol_abs = 10 * linear_tol * (max tw - min tw + 1).
CheckResult check_max_principle(const ScalarField& T, const ScalarField& tw_trace,
                                double linear_tol);

/// Norms a converged solve hands to the inequality checks.
struct SolveNorms {
    double grad_psi_l2 = 0.0;
    double grad_H_l2 = 0.0;
    double grad_theta_l2 = 0.0;
    double grad_theta_linf = 0.0;
    double K_linf = 0.0;
    double M = 0.0;        // max of tw over the boundary
    double lambda = 0.0;
    double mes_omega = 0.0;
};

/// The four energy bounds (two main, two area forms), each with 2%
/// quadrature slack.  Inapplicable when the smallness precondition fails
/// or K vanishes.
std::vector<CheckResult> check_apriori(const SolveNorms& norms, const EstimateContext& ctx);

struct SmallnessReport {
    double r_unique = 0.0;    // M C |K| / lambda, uniqueness threshold
    double r_contract = 0.0;  // C^2 |K| |grad Theta|_inf / lambda
    double r_apriori = 0.0;   // 2 C^2 |K| |grad Theta|_inf / lambda
    double k_grad_theta_l2 = 0.0;
    bool unique_ok = false;
    bool contract_ok = false;
    bool apriori_ok = false;
    bool applicable = true;   // false when |K| = 0
};

SmallnessReport smallness_report(const VectorField& K, double lambda, double M,
                                 const ScalarField& theta, const EstimateContext& ctx);

}  // namespace conv
