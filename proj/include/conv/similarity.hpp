#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conv/grid.hpp"

namespace conv {

enum class SimilarityCase { temperature, flux, generalized };

/// Two-point boundary-layer problem f''' + a f f'' - b f'^2 = 0 on
/// [0, t_max] with far-field decay f'(inf) = 0.  The temperature and flux
/// cases fix (a, b) from the wall exponent m.
struct SimilarityProblem {
    SimilarityCase kind = SimilarityCase::temperature;
    double m = 0.0;
    double gamma = 0.0;
    double a = 0.0, b = 0.0;  // generalized case only
    double t_max = 20.0;
    double far_field_tol = 1e-8;
    double step = 1e-3;

    std::pair<double, double> coefficients() const;
};

struct State3 {
    double f, fp, fpp;
};

/// (f', f'', f''') with f''' = -a f f'' + b f'^2.
State3 ode_rhs(const SimilarityProblem& problem, const State3& s);

struct IntegrateOptions {
    bool stop_on_negative_fp = false;  // shooting discriminator
    bool record = true;
    double divergence_guard = 1e6;
};

struct SimilarityProfile {
    std::vector<double> t, f, fp, fpp;
    double shot_parameter = 0.0;
    double residual = 0.0;  // |f'| at the last computed point
    bool converged = false;
    bool diverged = false;
};

/// Classical fixed-step RK4 with early exit when |f'| or |f''| passes the
/// divergence guard.
SimilarityProfile integrate_profile(const SimilarityProblem& problem, const State3& init,
                                    const IntegrateOptions& opts = {});

struct ShootConfig {
    double bracket_lo = -10.0;
    double bracket_hi = 10.0;
    int scan_points = 200;
    double bisect_tol = 1e-10;
};

struct no_solution_error : std::runtime_error {
    double bracket_lo, bracket_hi;
    no_solution_error(const std::string& what, double lo, double hi)
        : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}
};

/// Bracket scan + bisection + one secant polish on the free initial value
/// (f''(0) for temperature, f'(0) for flux, f''(0) for generalized).
SimilarityProfile shoot(const SimilarityProblem& problem, const ShootConfig& cfg = {});
SimilarityProfile shoot_temperature(double m, double gamma, const ShootConfig& cfg = {});
SimilarityProfile shoot_flux(double m, double gamma, const ShootConfig& cfg = {});

/// All solutions whose shot parameter produces a sign change in the scan.
std::vector<SimilarityProfile> shoot_all(const SimilarityProblem& problem,
                                         const ShootConfig& cfg = {});

struct PhysicalConstants {
    double rho_inf = 1.0;
    double beta = 1.0;
    double g = 1.0;
    double k = 1.0;
    double mu = 1.0;
    double lambda = 1.0;
    double A = 1.0;
    double omega = 0.0;
    double T_inf = 0.0;
};

double gamma_value(SimilarityCase kind, const PhysicalConstants& c, double m);

/// Local Rayleigh number Ra_x for the temperature case (x > 0); the
/// x-independent Ra for the flux case.
double rayleigh(SimilarityCase kind, const PhysicalConstants& c, double x, double m);

struct FieldSample {
    double psi, T;
};

/// Evaluates the similarity scalings (theta taken as f') at sample points;
/// cubic Hermite interpolation in t, far-field values past t_max.
std::vector<FieldSample> reconstruct_fields(const SimilarityProfile& profile,
                                            SimilarityCase kind, const PhysicalConstants& c,
                                            double m,
                                            std::span<const std::pair<double, double>> points);

/// CSV export, header t,f,fp,fpp, shortest round-trip doubles.
void write_profile_csv(const SimilarityProfile& profile, const std::string& path);

}  // namespace conv
