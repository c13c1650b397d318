#include "conv/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace conv {

std::pair<double, double> SimilarityProblem::coefficients() const {
    switch (kind) {
        case SimilarityCase::temperature: return {(m + 1.0) / 2.0, m};
        case SimilarityCase::flux: return {m + 2.0, 2.0 * m + 1.0};
        case SimilarityCase::generalized: return {a, b};
    }
    return {0.0, 0.0};
}

State3 ode_rhs(const SimilarityProblem& problem, const State3& s) {
    const auto [a, b] = problem.coefficients();
    return {s.fp, s.fpp, -a * s.f * s.fpp + b * s.fp * s.fp};
}

SimilarityProfile integrate_profile(const SimilarityProblem& problem, const State3& init,
                                    const IntegrateOptions& opts) {
    if (!(problem.t_max > 0.0)) throw invalid_parameter("integrate_profile: t_max must be positive");
    if (!(problem.step > 0.0)) throw invalid_parameter("integrate_profile: step must be positive");
    const double h = problem.step;
    const long n = std::lround(problem.t_max / h);

    SimilarityProfile out;
    State3 s = init;
    if (opts.record) {
        out.t.reserve(n + 1);
        out.f.reserve(n + 1);
        out.fp.reserve(n + 1);
        out.fpp.reserve(n + 1);
        out.t.push_back(0.0);
        out.f.push_back(s.f);
        out.fp.push_back(s.fp);
        out.fpp.push_back(s.fpp);
    }
    for (long step_i = 1; step_i <= n; ++step_i) {
        const State3 k1 = ode_rhs(problem, s);
        const State3 k2 = ode_rhs(problem, {s.f + 0.5 * h * k1.f, s.fp + 0.5 * h * k1.fp,
                                            s.fpp + 0.5 * h * k1.fpp});
        const State3 k3 = ode_rhs(problem, {s.f + 0.5 * h * k2.f, s.fp + 0.5 * h * k2.fp,
                                            s.fpp + 0.5 * h * k2.fpp});
        const State3 k4 = ode_rhs(problem, {s.f + h * k3.f, s.fp + h * k3.fp,
                                            s.fpp + h * k3.fpp});
        s.f += h / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
        s.fp += h / 6.0 * (k1.fp + 2.0 * k2.fp + 2.0 * k3.fp + k4.fp);
        s.fpp += h / 6.0 * (k1.fpp + 2.0 * k2.fpp + 2.0 * k3.fpp + k4.fpp);
        if (opts.record) {
            out.t.push_back(step_i * h);
            out.f.push_back(s.f);
            out.fp.push_back(s.fp);
            out.fpp.push_back(s.fpp);
        }
        if (!std::isfinite(s.f) || !std::isfinite(s.fp) || !std::isfinite(s.fpp) ||
            std::abs(s.fp) > opts.divergence_guard || std::abs(s.fpp) > opts.divergence_guard) {
            out.diverged = true;
            break;
        }
        if (opts.stop_on_negative_fp && s.fp < 0.0) break;
    }
    if (!opts.record) {
        out.t.push_back(std::min<double>(problem.t_max, h * n));
        out.f.push_back(s.f);
        out.fp.push_back(s.fp);
        out.fpp.push_back(s.fpp);
    }
    out.residual = std::abs(s.fp);
    return out;
}

namespace {

State3 initial_state(const SimilarityProblem& problem, double shot) {
    switch (problem.kind) {
        case SimilarityCase::flux: return {-problem.gamma, shot, -1.0};
        default: return {-problem.gamma, 1.0, shot};
    }
}

// Signed shooting residual: f' at the end of integration.  Overshoot ends
// positive (blow-up or plain decay miss), undershoot goes negative when f'
// crosses zero, so the root of this map is the far-field solution.
double shoot_residual(const SimilarityProblem& problem, double shot) {
    IntegrateOptions opts;
    opts.record = false;
    opts.stop_on_negative_fp = true;
    SimilarityProfile p = integrate_profile(problem, initial_state(problem, shot), opts);
    return p.fp.back();
}

SimilarityProfile finish_shot(const SimilarityProblem& problem, double shot) {
    SimilarityProfile p = integrate_profile(problem, initial_state(problem, shot));
    p.shot_parameter = shot;
    p.converged = !p.diverged && p.residual <= problem.far_field_tol;
    return p;
}

SimilarityProfile bisect_bracket(const SimilarityProblem& problem, const ShootConfig& cfg,
                                 double lo, double hi, double flo, double fhi) {
    while (hi - lo > cfg.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = shoot_residual(problem, mid);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    double shot = 0.5 * (lo + hi);
    // one secant polish inside the final bracket
    if (fhi != flo) {
        const double sec = lo - flo * (hi - lo) / (fhi - flo);
        if (sec > lo && sec < hi &&
            std::abs(shoot_residual(problem, sec)) < std::abs(shoot_residual(problem, shot)))
            shot = sec;
    }
    return finish_shot(problem, shot);
}

}  // namespace

SimilarityProfile shoot(const SimilarityProblem& problem, const ShootConfig& cfg) {
    if (!(cfg.bracket_hi > cfg.bracket_lo))
        throw invalid_parameter("shoot: empty bracket");
    const int n = std::max(1, cfg.scan_points);
    const double dw = (cfg.bracket_hi - cfg.bracket_lo) / n;
    double prev = cfg.bracket_lo;
    double fprev = shoot_residual(problem, prev);
    for (int i = 1; i <= n; ++i) {
        const double cur = cfg.bracket_lo + i * dw;
        const double fcur = shoot_residual(problem, cur);
        if (fprev == 0.0) return finish_shot(problem, prev);
        if (fprev * fcur < 0.0) return bisect_bracket(problem, cfg, prev, cur, fprev, fcur);
        prev = cur;
        fprev = fcur;
    }
    throw no_solution_error("shoot: no sign change in bracket", cfg.bracket_lo, cfg.bracket_hi);
}

std::vector<SimilarityProfile> shoot_all(const SimilarityProblem& problem,
                                         const ShootConfig& cfg) {
    std::vector<SimilarityProfile> out;
    const int n = std::max(1, cfg.scan_points);
    const double dw = (cfg.bracket_hi - cfg.bracket_lo) / n;
    double prev = cfg.bracket_lo;
    double fprev = shoot_residual(problem, prev);
    for (int i = 1; i <= n; ++i) {
        const double cur = cfg.bracket_lo + i * dw;
        const double fcur = shoot_residual(problem, cur);
        if (fprev * fcur < 0.0)
            out.push_back(bisect_bracket(problem, cfg, prev, cur, fprev, fcur));
        prev = cur;
        fprev = fcur;
    }
    return out;
}

SimilarityProfile shoot_temperature(double m, double gamma, const ShootConfig& cfg) {
    SimilarityProblem p;
    p.kind = SimilarityCase::temperature;
    p.m = m;
    p.gamma = gamma;
    return shoot(p, cfg);
}

SimilarityProfile shoot_flux(double m, double gamma, const ShootConfig& cfg) {
    SimilarityProblem p;
    p.kind = SimilarityCase::flux;
    p.m = m;
    p.gamma = gamma;
    return shoot(p, cfg);
}

double gamma_value(SimilarityCase kind, const PhysicalConstants& c, double m) {
    if (!(c.rho_inf > 0 && c.beta > 0 && c.g > 0 && c.k > 0 && c.mu > 0 && c.lambda > 0 &&
          c.A > 0))
        throw invalid_parameter("gamma_value: physical constants must be positive");
    switch (kind) {
        case SimilarityCase::temperature: {
            if (m == -1.0) throw invalid_parameter("gamma_value: m = -1 excluded (temperature)");
            return 2.0 * c.omega / (m + 1.0) *
                   std::sqrt(c.mu / (c.rho_inf * c.beta * c.g * c.k * c.A * c.lambda));
        }
        case SimilarityCase::flux: {
            if (m == -2.0) throw invalid_parameter("gamma_value: m = -2 excluded (flux)");
            const double ra = c.rho_inf * c.beta * c.g * c.k / (c.mu * c.lambda);
            return std::cbrt(3.0) * std::pow(ra, -1.0 / 3.0) * c.omega / (c.lambda * (m + 2.0));
        }
        default:
            throw invalid_parameter("gamma_value: no closed form for the generalized case");
    }
}

double rayleigh(SimilarityCase kind, const PhysicalConstants& c, double x, double m) {
    switch (kind) {
        case SimilarityCase::temperature:
            if (!(x > 0.0)) throw invalid_parameter("rayleigh: x must be positive");
            return c.rho_inf * c.beta * c.g * c.k * c.A * std::pow(x, m + 1.0) /
                   (c.mu * c.lambda);
        case SimilarityCase::flux:
            return c.rho_inf * c.beta * c.g * c.k / (c.mu * c.lambda);
        default:
            throw invalid_parameter("rayleigh: no closed form for the generalized case");
    }
}

namespace {

// Cubic Hermite on the uniform t-grid using the stored derivative column.
double hermite(const std::vector<double>& t, const std::vector<double>& val,
               const std::vector<double>& deriv, double tq) {
    const std::size_t n = t.size();
    if (tq <= t.front()) return val.front();
    if (tq >= t.back()) return val.back();
    const double h = t[1] - t[0];
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>((tq - t.front()) / h), n - 2);
    const double s = (tq - t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * val[i] + (s3 - 2 * s2 + s) * h * deriv[i] +
           (-2 * s3 + 3 * s2) * val[i + 1] + (s3 - s2) * h * deriv[i + 1];
}

}  // namespace

std::vector<FieldSample> reconstruct_fields(const SimilarityProfile& profile,
                                            SimilarityCase kind, const PhysicalConstants& c,
                                            double m,
                                            std::span<const std::pair<double, double>> points) {
    if (profile.t.size() < 3) throw invalid_parameter("reconstruct_fields: profile too short");
    const double t_max = profile.t.back();
    std::vector<FieldSample> out;
    out.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (!(x > 0.0)) throw invalid_parameter("reconstruct_fields: x must be positive");
        double tq, psi_scale, T_scale;
        if (kind == SimilarityCase::temperature) {
            const double rax = rayleigh(kind, c, x, m);
            tq = std::sqrt(rax) * y / x;
            psi_scale = c.lambda * std::sqrt(rax);
            T_scale = c.A * std::pow(x, m);
        } else if (kind == SimilarityCase::flux) {
            const double ra = rayleigh(kind, c, x, m);
            tq = std::pow(3.0, -1.0 / 3.0) * std::cbrt(ra) * std::pow(x, (m - 1.0) / 3.0) * y;
            psi_scale = std::pow(3.0, 2.0 / 3.0) * std::cbrt(ra) * c.lambda *
                        std::pow(x, (m + 2.0) / 3.0);
            T_scale = std::cbrt(3.0) * std::pow(ra, -1.0 / 3.0) * std::pow(x, (2.0 * m + 1.0) / 3.0);
        } else {
            throw invalid_parameter("reconstruct_fields: no scaling for the generalized case");
        }
        double fval, theta;
        if (tq >= t_max) {
            fval = profile.f.back();
            theta = 0.0;
        } else {
            fval = hermite(profile.t, profile.f, profile.fp, tq);
            theta = hermite(profile.t, profile.fp, profile.fpp, tq);
        }
        out.push_back({psi_scale * fval, T_scale * theta + c.T_inf});
    }
    return out;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

}  // namespace

void write_profile_csv(const SimilarityProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_profile_csv: cannot open " + path);
    out << "t,f,fp,fpp\n";
    for (std::size_t i = 0; i < profile.t.size(); ++i)
        out << fmt_double(profile.t[i]) << ',' << fmt_double(profile.f[i]) << ','
            << fmt_double(profile.fp[i]) << ',' << fmt_double(profile.fpp[i]) << '\n';
}

}  // namespace conv
