#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conv/analysis.hpp"
#include "conv/config.hpp"
#include "conv/coupled.hpp"
#include "conv/similarity.hpp"

namespace {

using nlohmann::json;

constexpr int kExitCheckFailed = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitConfig = 64;

bool all_checks_pass(const conv::SolveReport& rep) {
    for (const auto& c : rep.checks)
        if (c.applicable && !c.satisfied) return false;
    return true;
}

int cmd_solve2d(const std::string& config_path) {
    conv::RunConfig cfg = conv::load_run_config(config_path);
    conv::ProblemSetup setup = conv::build_problem(cfg);
    conv::SolveReport rep =
        conv::solve_coupled(setup.params, setup.grid, setup.bp, setup.solver);

    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);
    if (cfg.fmt_csv) {
        conv::write_fields_csv((dir / "fields.csv").string(), rep);
        conv::write_convergence_csv((dir / "convergence.csv").string(), rep);
    }
    if (cfg.fmt_vtk) conv::write_fields_vtk((dir / "fields.vtk").string(), rep);
    if (cfg.emit_report) conv::write_report_json((dir / "report.json").string(), rep);

    if (!rep.converged) {
        std::cerr << "solve2d: not converged after " << rep.iterations << " iterations\n";
        return kExitNotConverged;
    }
    if (!all_checks_pass(rep)) {
        std::cerr << "solve2d: converged but a check failed\n";
        return kExitCheckFailed;
    }
    return 0;
}

// Smooth random fields for the verification suite: low-frequency sine sums
// vanishing on the whole boundary.
conv::ScalarField random_h10_field(const conv::Grid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double a[4][4];
    for (auto& row : a)
        for (double& c : row) c = coef(rng);
    conv::ScalarField u(g);
    const double pi = std::acos(-1.0);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double s = 0.0;
            for (int k = 1; k <= 4; ++k)
                for (int l = 1; l <= 4; ++l)
                    s += a[k - 1][l - 1] * std::sin(k * pi * g.x(i) / g.lx) *
                         std::sin(l * pi * g.y(j) / g.ly);
            u.at(i, j) = s;
        }
    return u;
}

// Smooth random field vanishing on Gamma1 only.
conv::ScalarField random_mixed_field(const conv::Grid& g, const conv::BoundaryPartition& bp,
                                     std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
    conv::ScalarField u(g);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x(i) / g.lx, y = g.y(j) / g.ly;
            double d = 1.0;
            if (bp.contains(conv::Edge::left)) d *= x;
            if (bp.contains(conv::Edge::right)) d *= 1.0 - x;
            if (bp.contains(conv::Edge::bottom)) d *= y;
            if (bp.contains(conv::Edge::top)) d *= 1.0 - y;
            u.at(i, j) = d * (1.0 + c1 * x + c2 * y + c3 * x * y);
        }
    return u;
}

int cmd_verify(const std::string& config_path) {
    conv::RunConfig cfg = conv::load_run_config(config_path);
    conv::ProblemSetup setup = conv::build_problem(cfg);
    const conv::Grid& g = setup.grid;

    json out;
    std::vector<conv::CheckResult> checks;
    const conv::EstimateContext ctx = conv::make_estimate_context(g, setup.bp);
    out["poincare"] = {{"C_dirichlet", ctx.C_dirichlet},
                       {"C_mixed", ctx.C_mixed},
                       {"C", ctx.C},
                       {"mes_omega", ctx.mes_omega}};
    {
        conv::CheckResult c;
        c.name = "poincare_order";
        c.lhs = ctx.C_dirichlet;
        c.rhs = ctx.C_mixed;
        c.satisfied = ctx.C_dirichlet <= ctx.C_mixed * (1.0 + 1e-12);
        checks.push_back(c);
    }

    std::mt19937 rng(20240817u);
    double worst_skew = 0.0, worst_bound = 0.0, worst_poincare_d = 0.0, worst_poincare_m = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        conv::ScalarField u = random_h10_field(g, rng);
        conv::ScalarField v = random_h10_field(g, rng);
        conv::ScalarField w = random_mixed_field(g, setup.bp, rng);
        const double scale = std::max({1e-30, conv::linf_norm(u) * conv::h1_seminorm(u) *
                                                  conv::h1_seminorm(w)});
        worst_skew = std::max(worst_skew,
                              std::abs(conv::trilinear_a_skew(u, u, w)) / scale);
        const double raw = std::abs(conv::trilinear_a(u, v, w));
        const double cap = conv::linf_norm(u) * conv::h1_seminorm(v) * conv::h1_seminorm(w);
        if (cap > 0.0) worst_bound = std::max(worst_bound, raw / cap);
        const double hd = conv::h1_seminorm(u);
        if (hd > 0.0) worst_poincare_d = std::max(worst_poincare_d, conv::l2_norm(u) / hd);
        const double hm = conv::h1_seminorm(w);
        if (hm > 0.0) worst_poincare_m = std::max(worst_poincare_m, conv::l2_norm(w) / hm);
    }
    auto push = [&](const char* name, double lhs, double rhs, double tol) {
        conv::CheckResult c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.tolerance = tol;
        c.satisfied = lhs <= rhs * (1.0 + tol);
        checks.push_back(c);
    };
    push("trilinear_skew_null", worst_skew, 1e-13, 0.0);
    push("trilinear_bound", worst_bound, 1.0, 1e-12);
    push("poincare_inequality_dirichlet", worst_poincare_d, ctx.C_dirichlet, 0.02);
    push("poincare_inequality_mixed", worst_poincare_m, ctx.C_mixed, 0.02);

    conv::SolveReport rep = conv::solve_coupled(setup.params, g, setup.bp, setup.solver,
                                                nullptr, &ctx);
    out["solve"] = {{"converged", rep.converged}, {"iterations", rep.iterations}};
    out["smallness"] = {{"r_unique", rep.smallness.r_unique},
                        {"r_contract", rep.smallness.r_contract},
                        {"r_apriori", rep.smallness.r_apriori},
                        {"k_grad_theta_l2", rep.smallness.k_grad_theta_l2},
                        {"applicable", rep.smallness.applicable}};
    checks.insert(checks.end(), rep.checks.begin(), rep.checks.end());
    if (rep.smallness.applicable) {
        push("smallness_unique", rep.smallness.r_unique, 1.0, -1e-12);
        push("smallness_contract", rep.smallness.r_contract, 1.0, -1e-12);
    }

    // contraction measurement on the linearized operator
    if (rep.smallness.applicable && rep.smallness.r_contract < 1.0) {
        conv::ScalarField f = random_h10_field(g, rng);
        conv::ScalarField gg = random_h10_field(g, rng);
        try {
            conv::LinearizedResult lin =
                conv::solve_linearized(f, gg, rep.theta, setup.params, g, setup.bp, setup.solver);
            double worst_ratio = 0.0;
            for (double r : lin.ratio_history) worst_ratio = std::max(worst_ratio, r);
            out["contraction"] = {{"iterations", lin.iterations},
                                  {"max_ratio", worst_ratio},
                                  {"bound", rep.smallness.r_contract}};
            push("contraction_ratio", worst_ratio, rep.smallness.r_contract, 0.1);
        } catch (const conv::linearized_divergence& e) {
            conv::CheckResult c;
            c.name = "contraction_ratio";
            c.satisfied = false;
            checks.push_back(c);
            out["contraction"] = {{"error", e.what()}};
        }
    }

    out["checks"] = json::array();
    bool all_ok = true;
    for (const auto& c : checks) {
        out["checks"].push_back(json{{"name", c.name},
                                     {"lhs", c.lhs},
                                     {"rhs", c.rhs},
                                     {"tolerance", c.tolerance},
                                     {"satisfied", c.satisfied},
                                     {"applicable", c.applicable}});
        if (c.applicable && !c.satisfied) all_ok = false;
    }

    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream vf(std::filesystem::path(cfg.out_dir) / "verify.json");
    vf << out.dump(2) << '\n';
    return all_ok ? 0 : kExitCheckFailed;
}

struct SweepRow {
    double lambda, k_scale, tw_scale;
    bool completed = false;
    bool converged = false;
    int iters = 0;
    double r_unique = 0.0, r_contract = 0.0;
    bool max_principle_ok = false, apriori_ok = false;
    std::string error;
};

int cmd_sweep(const std::string& config_path, int workers_flag) {
    conv::SweepConfig sc = conv::load_sweep_config(config_path);

    std::vector<SweepRow> rows;
    for (double lam : sc.lambda_values)
        for (double ks : sc.k_scales)
            for (double ts : sc.tw_scales) rows.push_back({lam, ks, ts});

    int workers = workers_flag;
    if (const char* env = std::getenv("CONV_WORKERS")) workers = std::atoi(env);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));

    // grid and partition are shared across rows; the Poincare constants too
    conv::ProblemSetup base_setup = conv::build_problem(sc.base);
    const conv::EstimateContext ctx = conv::make_estimate_context(base_setup.grid, base_setup.bp);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= rows.size()) return;
            SweepRow& row = rows[r];
            try {
                conv::RunConfig cfg =
                    conv::scaled_config(sc.base, row.lambda, row.k_scale, row.tw_scale);
                conv::ProblemSetup setup = conv::build_problem(cfg);
                conv::SolveReport rep = conv::solve_coupled(setup.params, setup.grid, setup.bp,
                                                            setup.solver, nullptr, &ctx);
                row.converged = rep.converged;
                row.iters = rep.iterations;
                row.r_unique = rep.smallness.r_unique;
                row.r_contract = rep.smallness.r_contract;
                row.max_principle_ok = rep.checks.empty() ? false : rep.checks.front().satisfied;
                row.apriori_ok = true;
                for (std::size_t c = 1; c < rep.checks.size(); ++c)
                    if (rep.checks[c].applicable && !rep.checks[c].satisfied)
                        row.apriori_ok = false;
                row.completed = true;
            } catch (const std::exception& e) {
                row.error = e.what();
                row.completed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::filesystem::create_directories(sc.out_dir);
    std::ofstream out(std::filesystem::path(sc.out_dir) / "sweep.csv");
    out << "lambda,K_scale,tw_scale,converged,iters,r_unique,r_contract,max_principle_ok,"
           "apriori_ok,error\n";
    for (const auto& row : rows)
        out << conv::format_double(row.lambda) << ',' << conv::format_double(row.k_scale) << ','
            << conv::format_double(row.tw_scale) << ',' << (row.converged ? 1 : 0) << ','
            << row.iters << ',' << conv::format_double(row.r_unique) << ','
            << conv::format_double(row.r_contract) << ',' << (row.max_principle_ok ? 1 : 0)
            << ',' << (row.apriori_ok ? 1 : 0) << ',' << row.error << '\n';
    return 0;
}

struct SimilarityArgs {
    std::string case_name;
    double m = 0.0;
    double gamma = 0.0;
    bool gamma_from_omega = false;
    double omega = 0.0;
    double a = 0.0, b = 0.0;
    double tmax = 20.0;
    double tol = 1e-8;
    std::vector<double> bracket;
    std::string out_path;
    bool all_solutions = false;
};

int cmd_similarity(const SimilarityArgs& args) {
    conv::SimilarityProblem problem;
    if (args.case_name == "temp")
        problem.kind = conv::SimilarityCase::temperature;
    else if (args.case_name == "flux")
        problem.kind = conv::SimilarityCase::flux;
    else if (args.case_name == "general")
        problem.kind = conv::SimilarityCase::generalized;
    else {
        std::cerr << "similarity: case must be temp, flux or general\n";
        return kExitConfig;
    }
    problem.m = args.m;
    problem.a = args.a;
    problem.b = args.b;
    problem.t_max = args.tmax;
    problem.far_field_tol = args.tol;
    if (args.gamma_from_omega) {
        conv::PhysicalConstants consts;
        consts.omega = args.omega;
        problem.gamma = conv::gamma_value(problem.kind, consts, problem.m);
    } else {
        problem.gamma = args.gamma;
    }

    conv::ShootConfig shoot_cfg;
    if (!args.bracket.empty()) {
        if (args.bracket.size() != 2 || args.bracket[0] >= args.bracket[1]) {
            std::cerr << "similarity: --bracket needs LO HI with LO < HI\n";
            return kExitConfig;
        }
        shoot_cfg.bracket_lo = args.bracket[0];
        shoot_cfg.bracket_hi = args.bracket[1];
    }

    try {
        if (args.all_solutions) {
            const auto profiles = conv::shoot_all(problem, shoot_cfg);
            if (profiles.empty())
                throw conv::no_solution_error("no sign change in scan", shoot_cfg.bracket_lo,
                                              shoot_cfg.bracket_hi);
            for (std::size_t i = 0; i < profiles.size(); ++i) {
                std::string path = args.out_path;
                if (profiles.size() > 1)
                    path += "." + std::to_string(i);
                conv::write_profile_csv(profiles[i], path);
                std::cout << args.case_name << ',' << conv::format_double(args.m) << ','
                          << conv::format_double(problem.gamma) << ','
                          << conv::format_double(profiles[i].shot_parameter) << ','
                          << conv::format_double(profiles[i].residual) << '\n';
            }
            return 0;
        }
        const conv::SimilarityProfile profile = conv::shoot(problem, shoot_cfg);
        conv::write_profile_csv(profile, args.out_path);
        std::cout << args.case_name << ',' << conv::format_double(args.m) << ','
                  << conv::format_double(problem.gamma) << ','
                  << conv::format_double(profile.shot_parameter) << ','
                  << conv::format_double(profile.residual) << '\n';
        return profile.converged ? 0 : kExitNotConverged;
    } catch (const conv::no_solution_error& e) {
        std::cerr << "similarity: " << e.what() << " (scanned [" << e.bracket_lo << ", "
                  << e.bracket_hi << "])\n";
        return kExitNotConverged;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady free-convection solver and verification suite"};
    app.require_subcommand(1);

    std::string solve_config, verify_config, sweep_config;
    int workers = 0;
    SimilarityArgs sim;

    auto* solve = app.add_subcommand("solve2d", "solve the coupled system from a config file");
    solve->add_option("--config", solve_config, "config path")->required();

    auto* verify = app.add_subcommand("verify", "run the full invariant suite on a config");
    verify->add_option("--config", verify_config, "config path")->required();

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("--config", sweep_config, "sweep config path")->required();
    sweep->add_option("--workers", workers, "worker threads (default: hardware)");

    auto* simil = app.add_subcommand("similarity", "solve a boundary-layer similarity problem");
    simil->add_option("--case", sim.case_name, "temp | flux | general")->required();
    simil->add_option("--m", sim.m, "wall exponent")->required();
    auto* gopt = simil->add_option("--gamma", sim.gamma, "mass-transfer parameter");
    auto* gfo = simil->add_option("--gamma-from-omega", sim.omega,
                                  "derive gamma from the mass-transfer coefficient");
    gopt->excludes(gfo);
    simil->add_option("--a", sim.a, "generalized coefficient a");
    simil->add_option("--b", sim.b, "generalized coefficient b");
    simil->add_option("--tmax", sim.tmax, "truncation of [0, inf)");
    simil->add_option("--tol", sim.tol, "far-field tolerance");
    simil->add_option("--bracket", sim.bracket, "shot-parameter bracket LO HI")->expected(2);
    simil->add_option("--out", sim.out_path, "profile CSV path")->required();
    simil->add_flag("--all", sim.all_solutions, "emit every solution found in the scan");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve2d(solve_config);
        if (verify->parsed()) return cmd_verify(verify_config);
        if (sweep->parsed()) return cmd_sweep(sweep_config, workers);
        if (simil->parsed()) {
            sim.gamma_from_omega = gfo->count() > 0;
            return cmd_similarity(sim);
        }
    } catch (const conv::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const conv::invalid_parameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
