#include "conv/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace conv {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw config_error("unknown key '" + it.key() + "' in " + where);
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error("missing key '" + std::string(key) + "' in " + where);
    return *it;
}

double num(const json& v, const std::string& what) {
    if (!v.is_number()) throw config_error(what + " must be a number");
    return v.get<double>();
}

TwSpec parse_tw(const json& j) {
    check_keys(j, {"kind", "value", "c0", "cx", "cy", "values"}, "boundary.tw");
    TwSpec tw;
    const std::string kind = require(j, "kind", "boundary.tw").get<std::string>();
    if (kind == "constant") {
        tw.kind = TwSpec::Kind::constant;
        tw.value = num(require(j, "value", "boundary.tw"), "boundary.tw.value");
    } else if (kind == "edge-linear") {
        tw.kind = TwSpec::Kind::edge_linear;
        tw.c0 = num(require(j, "c0", "boundary.tw"), "boundary.tw.c0");
        tw.cx = num(require(j, "cx", "boundary.tw"), "boundary.tw.cx");
        tw.cy = num(require(j, "cy", "boundary.tw"), "boundary.tw.cy");
    } else if (kind == "node-table") {
        tw.kind = TwSpec::Kind::node_table;
        tw.table = require(j, "values", "boundary.tw").get<std::vector<double>>();
    } else {
        throw config_error("boundary.tw.kind must be constant, edge-linear or node-table");
    }
    return tw;
}

RunConfig parse_run(const json& j) {
    check_keys(j, {"domain", "boundary", "physics", "solver", "output"}, "config root");
    RunConfig cfg;

    const json& dom = require(j, "domain", "config root");
    check_keys(dom, {"lx", "ly", "nx", "ny"}, "domain");
    cfg.lx = num(require(dom, "lx", "domain"), "domain.lx");
    cfg.ly = num(require(dom, "ly", "domain"), "domain.ly");
    cfg.nx = require(dom, "nx", "domain").get<int>();
    cfg.ny = require(dom, "ny", "domain").get<int>();

    const json& bnd = require(j, "boundary", "config root");
    check_keys(bnd, {"gamma1", "tw"}, "boundary");
    for (const auto& name : require(bnd, "gamma1", "boundary"))
        cfg.gamma1.push_back(edge_from_name(name.get<std::string>()));
    cfg.tw = parse_tw(require(bnd, "tw", "boundary"));

    const json& phy = require(j, "physics", "config root");
    check_keys(phy, {"K", "K_table", "lambda"}, "physics");
    cfg.lambda = num(require(phy, "lambda", "physics"), "physics.lambda");
    if (phy.contains("K_table")) {
        if (phy.contains("K")) throw config_error("physics: give either K or K_table, not both");
        cfg.k_is_table = true;
        cfg.k_table_path = phy["K_table"].get<std::string>();
    } else {
        const json& K = require(phy, "K", "physics");
        if (!K.is_array() || K.size() != 2) throw config_error("physics.K must be [kx, ky]");
        cfg.kx = num(K[0], "physics.K[0]");
        cfg.ky = num(K[1], "physics.K[1]");
    }

    if (j.contains("solver")) {
        const json& sol = j["solver"];
        check_keys(sol,
                   {"picard_tol", "picard_max_iter", "linear_tol", "linear_max_iter", "damping",
                    "advection_scheme"},
                   "solver");
        if (sol.contains("picard_tol")) cfg.solver.picard_tol = num(sol["picard_tol"], "solver.picard_tol");
        if (sol.contains("picard_max_iter")) cfg.solver.picard_max_iter = sol["picard_max_iter"].get<int>();
        if (sol.contains("linear_tol")) cfg.solver.linear_tol = num(sol["linear_tol"], "solver.linear_tol");
        if (sol.contains("linear_max_iter")) cfg.solver.linear_max_iter = sol["linear_max_iter"].get<int>();
        if (sol.contains("damping")) cfg.solver.damping = num(sol["damping"], "solver.damping");
        if (sol.contains("advection_scheme")) {
            const std::string s = sol["advection_scheme"].get<std::string>();
            if (s == "upwind")
                cfg.solver.advection_scheme = Scheme::upwind;
            else if (s == "central")
                cfg.solver.advection_scheme = Scheme::central;
            else
                throw config_error("solver.advection_scheme must be upwind or central");
        }
    }

    if (j.contains("output")) {
        const json& out = j["output"];
        check_keys(out, {"directory", "formats", "emit_report"}, "output");
        if (out.contains("directory")) cfg.out_dir = out["directory"].get<std::string>();
        if (out.contains("formats")) {
            cfg.fmt_csv = false;
            cfg.fmt_vtk = false;
            for (const auto& f : out["formats"]) {
                const std::string s = f.get<std::string>();
                if (s == "csv")
                    cfg.fmt_csv = true;
                else if (s == "vtk")
                    cfg.fmt_vtk = true;
                else
                    throw config_error("output.formats entries must be csv or vtk");
            }
        }
        if (out.contains("emit_report")) cfg.emit_report = out["emit_report"].get<bool>();
    }
    return cfg;
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_run(j);
}

RunConfig load_run_config(const std::string& path) { return parse_run(parse_file(path)); }

SweepConfig load_sweep_config(const std::string& path) {
    const json j = parse_file(path);
    check_keys(j, {"base", "sweep", "output"}, "sweep root");
    SweepConfig sc;
    sc.base = parse_run(require(j, "base", "sweep root"));
    const json& sw = require(j, "sweep", "sweep root");
    check_keys(sw, {"lambda", "K_scale", "tw_scale"}, "sweep");
    auto list = [&](const char* key) -> std::vector<double> {
        if (!sw.contains(key)) return {1.0};
        return sw[key].get<std::vector<double>>();
    };
    sc.lambda_values = sw.contains("lambda") ? sw["lambda"].get<std::vector<double>>()
                                             : std::vector<double>{sc.base.lambda};
    sc.k_scales = list("K_scale");
    sc.tw_scales = list("tw_scale");
    if (sc.lambda_values.empty() || sc.k_scales.empty() || sc.tw_scales.empty())
        throw config_error("sweep lists must be nonempty");
    sc.out_dir = sc.base.out_dir;
    if (j.contains("output")) {
        const json& out = j["output"];
        check_keys(out, {"directory"}, "sweep output");
        if (out.contains("directory")) sc.out_dir = out["directory"].get<std::string>();
    }
    return sc;
}

ProblemSetup build_problem(const RunConfig& cfg) {
    Grid grid = build_grid(cfg.lx, cfg.ly, cfg.nx, cfg.ny);
    BoundaryPartition bp = make_partition(cfg.gamma1);
    VectorField K(grid, cfg.kx, cfg.ky);
    if (cfg.k_is_table) {
        std::ifstream in(cfg.k_table_path);
        if (!in) throw config_error("cannot open K table: " + cfg.k_table_path);
        for (int k = 0; k < grid.num_nodes(); ++k) {
            std::string line;
            if (!std::getline(in, line))
                throw config_error("K table too short: " + cfg.k_table_path);
            std::istringstream row(line);
            char comma;
            if (!(row >> K.x[k] >> comma >> K.y[k]))
                throw config_error("bad K table row: " + line);
        }
    }
    PhysicsParams params = make_params(grid, K, cfg.lambda, cfg.tw);
    return ProblemSetup{grid, bp, std::move(params), cfg.solver};
}

RunConfig scaled_config(const RunConfig& base, double lambda, double k_scale, double tw_scale) {
    RunConfig cfg = base;
    cfg.lambda = lambda;
    cfg.kx *= k_scale;
    cfg.ky *= k_scale;
    cfg.tw.value *= tw_scale;
    cfg.tw.c0 *= tw_scale;
    cfg.tw.cx *= tw_scale;
    cfg.tw.cy *= tw_scale;
    for (double& v : cfg.tw.table) v *= tw_scale;
    return cfg;
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

}  // namespace

void write_fields_csv(const std::string& path, const SolveReport& report) {
    std::ofstream out = open_out(path);
    const Grid& g = report.T.grid;
    out << "x,y,psi,T,H,theta\n";
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            out << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
                << format_double(report.psi.at(i, j)) << ',' << format_double(report.T.at(i, j))
                << ',' << format_double(report.H.at(i, j)) << ','
                << format_double(report.theta.at(i, j)) << '\n';
}

void write_convergence_csv(const std::string& path, const SolveReport& report) {
    std::ofstream out = open_out(path);
    out << "iter,res_psi,res_H\n";
    for (const auto& rec : report.residual_history)
        out << rec.iter << ',' << format_double(rec.res_psi) << ','
            << format_double(rec.res_H) << '\n';
}

namespace {

json check_to_json(const CheckResult& c) {
    return json{{"name", c.name},        {"lhs", c.lhs},
                {"rhs", c.rhs},          {"tolerance", c.tolerance},
                {"satisfied", c.satisfied}, {"applicable", c.applicable}};
}

}  // namespace

void write_report_json(const std::string& path, const SolveReport& report) {
    json j;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["norms"] = {{"grad_psi_l2", report.norms.grad_psi_l2},
                  {"grad_H_l2", report.norms.grad_H_l2},
                  {"grad_theta_l2", report.norms.grad_theta_l2},
                  {"grad_theta_linf", report.norms.grad_theta_linf},
                  {"K_linf", report.norms.K_linf},
                  {"M", report.norms.M},
                  {"lambda", report.norms.lambda},
                  {"mes_omega", report.norms.mes_omega}};
    j["poincare"] = {{"C_dirichlet", report.ctx.C_dirichlet},
                     {"C_mixed", report.ctx.C_mixed},
                     {"C", report.ctx.C}};
    j["smallness"] = {{"r_unique", report.smallness.r_unique},
                      {"r_contract", report.smallness.r_contract},
                      {"r_apriori", report.smallness.r_apriori},
                      {"k_grad_theta_l2", report.smallness.k_grad_theta_l2},
                      {"unique_ok", report.smallness.unique_ok},
                      {"contract_ok", report.smallness.contract_ok},
                      {"apriori_ok", report.smallness.apriori_ok},
                      {"applicable", report.smallness.applicable}};
    j["checks"] = json::array();
    for (const auto& c : report.checks) j["checks"].push_back(check_to_json(c));
    open_out(path) << j.dump(2) << '\n';
}

void write_fields_vtk(const std::string& path, const SolveReport& report) {
    std::ofstream out = open_out(path);
    const Grid& g = report.T.grid;
    out << "# vtk DataFile Version 3.0\n"
        << "stream function / temperature fields\n"
        << "ASCII\nDATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << g.nx + 1 << ' ' << g.ny + 1 << " 1\n"
        << "ORIGIN 0 0 0\n"
        << "SPACING " << format_double(g.hx()) << ' ' << format_double(g.hy()) << " 1\n"
        << "POINT_DATA " << g.num_nodes() << '\n';
    auto scalar = [&](const char* name, const ScalarField& f) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i) out << format_double(f.at(i, j)) << '\n';
    };
    scalar("psi", report.psi);
    scalar("T", report.T);
    scalar("H", report.H);
    scalar("theta", report.theta);
}

}  // namespace conv
