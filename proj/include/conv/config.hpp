#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conv/coupled.hpp"
#include "conv/grid.hpp"

namespace conv {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One solve, fully described by a single JSON document.  Unknown keys are
/// hard errors so a typo in a physics parameter cannot pass silently.
struct RunConfig {
    double lx = 1.0, ly = 1.0;
    int nx = 32, ny = 32;
    std::vector<Edge> gamma1;
    TwSpec tw;
    bool k_is_table = false;
    double kx = 0.0, ky = 0.0;
    std::string k_table_path;
    double lambda = 1.0;
    SolverConfig solver;
    std::string out_dir = ".";
    bool fmt_csv = true;
    bool fmt_vtk = false;
    bool emit_report = true;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

struct SweepConfig {
    RunConfig base;
    std::vector<double> lambda_values;
    std::vector<double> k_scales;
    std::vector<double> tw_scales;
    std::string out_dir = ".";
};

SweepConfig load_sweep_config(const std::string& path);

struct ProblemSetup {
    Grid grid;
    BoundaryPartition bp;
    PhysicsParams params;
    SolverConfig solver;
};

ProblemSetup build_problem(const RunConfig& cfg);

/// Scaled copy used by sweeps: lambda replaced, K and tw multiplied.
RunConfig scaled_config(const RunConfig& base, double lambda, double k_scale, double tw_scale);

// Output writers.  All doubles use shortest round-trip formatting.
void write_fields_csv(const std::string& path, const SolveReport& report);
void write_convergence_csv(const std::string& path, const SolveReport& report);
void write_report_json(const std::string& path, const SolveReport& report);
void write_fields_vtk(const std::string& path, const SolveReport& report);

std::string format_double(double v);

}  // namespace conv
