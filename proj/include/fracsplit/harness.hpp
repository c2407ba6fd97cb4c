#pragma once

#include "fracsplit/splitting.hpp"

#include <array>
#include <string>
#include <vector>

namespace fracsplit {

// Named data for initial values and source factors.
struct DataSpec {
    std::string kind = "none"; // none | point | line | sine | constant
    std::array<double, 2> x0{0.5001, 0.5001};
    std::array<double, 2> a{0.25, 0.75};
    std::array<double, 2> b{0.75, 0.5};
    std::array<int, 2> mode{1, 1};
    double value = 1.0;

    LoadSpec load() const;
};

// Time factor g of a separable source g(t) f(x).
struct TimeFactorSpec {
    std::string kind = "constant"; // constant | exp | linear
    double value = 1.0;            // amplitude
    double rate = 1.0;             // exp: value * e^{-rate t}; linear: value * t

    TimeDerivs derivs() const;
};

struct StudyConfig {
    // [problem]
    double alpha = 0.6;
    double T = 1.0;
    int m = 0;
    DataSpec initial;
    bool source = false;
    DataSpec source_f;
    TimeFactorSpec source_g;

    // [discretization]
    int r = 3;
    int k = 2;
    std::string strategy = "plain";
    std::string solver = "direct";
    double solver_tol = 1e-12;
    double h_ref = 1.0 / 64;
    double tau_ref = 1.0 / 64;
    double grading_gamma = 0.0; // <= 0 selects 0.8/(r+1)
    double grading_d0 = 0.125;
    double cutoff_r0 = 0.05;
    double cutoff_r1 = 0.4;

    // [study]
    std::string kind = "space"; // space | time
    std::vector<double> ladder;
    bool oracle = false;
    int oracle_P = 64;
    int threads = 1;
    std::vector<std::array<double, 2>> probes;

    // [output]
    std::string csv;
    std::string markdown;
    std::string probes_csv;
    std::string vtk;
    bool include_timing = true;

    FracProblem problem(double tau) const;
    void validate() const;
};

StudyConfig load_config(const std::string& path);
StudyConfig parse_config(const std::string& toml_text);

struct ReportColumn {
    std::string name;
    std::vector<double> error;  // per row; NaN when not applicable
    double theoretical = 0.0;   // NaN when no prediction
};

struct ConvergenceReport {
    std::string kind = "space";
    double alpha = 0.0;
    int m = 0;
    int k = 0;
    int r = 0;
    std::string strategy;
    std::string data;
    std::vector<double> levels;           // h_j or tau_j, one per row
    std::vector<ReportColumn> columns;
    std::vector<bool> floor;              // row error below the solver floor
    std::vector<double> wall_time;        // seconds per level
    std::vector<long> iterations;         // linear-solver iterations per level
    double total_wall_time = 0.0;

    const ReportColumn& column(const std::string& name) const;
    // order between rows i-1 and i; NaN for the first row
    double order(const std::string& name, std::size_t i) const;
};

// -(log E_{j+1} - log E_j)/log 2 for each adjacent pair (NaN when undefined).
std::vector<double> observed_orders(const std::vector<double>& errors);

// Theoretical orders of the Cauchy-difference columns.
double theoretical_space_order(const StudyConfig& cfg, const std::string& column);

ConvergenceReport run_space_study(const StudyConfig& cfg);
ConvergenceReport run_time_study(const StudyConfig& cfg);

enum class Format { csv, markdown };

std::string format_report(const ConvergenceReport& rep, Format f, bool include_timing = true);
void emit(const ConvergenceReport& rep, Format f, const std::string& path, bool include_timing = true);
ConvergenceReport read_report_csv(const std::string& path);

// Single solve at (h_ref, tau_ref): probe values per time step and the final field.
struct SolveOutput {
    std::vector<double> times;
    std::vector<std::vector<double>> probe_values; // [n][probe]
    FeFunction final_field;                        // nodal interpolant of the solution at T
    std::vector<std::string> warnings;
};

SolveOutput run_solve(const StudyConfig& cfg);

// Working mesh of size h = 1/n on the unit square; fitted to the segment
// when the initial data or the source lives on a line.
MeshPtr working_mesh(const StudyConfig& cfg, int n);
// Graded hierarchy for line data: level j has base size h0 / 2^j.
std::vector<MeshPtr> graded_hierarchy(const StudyConfig& cfg, int levels, int n0);

} // namespace fracsplit
