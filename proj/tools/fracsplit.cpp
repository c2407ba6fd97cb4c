// Command-line front end: single solves, convergence studies and scalar
// diagnostics for weights and Mittag-Leffler values.

#include "fracsplit/cq.hpp"
#include "fracsplit/error.hpp"
#include "fracsplit/harness.hpp"
#include "fracsplit/special_functions.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace fracsplit;

namespace {

void write_reports(const StudyConfig& cfg, const ConvergenceReport& rep)
{
    std::cout << format_report(rep, Format::markdown, cfg.include_timing);
    if (!cfg.csv.empty())
        emit(rep, Format::csv, cfg.csv, cfg.include_timing);
    if (!cfg.markdown.empty())
        emit(rep, Format::markdown, cfg.markdown, cfg.include_timing);
}

int cmd_solve(const std::string& path)
{
    const StudyConfig cfg = load_config(path);
    const SolveOutput out = run_solve(cfg);
    for (const auto& w : out.warnings)
        std::cerr << "warning: " << w << "\n";
    if (!cfg.probes_csv.empty()) {
        std::ofstream f(cfg.probes_csv);
        if (!f)
            throw Error("cannot open " + cfg.probes_csv);
        f << "t";
        for (const auto& p : cfg.probes)
            f << ",u(" << p[0] << ";" << p[1] << ")";
        f << "\n";
        char buf[64];
        for (std::size_t n = 0; n < out.times.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g", out.times[n]);
            f << buf;
            for (double v : out.probe_values[n]) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                f << "," << buf;
            }
            f << "\n";
        }
    }
    if (!cfg.vtk.empty())
        write_vtk(out.final_field, cfg.vtk, "u");
    std::printf("t = %.6g, ||u||_L2 = %.10e\n", out.times.empty() ? 0.0 : out.times.back(), l2_norm(out.final_field));
    for (std::size_t i = 0; i < cfg.probes.size() && !out.probe_values.empty(); ++i)
        std::printf("u(%g, %g) = %.15e\n", cfg.probes[i][0], cfg.probes[i][1], out.probe_values.back()[i]);
    return 0;
}

int cmd_study(const std::string& path, const char* kind)
{
    StudyConfig cfg = load_config(path);
    cfg.kind = kind;
    const ConvergenceReport rep = cfg.kind == "space" ? run_space_study(cfg) : run_time_study(cfg);
    write_reports(cfg, rep);
    return 0;
}

int cmd_weights(int k, double beta, int n, double tau, const std::string& csv)
{
    const CqWeights w = cq_weights(bdf_gen(k), beta, n, tau);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!csv.empty()) {
        file.open(csv);
        if (!file)
            throw Error("cannot open " + csv);
        os = &file;
    }
    *os << "j,omega\n";
    char buf[64];
    for (int j = 0; j <= n; ++j) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", j, w.omega[j]);
        *os << buf;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Splitting finite element solver for subdiffusion with nonsmooth data"};
    app.require_subcommand(1);

    std::string config;
    auto* solve = app.add_subcommand("solve", "Single solve at (h_ref, tau_ref) with probe and VTK output");
    solve->add_option("--config", config, "TOML configuration")->required()->check(CLI::ExistingFile);

    std::string space_cfg;
    auto* space = app.add_subcommand("converge-space", "Spatial convergence study (Cauchy differences)");
    space->add_option("--config", space_cfg, "TOML configuration")->required()->check(CLI::ExistingFile);

    std::string time_cfg;
    auto* time = app.add_subcommand("converge-time", "Temporal convergence study (Cauchy differences)");
    time->add_option("--config", time_cfg, "TOML configuration")->required()->check(CLI::ExistingFile);

    int wk = 1, wn = 10;
    double wbeta = 0.5, wtau = 1.0;
    std::string wcsv;
    auto* weights = app.add_subcommand("weights", "Print convolution quadrature weights");
    weights->add_option("--k", wk, "BDF order (1..6)")->required();
    weights->add_option("--beta", wbeta, "Power of the generating function")->required();
    weights->add_option("--n", wn, "Largest index")->required()->check(CLI::NonNegativeNumber);
    weights->add_option("--tau", wtau, "Step size recorded with the weights");
    weights->add_option("--csv", wcsv, "Write j,omega rows to this file");

    double ma = 1.0, mb = 1.0, mx = 0.0;
    auto* ml = app.add_subcommand("ml-eval", "Evaluate E_{alpha,beta}(x) for x <= 0");
    ml->add_option("--alpha", ma, "alpha in (0,1]")->required();
    ml->add_option("--beta", mb, "beta > 0")->required();
    ml->add_option("--x", mx, "argument x <= 0")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve)
            return cmd_solve(config);
        if (*space)
            return cmd_study(space_cfg, "space");
        if (*time)
            return cmd_study(time_cfg, "time");
        if (*weights)
            return cmd_weights(wk, wbeta, wn, wtau, wcsv);
        if (*ml) {
            std::printf("%.17g\n", mittag_leffler({ma, mb}, mx));
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
