#include "graphfrac/errors.hpp"
#include "graphfrac/fd_oracle.hpp"
#include "graphfrac/fractional_solver.hpp"
#include "graphfrac/io.hpp"
#include "graphfrac/special_functions.hpp"
#include "graphfrac/spectral.hpp"
#include "graphfrac/verification.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using graphfrac::EstimateReport;
using nlohmann::json;

enum ExitCode { kSuccess = 0, kCheckFailure = 1, kUsage = 2, kNumerical = 3 };

struct RunConfig {
    std::string problem;
    std::vector<double> lengths;
    std::size_t modes = 64;
    int grid = 64;
    int timesteps = 64;
    std::optional<double> tol;
    std::string out;
    double ml_alpha = 0.5;
    double ml_beta = 1.0;
    double z_min = -10.0;
    double z_max = 0.0;
    int points = 101;
};

/// Writes to <out>/<name> when an output directory is set, else to stdout.
class Sink {
public:
    Sink(const std::string& dir, const std::string& name)
    {
        if (!dir.empty()) {
            std::filesystem::create_directories(dir);
            file_.open(std::filesystem::path(dir) / name, std::ios::binary);
            if (!file_) {
                throw graphfrac::InvalidArgument("out: cannot write '" + dir + "/" + name + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void print_error(const std::string& kind, const std::string& message, int code)
{
    const json error = {{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
    std::cerr << error.dump() << '\n';
}

graphfrac::StarGraph graph_from(const RunConfig& config)
{
    if (!config.problem.empty()) {
        return graphfrac::parse_problem_file(config.problem, config.grid).graph;
    }
    if (config.lengths.empty()) {
        throw graphfrac::InvalidArgument("eigen: either --problem or --lengths is required");
    }
    return graphfrac::StarGraph(Eigen::Map<const Eigen::VectorXd>(config.lengths.data(),
                                                                  static_cast<Eigen::Index>(config.lengths.size())));
}

int run_eigen(const RunConfig& config)
{
    const graphfrac::StarGraph graph = graph_from(config);
    const auto basis = graphfrac::SpectralBasis::first(graph, config.modes);
    Sink sink(config.out, "eigen.csv");
    graphfrac::write_eigen_report(sink.stream(), basis);
    return kSuccess;
}

int run_solve(const RunConfig& config)
{
    const graphfrac::ProblemSpec problem = graphfrac::parse_problem_file(config.problem, config.grid);
    graphfrac::SolveOptions options;
    if (config.tol) {
        options.tail_tolerance = *config.tol;
    }
    const auto times = graphfrac::uniform_times(problem.horizon, config.timesteps);
    const auto intervals = graphfrac::GraphFunction::uniform_intervals(problem.graph, config.grid);
    const graphfrac::SolutionField field = graphfrac::solve(problem, config.modes, times, intervals, options);
    {
        Sink sink(config.out, "solution.csv");
        graphfrac::write_solution_csv(sink.stream(), field);
    }
    if (!config.out.empty()) {
        Sink modes(config.out, "modes.csv");
        graphfrac::write_mode_history_csv(modes.stream(), field);
        Sink tail(config.out, "tail.csv");
        tail.stream() << "t,tail\n";
        for (std::size_t j = 0; j < field.times.size(); ++j) {
            char line[64];
            std::snprintf(line, sizeof line, "%.17g,%.17g\n", field.times[j], field.tail(static_cast<Eigen::Index>(j)));
            tail.stream() << line;
        }
    }
    for (const std::string& w : field.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    return kSuccess;
}

int emit_reports(const RunConfig& config, const std::vector<EstimateReport>& reports, const std::string& name)
{
    Sink sink(config.out, name);
    sink.stream() << graphfrac::to_json(reports).dump(2) << '\n';
    for (const EstimateReport& r : reports) {
        if (r.pass.has_value() && !*r.pass) {
            return kCheckFailure;
        }
    }
    return kSuccess;
}

int run_verify(const RunConfig& config)
{
    const graphfrac::ProblemSpec problem = graphfrac::parse_problem_file(config.problem, config.grid);
    auto basis = std::make_shared<const graphfrac::SpectralBasis>(graphfrac::SpectralBasis::first(problem.graph, config.modes));
    const graphfrac::SpectralSolution solution(problem, basis);
    return emit_reports(config, graphfrac::run_all_checks(solution), "verify.json");
}

int run_compare(const RunConfig& config)
{
    const graphfrac::ProblemSpec problem = graphfrac::parse_problem_file(config.problem, config.grid);
    const auto grid = graphfrac::FDGrid::uniform(problem.graph, config.grid, config.timesteps);
    const double tol = config.tol.value_or(2e-2);
    return emit_reports(config, {graphfrac::cross_validate(problem, config.modes, grid, tol)}, "compare.json");
}

int run_ml_table(const RunConfig& config)
{
    if (config.points < 2 || !(config.z_max > config.z_min)) {
        throw graphfrac::InvalidArgument("ml-table: need --points >= 2 and --zmax > --zmin");
    }
    if (!(config.ml_alpha > 0.0 && config.ml_alpha < 2.0)) {
        throw graphfrac::InvalidArgument("ml-table: alpha must lie in (0,2)");
    }
    Sink sink(config.out, "ml_table.csv");
    sink.stream() << "z,value\n";
    for (int j = 0; j < config.points; ++j) {
        const double z = config.z_min + (config.z_max - config.z_min) * j / (config.points - 1);
        const double v = graphfrac::mittag_leffler({config.ml_alpha, config.ml_beta}, z);
        char line[64];
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", z, v);
        sink.stream() << line;
    }
    return kSuccess;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-fractional diffusion on metric star graphs"};
    app.require_subcommand(1);
    RunConfig config;

    auto positive = CLI::PositiveNumber;
    auto add_common = [&](CLI::App* cmd, bool needs_problem) {
        auto* opt = cmd->add_option("--problem", config.problem, "Problem JSON file");
        if (needs_problem) {
            opt->required()->check(CLI::ExistingFile);
        }
        cmd->add_option("--modes", config.modes, "Number of eigenmodes N")->check(positive);
        cmd->add_option("--grid", config.grid, "Intervals per edge")->check(CLI::Range(2, 1 << 20));
        cmd->add_option("--out", config.out, "Output directory (stdout when omitted)");
    };

    auto* eigen = app.add_subcommand("eigen", "Eigenvalue report CSV");
    add_common(eigen, false);
    eigen->add_option("--lengths", config.lengths, "Edge lengths (instead of --problem)")->check(positive);

    auto* solve = app.add_subcommand("solve", "Spectral solution and mode history CSVs");
    add_common(solve, true);
    solve->add_option("--timesteps", config.timesteps, "Uniform time steps M")->check(positive);
    solve->add_option("--tol", config.tol, "Tail-indicator warning threshold")->check(positive);

    auto* verify = app.add_subcommand("verify", "JSON verdicts for all applicable estimates");
    add_common(verify, true);

    auto* compare = app.add_subcommand("compare", "Spectral vs finite-difference cross-validation");
    add_common(compare, true);
    compare->add_option("--timesteps", config.timesteps, "FD time steps M")->check(positive);
    compare->add_option("--tol", config.tol, "Relative space-time L2 tolerance")->check(positive);

    auto* table = app.add_subcommand("ml-table", "Tabulate E_{alpha,beta}(z)");
    table->add_option("--alpha", config.ml_alpha, "alpha in (0,2)");
    table->add_option("--beta", config.ml_beta, "beta");
    table->add_option("--zmin", config.z_min, "Left end of the z range");
    table->add_option("--zmax", config.z_max, "Right end of the z range");
    table->add_option("--points", config.points, "Number of points")->check(positive);
    table->add_option("--out", config.out, "Output directory (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what(), kUsage);
        return kUsage;
    }

    try {
        if (eigen->parsed()) {
            return run_eigen(config);
        }
        if (solve->parsed()) {
            return run_solve(config);
        }
        if (verify->parsed()) {
            return run_verify(config);
        }
        if (compare->parsed()) {
            return run_compare(config);
        }
        return run_ml_table(config);
    } catch (const graphfrac::InvalidArgument& e) {
        print_error("invalid_input", e.what(), kUsage);
        return kUsage;
    } catch (const graphfrac::GraphMismatch& e) {
        print_error("graph_mismatch", e.what(), kUsage);
        return kUsage;
    } catch (const graphfrac::Error& e) {
        print_error("numerical", e.what(), kNumerical);
        return kNumerical;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), kNumerical);
        return kNumerical;
    }
}
