// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "graphfrac/fd_oracle.hpp"
#include "graphfrac/fractional_solver.hpp"
#include "graphfrac/io.hpp"
#include "graphfrac/special_functions.hpp"
#include "graphfrac/spectral.hpp"
#include "graphfrac/verification.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace graphfrac;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kEigenRel = 1e-10;
constexpr double kEigenSeconds = 1.0;
constexpr double kGramTol = 1e-8;
constexpr double kGramSeconds = 10.0;
constexpr double kExpTol = 1e-12;
constexpr double kErfcTol = 1e-10;
constexpr double kMonotoneTol = 1e-8;
constexpr double kKernelTol = 1e-8;
constexpr double kModeTol = 1e-8;
constexpr double kOracleTol = 2e-2;
constexpr double kOrderBand = 0.3;
constexpr double kClassicalTol = 1e-2;
constexpr double kSlopeBand = 0.1;
constexpr double kResidualBand = 0.2;
constexpr double kSuiteSeconds = 300.0;

int failures = 0;

void verdict(int id, bool pass, const std::string& detail)
{
    std::printf("CRITERION %2d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(const char* format, auto... args)
{
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Trapezoid L2(G) distance of two functions on the same grids.
double l2_gap(const GraphFunction& a, const GraphFunction& b)
{
    double sum = 0.0;
    for (std::size_t e = 0; e < a.edge_count(); ++e) {
        const Eigen::VectorXd d = a.values(e) - b.values(e);
        const double h = a.step(e);
        sum += h * (d.squaredNorm() - 0.5 * (d(0) * d(0) + d(d.size() - 1) * d(d.size() - 1)));
    }
    return std::sqrt(sum);
}

/// Largest nodal difference.
double sup_gap(const GraphFunction& a, const GraphFunction& b)
{
    double worst = 0.0;
    for (std::size_t e = 0; e < a.edge_count(); ++e) {
        worst = std::max(worst, (a.values(e) - b.values(e)).cwiseAbs().maxCoeff());
    }
    return worst;
}

StarGraph star(std::size_t k, double l)
{
    return StarGraph(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), l));
}

ProblemSpec load(const std::string& name, int intervals = 64)
{
    return parse_problem_file(std::string(GRAPHFRAC_PROBLEMS) + "/" + name + ".json", intervals);
}

std::shared_ptr<const SpectralBasis> basis_of(const StarGraph& g, std::size_t n)
{
    return std::make_shared<const SpectralBasis>(SpectralBasis::first(g, n));
}

void criterion_1()
{
    const auto start = std::chrono::steady_clock::now();
    const Eigen::VectorXd three = SpectralBasis::first(star(3, 1.0), 6).eigenvalues();
    const double pi2 = kPi * kPi;
    const double expected[] = {pi2 / 4, pi2, pi2, 9 * pi2 / 4, 4 * pi2, 4 * pi2};
    double worst = 0.0;
    for (int n = 0; n < 6; ++n) {
        worst = std::max(worst, std::abs(three(n) - expected[n]) / expected[n]);
    }
    const Eigen::VectorXd two = SpectralBasis::first(star(2, 1.0), 40).eigenvalues();
    for (int n = 0; n < 40; ++n) {
        const double interval = std::pow((n + 1) * kPi / 2.0, 2);
        worst = std::max(worst, std::abs(two(n) - interval) / interval);
    }
    const double elapsed = seconds_since(start);
    verdict(1, worst <= kEigenRel && elapsed < kEigenSeconds,
            fmt("max rel eigenvalue error %.2e (tol %.0e), %.3f s (limit %.0f s)", worst, kEigenRel, elapsed,
                kEigenSeconds));
}

void criterion_2()
{
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> len(0.5, 3.0);
    double worst = 0.0;
    for (std::size_t k : {2U, 3U, 5U}) {
        Eigen::VectorXd random(static_cast<Eigen::Index>(k));
        for (auto& v : random) {
            v = len(rng);
        }
        for (const StarGraph& g : {star(k, 1.0), StarGraph(random)}) {
            const auto basis = SpectralBasis::first(g, 40);
            const auto intervals = GraphFunction::uniform_intervals(g, 512);
            std::vector<GraphFunction> psi;
            for (const EigenPair& p : basis.pairs()) {
                psi.push_back(build_eigenfunction(p, g, intervals));
            }
            for (std::size_t m = 0; m < psi.size(); ++m) {
                for (std::size_t n = 0; n <= m; ++n) {
                    worst = std::max(worst, std::abs(inner_product(psi[m], psi[n]) - (m == n ? 1.0 : 0.0)));
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    verdict(2, worst <= kGramTol && elapsed < kGramSeconds,
            fmt("max|G-I| %.2e over k in {2,3,5}, N=40, grid 512 (tol %.0e), %.2f s (limit %.0f s)", worst, kGramTol,
                elapsed, kGramSeconds));
}

void criterion_3()
{
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> kdist(2, 5);
    std::uniform_real_distribution<double> len(0.5, 3.0);
    constexpr double lambda_max = 50.0;
    double worst_margin = -1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const int k = kdist(rng);
        Eigen::VectorXd l(k);
        for (auto& v : l) {
            v = len(rng);
        }
        const double count = static_cast<double>(eigenpairs_up_to(StarGraph(l), lambda_max).size());
        worst_margin = std::max(worst_margin, std::abs(count - lambda_max * l.sum() / kPi) - (k + 1.0));
    }
    verdict(3, worst_margin <= 0.0,
            fmt("20 trials, max(|count - Weyl| - (k+1)) = %.3f (must be <= 0)", worst_margin));
}

void criterion_4()
{
    double exp_err = 0.0;
    for (int j = 0; j <= 5000; ++j) {
        const double x = 50.0 * j / 5000;
        exp_err = std::max(exp_err, std::abs(mittag_leffler({1.0, 1.0}, -x) - std::exp(-x)));
    }
    double erfc_err = 0.0;
    for (int j = 0; j <= 4000; ++j) {
        const long double x = 20.0L * j / 4000;
        const double ref = static_cast<double>(std::exp(x * x) * std::erfc(x));
        erfc_err = std::max(erfc_err, std::abs(mittag_leffler({0.5, 1.0}, -static_cast<double>(x)) - ref));
    }

    bool properties_hold = true;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> log_eta(-6.0, 6.0);
    for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
        // Kernel bounds and monotonicity on 10^4 sampled points.
        std::vector<double> eta(10000);
        for (double& e : eta) {
            e = std::pow(10.0, log_eta(rng));
        }
        std::sort(eta.begin(), eta.end());
        const double bound = rgamma(alpha);
        double previous = 1.0;
        for (double e : eta) {
            const double kernel = mittag_leffler({alpha, alpha}, -e);
            const double decay = mittag_leffler({alpha, 1.0}, -e);
            properties_hold = properties_hold && kernel > 0.0 && kernel < bound && decay > 0.0 && decay < 1.0 && decay <= previous + 1e-15;
            previous = decay;
        }
        // Alternating signs of the first two finite differences on 10^4 grid points.
        const double h = 1e-3;
        for (int j = 1; j <= 10000; ++j) {
            const double t = h * j;
            const double e0 = mittag_leffler({alpha, 1.0}, -t);
            const double e1 = mittag_leffler({alpha, 1.0}, -(t + h));
            const double e2 = mittag_leffler({alpha, 1.0}, -(t + 2.0 * h));
            properties_hold = properties_hold && (e1 - e0) / h <= kMonotoneTol && (e2 - 2.0 * e1 + e0) / (h * h) >= -kMonotoneTol;
        }
    }

    boost::math::quadrature::tanh_sinh<double> integrator;
    double kernel_err = 0.0;
    for (double alpha : {0.3, 0.6, 0.9}) {
        for (double mu : {0.5, 5.0, 40.0}) {
            for (double t : {0.1, 1.0, 2.0}) {
                auto f = [&](double xi) {
                    return std::pow(xi, alpha - 1.0) * mittag_leffler({alpha, alpha}, -mu * std::pow(xi, alpha));
                };
                kernel_err = std::max(kernel_err, std::abs(ml_kernel_integral(alpha, mu, t) - integrator.integrate(f, 0.0, t)));
            }
        }
    }
    verdict(4, exp_err <= kExpTol && erfc_err <= kErfcTol && properties_hold && kernel_err <= kKernelTol,
            fmt("exp %.1e (tol %.0e), erfc %.1e (tol %.0e), sign/monotonicity %s, kernel integral %.1e (tol %.0e)",
                exp_err, kExpTol, erfc_err, kErfcTol, properties_hold ? "ok" : "violated", kernel_err, kKernelTol));
}

void criteria_5_6()
{
    const StarGraph g = star(3, 1.0);
    const auto basis = basis_of(g, 16);
    const auto intervals = GraphFunction::uniform_intervals(g, 64);
    const GraphFunction psi1 = basis->synthesize(Eigen::VectorXd::Unit(16, 0), intervals);
    const double mu1 = basis->eigenvalues()(0);
    double homogeneous = 0.0;
    double source = 0.0;
    for (double alpha : {0.3, 0.5, 0.8}) {
        const SpectralSolution s1({g, alpha, 1.0, psi1, Source::zero()}, basis);
        const SpectralSolution s2({g, alpha, 1.0, GraphFunction::zero(g, intervals), Source::time_constant(psi1)}, basis);
        std::vector<double> times;
        for (int j = 1; j <= 20; ++j) {
            times.push_back(j / 20.0);
        }
        const SolutionField f1 = solve(s1, times, intervals);
        const SolutionField f2 = solve(s2, times, intervals);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double e = ml_decay_kernel(alpha, mu1, times[j]);
            homogeneous = std::max(homogeneous, sup_gap(f1.values[j], e * psi1));
            source = std::max(source, sup_gap(f2.values[j], ((1.0 - e) / mu1) * psi1));
        }
    }
    verdict(5, homogeneous <= kModeTol,
            fmt("max nodal error vs E(-mu_1 t^alpha) Psi_1 over 20 times, alpha in {0.3,0.5,0.8}: %.2e (tol %.0e)",
                homogeneous, kModeTol));
    verdict(6, source <= kModeTol,
            fmt("max nodal error vs (1-E)/mu_1 Psi_1 over 20 times, alpha in {0.3,0.5,0.8}: %.2e (tol %.0e)", source,
                kModeTol));
}

double fd_single_mode_error(double alpha, int m, int steps)
{
    const StarGraph g = star(3, 1.0);
    const auto basis = basis_of(g, 1);
    const GraphFunction psi = basis->synthesize(Eigen::VectorXd::Unit(1, 0), GraphFunction::uniform_intervals(g, m));
    const SolutionField fd = solve_fd({g, alpha, 1.0, psi, Source::zero()}, FDGrid::uniform(g, m, steps));
    return l2_gap(fd.values.back(), ml_decay_kernel(alpha, basis->eigenvalues()(0), 1.0) * psi);
}

void criterion_7()
{
    bool pass = true;
    std::ostringstream detail;
    for (const char* name : {"standard", "rough", "source"}) {
        const ProblemSpec p = load(name);
        const EstimateReport coarse = cross_validate(p, 256, FDGrid::uniform(p.graph, 64, 256), kOracleTol);
        const EstimateReport fine = cross_validate(p, 256, FDGrid::uniform(p.graph, 128, 512), kOracleTol);
        const bool ok = *coarse.pass && *fine.value < *coarse.value;
        pass = pass && ok;
        detail << fmt("%s %.2e->%.2e; ", name, *coarse.value, *fine.value);
    }
    // alpha = 0.8 carries the order check; alpha = 0.5 is printed for reference.
    const double alpha = 0.8;
    const double e1 = fd_single_mode_error(alpha, 256, 32);
    const double e2 = fd_single_mode_error(alpha, 256, 64);
    const double e3 = fd_single_mode_error(alpha, 256, 128);
    const double p1 = std::log2(e1 / e2);
    const double p2 = std::log2(e2 / e3);
    pass = pass && std::abs(p1 - (2.0 - alpha)) <= kOrderBand && std::abs(p2 - (2.0 - alpha)) <= kOrderBand;
    const double h1 = fd_single_mode_error(0.5, 256, 32);
    const double h2 = fd_single_mode_error(0.5, 256, 64);
    detail << fmt("(tol %.0e, must decrease); FD temporal order at alpha=0.8: %.3f, %.3f (band %.1f +- %.1f); "
                  "alpha=0.5 (info): %.3f",
                  kOracleTol, p1, p2, 2.0 - alpha, kOrderBand, std::log2(h1 / h2));
    verdict(7, pass, detail.str());
}

void criterion_8()
{
    const StarGraph g{1.0, 1.5, 2.0};
    const auto basis = basis_of(g, 128);
    DistancePolynomial shape{Eigen::MatrixXd::Zero(3, 3)};
    shape.coefficients.col(1) = g.lengths().cwiseInverse();
    shape.coefficients(1, 2) = 0.3;
    const GraphFunction y0 = GraphFunction::from_analytic(g, shape, GraphFunction::uniform_intervals(g, 64));
    const SpectralSolution s({g, 0.999, 1.0, y0, Source::zero()}, basis);
    double worst = 0.0;
    for (double t : {0.1, 0.5, 1.0}) {
        const Eigen::VectorXd heat = s.initial_coefficients().array() * (-s.mu().array() * t).exp();
        worst = std::max(worst, (s.coefficients(t) - heat).norm() / heat.norm());
    }
    verdict(8, worst <= kClassicalTol,
            fmt("alpha=0.999 vs heat series, t in {0.1,0.5,1}: max rel %.2e (tol %.0e)", worst, kClassicalTol));
}

void criterion_9()
{
    const StarGraph g = star(3, 1.0);
    constexpr int n_modes = 1024;
    const auto basis = basis_of(g, n_modes);
    Eigen::VectorXd a(n_modes);
    for (int n = 0; n < n_modes; ++n) {
        a(n) = std::pow(n + 1.0, -0.55);
    }
    const GraphFunction y0 = basis->synthesize(a, GraphFunction::uniform_intervals(g, 16));
    bool pass = true;
    std::string detail = "rough data a_n = n^-0.55, N=1024:";
    for (double alpha : {0.4, 0.6}) {
        const EstimateReport r = check_smoothing_estimate(SpectralSolution({g, alpha, 1.0, y0, Source::zero()}, basis));
        const double slope = r.exponent.value_or(NAN);
        pass = pass && std::abs(slope + alpha) <= kSlopeBand;
        detail += fmt(" alpha=%.1f slope %.3f;", alpha, slope);
    }
    verdict(9, pass, detail + fmt(" (band -alpha +- %.1f)", kSlopeBand));
}

void criterion_10()
{
    bool pass = true;
    std::string detail;
    for (const char* name : {"standard", "mixed"}) {
        const ProblemSpec p = load(name);
        const EstimateReport r = check_decay_estimate(SpectralSolution(p, basis_of(p.graph, 64)));
        pass = pass && r.pass.value_or(false);
        detail += fmt("%s C=%.4f [%s]; ", name, r.fitted_constant.value_or(NAN), r.note.c_str());
    }
    verdict(10, pass, detail + "(stability < 5% under sample doubling)");
}

void criterion_11()
{
    bool pass = true;
    std::string detail;
    for (const char* name : {"standard", "mixed", "rough", "source"}) {
        const ProblemSpec p = load(name);
        const EstimateReport r = check_l2_stability(SpectralSolution(p, basis_of(p.graph, 64)));
        pass = pass && r.pass.value_or(false) && !r.fitted_constant.has_value();
        detail += fmt("%s sup/bound=%.3f; ", name, r.value.value_or(NAN));
    }
    verdict(11, pass, detail + "(explicit constant, no fit)");
}

double single_mode_residual(double alpha, int m, int steps, double t_start)
{
    const StarGraph g = star(3, 1.0);
    const auto basis = basis_of(g, 4);
    const auto intervals = GraphFunction::uniform_intervals(g, m);
    const GraphFunction psi = basis->synthesize(Eigen::VectorXd::Unit(4, 0), intervals);
    const ProblemSpec p{g, alpha, 1.0, psi, Source::zero()};
    const SolutionField field = solve(SpectralSolution(p, basis), uniform_times(1.0, steps), intervals);
    return pde_residual(field, p, {t_start});
}

void criterion_12()
{
    // Levels t < 0.1 are excluded: the residual at the first level is O(mu) for every step.
    constexpr double alpha = 0.5;
    constexpr double t_start = 0.1;
    const double r128 = single_mode_residual(alpha, 2048, 128, t_start);
    const double r256 = single_mode_residual(alpha, 2048, 256, t_start);
    const double r512 = single_mode_residual(alpha, 2048, 512, t_start);
    const double pt1 = std::log2(r128 / r256);
    const double pt2 = std::log2(r256 / r512);
    const double s4 = single_mode_residual(alpha, 4, 8192, t_start);
    const double s8 = single_mode_residual(alpha, 8, 8192, t_start);
    const double s16 = single_mode_residual(alpha, 16, 8192, t_start);
    const double px1 = std::log2(s4 / s8);
    const double px2 = std::log2(s8 / s16);
    const double j1 = single_mode_residual(alpha, 16, 128, t_start);
    const double j2 = single_mode_residual(alpha, 32, 256, t_start);
    const double j3 = single_mode_residual(alpha, 64, 512, t_start);
    const bool decreasing = j2 < j1 && j3 < j2;
    const bool pass = decreasing && std::abs(pt1 - (2.0 - alpha)) <= kResidualBand &&
                      std::abs(pt2 - (2.0 - alpha)) <= kResidualBand && std::abs(px1 - 2.0) <= kResidualBand &&
                      std::abs(px2 - 2.0) <= kResidualBand;
    verdict(12, pass,
            fmt("alpha=0.5, t>=0.1: joint refinement %.2e->%.2e->%.2e; dt orders %.3f, %.3f (%.1f +- %.1f); "
                "h orders %.3f, %.3f (2 +- %.1f)",
                j1, j2, j3, pt1, pt2, 2.0 - alpha, kResidualBand, px1, px2, kResidualBand));
}

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_verify(const std::filesystem::path& out)
{
    const std::string command = std::string("\"") + GRAPHFRAC_CLI + "\" verify --problem \"" + GRAPHFRAC_PROBLEMS +
                                "/standard.json\" > \"" + out.string() + "\"";
    const int status = std::system(command.c_str());
    std::ifstream in(out, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

void criterion_13(std::chrono::steady_clock::time_point start)
{
    const auto dir = std::filesystem::temp_directory_path();
    const CliResult a = run_verify(dir / "graphfrac_acceptance_verify_1.json");
    const CliResult b = run_verify(dir / "graphfrac_acceptance_verify_2.json");
    const bool identical = !a.out.empty() && a.out == b.out;
    const double elapsed = seconds_since(start);
    verdict(13, identical && a.exit_code == 0 && b.exit_code == 0 && elapsed < kSuiteSeconds,
            fmt("verify on standard: exit codes %d/%d, reports %s (%zu bytes); acceptance run %.1f s (limit %.0f s)",
                a.exit_code, b.exit_code, identical ? "byte-identical" : "differ", a.out.size(), elapsed,
                kSuiteSeconds));
}

void guarded(int id, const std::function<void()>& body)
{
    try {
        body();
    } catch (const std::exception& e) {
        verdict(id, false, std::string("exception: ") + e.what());
    }
}

} // namespace

int main()
{
    const auto start = std::chrono::steady_clock::now();
    guarded(1, criterion_1);
    guarded(2, criterion_2);
    guarded(3, criterion_3);
    guarded(4, criterion_4);
    guarded(5, criteria_5_6);
    guarded(7, criterion_7);
    guarded(8, criterion_8);
    guarded(9, criterion_9);
    guarded(10, criterion_10);
    guarded(11, criterion_11);
    guarded(12, criterion_12);
    guarded(13, [&] { criterion_13(start); });
    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
    return failures == 0 ? 0 : 1;
}
