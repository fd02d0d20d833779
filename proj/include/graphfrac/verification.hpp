#ifndef GRAPHFRAC_VERIFICATION_HPP
#define GRAPHFRAC_VERIFICATION_HPP

#include "graphfrac/fd_oracle.hpp"
#include "graphfrac/fractional_solver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace graphfrac {

struct EstimateSample {
    double t;
    double lhs;
    double rhs;
};

/// Verdict of one estimate. pass is empty when the data does not meet the
/// hypothesis of the estimate (no verdict). fitted_constant is empty for
/// explicit-constant checks.
struct EstimateReport {
    std::string estimate_id;
    std::optional<bool> pass;
    std::optional<double> fitted_constant;
    std::optional<double> exponent;
    /// Scalar outcome of checks without a fitted constant (e.g. relative difference).
    std::optional<double> value;
    std::vector<EstimateSample> samples;
    std::string note;
};

struct VerifyOptions {
    /// Log-spaced sample count on [t_min, T]; the stability check reruns with twice as many.
    int samples = 48;
    double t_min = 1e-4;
    /// Slope-fit window.
    double fit_min = 1e-4;
    double fit_max = 1e-1;
    /// Points whose truncation tail exceeds this fraction of the LHS are left out of fits.
    double tail_fraction = 0.1;
    /// Maximal relative change of a fitted constant under sample doubling.
    double stability = 0.05;
    /// Spectral mass above mode N/2 beyond which a norm counts as unresolved.
    double hypothesis_tail = 0.1;
};

/// n log-spaced points on [a, b], both ends included.
std::vector<double> log_times(double a, double b, int n);

/// C = max lhs/rhs over the samples (0 when every lhs is 0).
double fitted_constant(const std::vector<EstimateSample>& samples);

/// Least-squares slope of log y against log t.
double fit_slope(const std::vector<double>& t, const std::vector<double>& y);

/// ||y(t)||_{gamma=1} <= C (||y0|| t^{-alpha} + sup ||f||). The exponent is the
/// fitted small-time slope of the homogeneous part.
EstimateReport check_smoothing_estimate(const SpectralSolution& solution, const VerifyOptions& options = {});

/// ||y(t)|| <= C ||y0|| / (1 + mu_1 t^alpha) for f = 0.
EstimateReport check_decay_estimate(const SpectralSolution& solution, const VerifyOptions& options = {});

/// ||y(t)||_{gamma=1} + ||D^alpha y(t)|| <= C ||y0||_{gamma=1} / (1 + mu_1 t^alpha) for f = 0;
/// no verdict unless y0 is resolved in the gamma=1 norm.
EstimateReport check_decay_estimate_domain(const SpectralSolution& solution, const VerifyOptions& options = {});

/// sup_t ||y(t)|| <= max{1, T^alpha / Gamma(alpha+1)} (||P_N y0|| + sup_t ||P_N f||), explicit constant.
EstimateReport check_l2_stability(const SpectralSolution& solution, const VerifyOptions& options = {});

/// (int_0^t ||y||_{gamma=1}^2)^{1/2} + (int_0^t ||D^alpha y||^2)^{1/2} <= C (||y0||_{gamma=1/2} + sup ||f||);
/// no verdict unless y0 is resolved in the gamma=1/2 norm.
EstimateReport check_energy_caputo(const SpectralSolution& solution, const VerifyOptions& options = {});

/// sup_s<=t ||y(s)||_{gamma=1} + (int_0^t ||D^alpha y||^2)^{1/2} <= C (||y0||_{gamma=1} + sup ||f||);
/// no verdict unless y0 is resolved in the gamma=1 norm.
EstimateReport check_energy_caputo_domain(const SpectralSolution& solution, const VerifyOptions& options = {});

struct ResidualOptions {
    /// Levels with t < t_start are skipped (initial layer).
    double t_start = 0.0;
};

/// sup over levels t_n >= t_start of the discrete L2(G) norm of
/// L1-Caputo(y) - y_xx - f on interior nodes. The field must live on a uniform
/// time grid starting at 0 and on uniform spatial grids.
double pde_residual(const SolutionField& field, const ProblemSpec& problem, const ResidualOptions& options = {});

/// Relative space-time L2 difference between a spectral and an FD solution
/// on the FD nodes and levels (trapezoid in time).
double relative_space_time_difference(const SolutionField& reference, const SolutionField& other);

/// Spectral solution with n_modes against solve_fd on `grid`; pass iff the relative difference <= tol.
EstimateReport cross_validate(const ProblemSpec& problem, std::size_t n_modes, const FDGrid& grid, double tol);

} // namespace graphfrac

#endif // GRAPHFRAC_VERIFICATION_HPP
