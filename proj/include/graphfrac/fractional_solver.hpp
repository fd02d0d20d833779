#ifndef GRAPHFRAC_FRACTIONAL_SOLVER_HPP
#define GRAPHFRAC_FRACTIONAL_SOLVER_HPP

#include "graphfrac/metric_graph.hpp"
#include "graphfrac/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace graphfrac {

/// g(t) = value.
struct ConstantProfile {
    double value = 1.0;
};
/// g(t) = sum_j coefficients(j) t^j.
struct PolynomialProfile {
    Eigen::VectorXd coefficients;
};
/// g(t) = coefficient t^exponent, exponent > -1.
struct PowerProfile {
    double coefficient = 1.0;
    double exponent = 1.0;
};
/// g(t) = amplitude sin(frequency t + phase).
struct SineProfile {
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
};
/// g(t) = amplitude exp(rate t).
struct ExponentialProfile {
    double amplitude = 1.0;
    double rate = -1.0;
};
/// Piecewise-linear interpolation of (times, values); constant extrapolation.
struct SampledProfile {
    Eigen::VectorXd times;
    Eigen::VectorXd values;
};

using TimeProfile =
    std::variant<ConstantProfile, PolynomialProfile, PowerProfile, SineProfile, ExponentialProfile, SampledProfile>;

double evaluate(const TimeProfile& g, double t);

/// f(x, t) = profile(t) shape(x).
struct SeparableTerm {
    TimeProfile profile;
    GraphFunction shape;
};

/// f(., t_j) given at increasing times, linear in time in between.
struct SampledSource {
    std::vector<double> times;
    std::vector<GraphFunction> slices;
};

/// Right-hand side f: a finite sum of separable terms plus an optional sampled part.
struct Source {
    std::vector<SeparableTerm> terms;
    std::shared_ptr<const SampledSource> sampled;

    static Source zero() { return {}; }
    static Source time_constant(GraphFunction shape);
    static Source separable(TimeProfile profile, GraphFunction shape);
    static Source from_samples(SampledSource samples);

    [[nodiscard]] bool is_zero() const noexcept { return terms.empty() && !sampled; }
    [[nodiscard]] bool is_time_constant() const noexcept;
    /// f(., t) on the given grids.
    [[nodiscard]] GraphFunction at(double t, const StarGraph& graph, const std::vector<int>& intervals) const;
};

struct ProblemSpec {
    StarGraph graph;
    double alpha;
    double horizon;
    GraphFunction y0;
    Source source;

    /// Throws InvalidArgument unless 0 < alpha < 1, horizon > 0, y0 lives on `graph`
    /// and vanishes at the outer vertices within tol.
    void validate(double tol = 1e-10) const;
};

/// Time dependence of one spectral coefficient of the source:
/// f_n(t) = sum_k weights[k] profiles[k](t) + linear interpolation of (sample_times, sample_values).
struct ModeSource {
    std::vector<TimeProfile> profiles;
    std::vector<double> weights;
    Eigen::VectorXd sample_times;
    Eigen::VectorXd sample_values;

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] bool is_zero() const;
    /// sup over the sample knots and 512 uniform points of [0, horizon].
    [[nodiscard]] double sup_abs(double horizon) const;
};

/// Product-integration refinement control for the source convolution.
struct ConvolutionOptions {
    int initial_segments = 256;
    int max_segments = 4096;
    double tolerance = 1e-8;
};

/// int_0^t (t-s)^{alpha-1} E_{alpha,alpha}(-mu (t-s)^alpha) f(s) ds.
/// Constant, polynomial and power profiles use closed forms; everything else uses
/// midpoint product integration with exact kernel integrals per segment.
double source_convolution(const ModeSource& f, double mu, double alpha, double t, const ConvolutionOptions& options = {});

/// Product-integration rule alone with a fixed number of uniform segments.
double product_integration(const std::function<double(double)>& f, double mu, double alpha, double t, int segments);

/// T_n(t) = a_n E_{alpha,1}(-mu_n t^alpha) + source convolution.
double mode_coefficient(double a_n, const ModeSource& f_n, double mu_n, double alpha, double t,
                        const ConvolutionOptions& options = {});

/// Eigenfunction-expansion solution restricted to the first N modes. Evaluates
/// the mode coefficients at arbitrary times.
class SpectralSolution {
public:
    SpectralSolution(ProblemSpec problem, std::shared_ptr<const SpectralBasis> basis, ConvolutionOptions options = {});

    [[nodiscard]] const ProblemSpec& problem() const noexcept { return problem_; }
    [[nodiscard]] const SpectralBasis& basis() const noexcept { return *basis_; }
    [[nodiscard]] const std::shared_ptr<const SpectralBasis>& basis_ptr() const noexcept { return basis_; }
    [[nodiscard]] std::size_t modes() const noexcept { return basis_->size(); }
    [[nodiscard]] const Eigen::VectorXd& mu() const noexcept { return mu_; }
    /// a_n = <y0, Psi_n>.
    [[nodiscard]] const Eigen::VectorXd& initial_coefficients() const noexcept { return a_; }
    [[nodiscard]] const std::vector<ModeSource>& mode_sources() const noexcept { return f_; }

    /// (T_1(t), ..., T_N(t)).
    [[nodiscard]] Eigen::VectorXd coefficients(double t) const;
    /// Homogeneous part a_n E_{alpha,1}(-mu_n t^alpha).
    [[nodiscard]] Eigen::VectorXd homogeneous_coefficients(double t) const;
    /// (f_1(t), ..., f_N(t)).
    [[nodiscard]] Eigen::VectorXd source_coefficients(double t) const;
    /// Mode-wise Caputo derivative -mu_n T_n(t) + f_n(t), given T(t).
    [[nodiscard]] Eigen::VectorXd caputo_coefficients(double t, const Eigen::VectorXd& coefficients) const;
    /// |a_N| E_{alpha,1}(-mu_N t^alpha) + sup|f_N| (1 - E_{alpha,1}(-mu_N t^alpha)) / mu_N.
    [[nodiscard]] double tail_indicator(double t) const;
    /// sup_t ||P_N f(., t)||, sampled at 512 uniform points and the source knots.
    [[nodiscard]] double source_sup_norm() const;

    /// y(., t) as a closed-form GraphFunction on the given grids.
    [[nodiscard]] GraphFunction field(double t, const std::vector<int>& intervals) const;

private:
    ProblemSpec problem_;
    std::shared_ptr<const SpectralBasis> basis_;
    ConvolutionOptions options_;
    Eigen::VectorXd mu_;
    Eigen::VectorXd a_;
    std::vector<ModeSource> f_;
};

/// Space-time samples of a solution. mode_history is empty for the FD oracle.
struct SolutionField {
    StarGraph graph;
    std::vector<double> times;
    std::vector<GraphFunction> values;
    Eigen::MatrixXd mode_history; // times x modes
    Eigen::VectorXd mu;
    Eigen::VectorXd tail;         // tail indicator per time
    std::size_t truncation = 0;
    std::vector<std::string> warnings;
};

struct SolveOptions {
    ConvolutionOptions convolution;
    /// Warn when the tail indicator exceeds this value.
    double tail_tolerance = 1e-6;
};

/// Truncated eigenfunction expansion sampled at `times` on `intervals`.
SolutionField solve(const ProblemSpec& problem, std::size_t n_modes, const std::vector<double>& times,
                    const std::vector<int>& intervals, const SolveOptions& options = {});
SolutionField solve(const SpectralSolution& solution, const std::vector<double>& times,
                    const std::vector<int>& intervals, const SolveOptions& options = {});

/// sum_n (f_n / mu_n) Psi_n for a time-constant source.
GraphFunction steady_tail_limit(const ProblemSpec& problem, const SpectralBasis& basis, const std::vector<int>& intervals);

/// Uniform grid 0, T/M, ..., T.
std::vector<double> uniform_times(double horizon, int steps);

/// CSV `t,edge,x,y`.
void write_solution_csv(std::ostream& out, const SolutionField& field);
/// CSV `t,n,T_n` (n 1-based).
void write_mode_history_csv(std::ostream& out, const SolutionField& field);
/// Times and slices of a `t,edge,x,y` CSV.
SolutionField read_solution_csv(std::istream& in, const StarGraph& graph);

/// Number of worker threads: GRAPHFRAC_THREADS when set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once, so results written to slot i are order independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace graphfrac

#endif // GRAPHFRAC_FRACTIONAL_SOLVER_HPP
