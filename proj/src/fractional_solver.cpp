#include "graphfrac/fractional_solver.hpp"

#include "graphfrac/errors.hpp"
#include "graphfrac/special_functions.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace graphfrac {

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double interpolate_linear(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double t)
{
    const Eigen::Index n = times.size();
    if (n == 0) {
        return 0.0;
    }
    if (t <= times(0)) {
        return values(0);
    }
    if (t >= times(n - 1)) {
        return values(n - 1);
    }
    const auto* begin = times.data();
    const auto* it = std::upper_bound(begin, begin + n, t);
    const Eigen::Index j = (it - begin) - 1;
    const double w = (t - times(j)) / (times(j + 1) - times(j));
    return (1.0 - w) * values(j) + w * values(j + 1);
}

bool has_closed_form(const TimeProfile& g)
{
    return std::holds_alternative<ConstantProfile>(g) || std::holds_alternative<PolynomialProfile>(g) ||
           std::holds_alternative<PowerProfile>(g);
}

/// int_0^t (t-s)^{alpha-1} E_{alpha,alpha}(-mu (t-s)^alpha) s^p ds = Gamma(p+1) t^{alpha+p} E_{alpha,alpha+p+1}(-mu t^alpha).
double power_convolution(double p, double mu, double alpha, double t)
{
    if (p == 0.0) {
        return ml_kernel_integral(alpha, mu, t);
    }
    const double ta = std::pow(t, alpha);
    return gamma(p + 1.0) * std::pow(t, alpha + p) * mittag_leffler({alpha, alpha + p + 1.0}, -mu * ta);
}

double closed_form_convolution(const TimeProfile& g, double mu, double alpha, double t)
{
    if (const auto* c = std::get_if<ConstantProfile>(&g)) {
        return c->value * ml_kernel_integral(alpha, mu, t);
    }
    if (const auto* p = std::get_if<PowerProfile>(&g)) {
        return p->coefficient * power_convolution(p->exponent, mu, alpha, t);
    }
    const auto& poly = std::get<PolynomialProfile>(g);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < poly.coefficients.size(); ++j) {
        if (poly.coefficients(j) != 0.0) {
            sum += poly.coefficients(j) * power_convolution(static_cast<double>(j), mu, alpha, t);
        }
    }
    return sum;
}

void check_profile(const TimeProfile& g)
{
    if (const auto* p = std::get_if<PowerProfile>(&g)) {
        if (!(p->exponent > -1.0)) {
            throw InvalidArgument("PowerProfile: exponent must exceed -1");
        }
    }
    if (const auto* s = std::get_if<SampledProfile>(&g)) {
        if (s->times.size() == 0 || s->times.size() != s->values.size()) {
            throw InvalidArgument("SampledProfile: times and values must be non-empty and of equal length");
        }
        for (Eigen::Index j = 1; j < s->times.size(); ++j) {
            if (!(s->times(j) > s->times(j - 1))) {
                throw InvalidArgument("SampledProfile: times must increase strictly");
            }
        }
    }
}

} // namespace

double evaluate(const TimeProfile& g, double t)
{
    return std::visit(
        [t](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ConstantProfile>) {
                return p.value;
            } else if constexpr (std::is_same_v<P, PolynomialProfile>) {
                double acc = 0.0;
                for (Eigen::Index j = p.coefficients.size() - 1; j >= 0; --j) {
                    acc = acc * t + p.coefficients(j);
                }
                return acc;
            } else if constexpr (std::is_same_v<P, PowerProfile>) {
                return p.exponent == 0.0 ? p.coefficient : p.coefficient * std::pow(t, p.exponent);
            } else if constexpr (std::is_same_v<P, SineProfile>) {
                return p.amplitude * std::sin(p.frequency * t + p.phase);
            } else if constexpr (std::is_same_v<P, ExponentialProfile>) {
                return p.amplitude * std::exp(p.rate * t);
            } else {
                return interpolate_linear(p.times, p.values, t);
            }
        },
        g);
}

Source Source::time_constant(GraphFunction shape) { return separable(ConstantProfile{1.0}, std::move(shape)); }

Source Source::separable(TimeProfile profile, GraphFunction shape)
{
    check_profile(profile);
    Source s;
    s.terms.push_back({std::move(profile), std::move(shape)});
    return s;
}

Source Source::from_samples(SampledSource samples)
{
    if (samples.times.empty() || samples.times.size() != samples.slices.size()) {
        throw InvalidArgument("SampledSource: one slice per time required");
    }
    for (std::size_t j = 1; j < samples.times.size(); ++j) {
        if (!(samples.times[j] > samples.times[j - 1])) {
            throw InvalidArgument("SampledSource: times must increase strictly");
        }
    }
    Source s;
    s.sampled = std::make_shared<const SampledSource>(std::move(samples));
    return s;
}

bool Source::is_time_constant() const noexcept
{
    if (sampled) {
        return false;
    }
    return std::all_of(terms.begin(), terms.end(),
                       [](const SeparableTerm& t) { return std::holds_alternative<ConstantProfile>(t.profile); });
}

GraphFunction Source::at(double t, const StarGraph& graph, const std::vector<int>& intervals) const
{
    std::optional<GraphFunction> acc;
    auto add = [&](GraphFunction f) {
        if (acc) {
            *acc += f;
        } else {
            acc = std::move(f);
        }
    };
    for (const SeparableTerm& term : terms) {
        add(evaluate(term.profile, t) * term.shape.resampled(intervals));
    }
    if (sampled) {
        const auto& ts = sampled->times;
        if (t <= ts.front() || ts.size() == 1) {
            add(sampled->slices.front().resampled(intervals));
        } else if (t >= ts.back()) {
            add(sampled->slices.back().resampled(intervals));
        } else {
            const auto j = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
            const double w = (t - ts[j]) / (ts[j + 1] - ts[j]);
            add((1.0 - w) * sampled->slices[j].resampled(intervals) + w * sampled->slices[j + 1].resampled(intervals));
        }
    }
    if (!acc) {
        return GraphFunction::zero(graph, intervals);
    }
    return *acc;
}

void ProblemSpec::validate(double tol) const
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0,1)");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("T must be positive and finite");
    }
    if (!(y0.graph() == graph)) {
        throw GraphMismatch("initial data lives on a different graph");
    }
    double scale = 1.0;
    for (std::size_t e = 0; e < y0.edge_count(); ++e) {
        scale = std::max(scale, y0.values(e).cwiseAbs().maxCoeff());
    }
    if (!y0.is_admissible(tol * scale)) {
        throw InvalidArgument("initial data violates the Dirichlet condition at the outer vertices");
    }
    for (const SeparableTerm& term : source.terms) {
        if (!(term.shape.graph() == graph)) {
            throw GraphMismatch("source term lives on a different graph");
        }
        check_profile(term.profile);
    }
    if (source.sampled) {
        for (const GraphFunction& slice : source.sampled->slices) {
            if (!(slice.graph() == graph)) {
                throw GraphMismatch("source slice lives on a different graph");
            }
        }
    }
}

double ModeSource::operator()(double t) const
{
    double sum = 0.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        if (weights[k] != 0.0) {
            sum += weights[k] * evaluate(profiles[k], t);
        }
    }
    if (sample_times.size() > 0) {
        sum += interpolate_linear(sample_times, sample_values, t);
    }
    return sum;
}

bool ModeSource::is_zero() const
{
    const bool weights_zero = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
    const bool samples_zero = sample_values.size() == 0 || sample_values.isZero(0.0);
    return weights_zero && samples_zero;
}

double ModeSource::sup_abs(double horizon) const
{
    if (is_zero()) {
        return 0.0;
    }
    double sup = 0.0;
    constexpr int kPoints = 512;
    for (int j = 0; j <= kPoints; ++j) {
        sup = std::max(sup, std::abs((*this)(horizon * j / kPoints)));
    }
    for (Eigen::Index j = 0; j < sample_times.size(); ++j) {
        if (sample_times(j) >= 0.0 && sample_times(j) <= horizon) {
            sup = std::max(sup, std::abs((*this)(sample_times(j))));
        }
    }
    return sup;
}

double product_integration(const std::function<double(double)>& f, double mu, double alpha, double t, int segments)
{
    if (segments < 1) {
        throw InvalidArgument("product_integration: need at least one segment");
    }
    if (t <= 0.0) {
        return 0.0;
    }
    const double h = t / segments;
    double sum = 0.0;
    double upper = ml_kernel_integral(alpha, mu, t); // I(t - s_0)
    for (int j = 0; j < segments; ++j) {
        const double lower = j + 1 == segments ? 0.0 : ml_kernel_integral(alpha, mu, t - h * (j + 1));
        sum += (upper - lower) * f(h * (j + 0.5));
        upper = lower;
    }
    return sum;
}

double source_convolution(const ModeSource& f, double mu, double alpha, double t, const ConvolutionOptions& options)
{
    if (t <= 0.0 || f.is_zero()) {
        return 0.0;
    }
    double closed = 0.0;
    bool needs_quadrature = f.sample_times.size() > 0 && !f.sample_values.isZero(0.0);
    for (std::size_t k = 0; k < f.profiles.size(); ++k) {
        if (f.weights[k] == 0.0) {
            continue;
        }
        if (has_closed_form(f.profiles[k])) {
            closed += f.weights[k] * closed_form_convolution(f.profiles[k], mu, alpha, t);
        } else {
            needs_quadrature = true;
        }
    }
    if (!needs_quadrature) {
        return closed;
    }
    auto remainder = [&f](double s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < f.profiles.size(); ++k) {
            if (f.weights[k] != 0.0 && !has_closed_form(f.profiles[k])) {
                sum += f.weights[k] * evaluate(f.profiles[k], s);
            }
        }
        if (f.sample_times.size() > 0) {
            sum += interpolate_linear(f.sample_times, f.sample_values, s);
        }
        return sum;
    };

    // Kernel antiderivative I(t - s_j) on the current partition; halving the
    // step keeps every old node, so only the new midpoints are evaluated.
    int m = std::max(1, options.initial_segments);
    std::vector<double> kernel(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) {
        kernel[static_cast<std::size_t>(j)] = j == m ? 0.0 : ml_kernel_integral(alpha, mu, t - t * j / m);
    }
    auto rule = [&](int segments) {
        const double h = t / segments;
        double sum = 0.0;
        for (int j = 0; j < segments; ++j) {
            sum += (kernel[static_cast<std::size_t>(j)] - kernel[static_cast<std::size_t>(j) + 1]) * remainder(h * (j + 0.5));
        }
        return sum;
    };
    double value = rule(m);
    while (2 * m <= options.max_segments) {
        std::vector<double> refined(static_cast<std::size_t>(2 * m) + 1);
        for (int j = 0; j <= m; ++j) {
            refined[static_cast<std::size_t>(2 * j)] = kernel[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < m; ++j) {
            refined[static_cast<std::size_t>(2 * j + 1)] = ml_kernel_integral(alpha, mu, t - t * (2 * j + 1) / (2 * m));
        }
        kernel = std::move(refined);
        m *= 2;
        const double next = rule(m);
        const bool converged = std::abs(next - value) < options.tolerance * std::max(1.0, std::abs(next));
        value = next;
        if (converged) {
            break;
        }
    }
    return closed + value;
}

double mode_coefficient(double a_n, const ModeSource& f_n, double mu_n, double alpha, double t,
                        const ConvolutionOptions& options)
{
    if (!(mu_n > 0.0)) {
        throw InvalidArgument("mode_coefficient: mu_n must be positive");
    }
    if (!(t >= 0.0)) {
        throw InvalidArgument("mode_coefficient: t must be non-negative");
    }
    if (t == 0.0) {
        return a_n;
    }
    const double homogeneous = a_n == 0.0 ? 0.0 : a_n * ml_decay_kernel(alpha, mu_n, t);
    return homogeneous + source_convolution(f_n, mu_n, alpha, t, options);
}

SpectralSolution::SpectralSolution(ProblemSpec problem, std::shared_ptr<const SpectralBasis> basis,
                                   ConvolutionOptions options)
    : problem_(std::move(problem)), basis_(std::move(basis)), options_(options)
{
    if (!basis_) {
        throw InvalidArgument("SpectralSolution: basis required");
    }
    problem_.validate();
    if (!(basis_->graph() == problem_.graph)) {
        throw GraphMismatch("SpectralSolution: basis and problem live on different graphs");
    }
    mu_ = basis_->eigenvalues();
    a_ = fourier_coefficients(problem_.y0, *basis_).values;

    const auto n = static_cast<Eigen::Index>(basis_->size());
    f_.assign(basis_->size(), ModeSource{});
    for (const SeparableTerm& term : problem_.source.terms) {
        const Eigen::VectorXd w = fourier_coefficients(term.shape, *basis_).values;
        for (Eigen::Index j = 0; j < n; ++j) {
            f_[static_cast<std::size_t>(j)].profiles.push_back(term.profile);
            f_[static_cast<std::size_t>(j)].weights.push_back(w(j));
        }
    }
    if (problem_.source.sampled) {
        const auto& s = *problem_.source.sampled;
        const auto m = static_cast<Eigen::Index>(s.times.size());
        Eigen::MatrixXd values(n, m);
        for (Eigen::Index k = 0; k < m; ++k) {
            values.col(k) = fourier_coefficients(s.slices[static_cast<std::size_t>(k)], *basis_).values;
        }
        const Eigen::VectorXd times = Eigen::Map<const Eigen::VectorXd>(s.times.data(), m);
        for (Eigen::Index j = 0; j < n; ++j) {
            f_[static_cast<std::size_t>(j)].sample_times = times;
            f_[static_cast<std::size_t>(j)].sample_values = values.row(j).transpose();
        }
    }
}

Eigen::VectorXd SpectralSolution::coefficients(double t) const
{
    if (!(t >= 0.0)) {
        throw InvalidArgument("SpectralSolution: time must be non-negative");
    }
    Eigen::VectorXd out(mu_.size());
    const double alpha = problem_.alpha;
    parallel_for(static_cast<std::size_t>(mu_.size()), [&](std::size_t j) {
        const auto i = static_cast<Eigen::Index>(j);
        out(i) = mode_coefficient(a_(i), f_[j], mu_(i), alpha, t, options_);
    });
    return out;
}

Eigen::VectorXd SpectralSolution::homogeneous_coefficients(double t) const
{
    Eigen::VectorXd out(mu_.size());
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
        out(i) = a_(i) == 0.0 ? 0.0 : a_(i) * ml_decay_kernel(problem_.alpha, mu_(i), t);
    }
    return out;
}

Eigen::VectorXd SpectralSolution::source_coefficients(double t) const
{
    Eigen::VectorXd out(mu_.size());
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
        out(i) = f_[static_cast<std::size_t>(i)](t);
    }
    return out;
}

Eigen::VectorXd SpectralSolution::caputo_coefficients(double t, const Eigen::VectorXd& coefficients) const
{
    return source_coefficients(t) - mu_.cwiseProduct(coefficients);
}

double SpectralSolution::tail_indicator(double t) const
{
    const Eigen::Index last = mu_.size() - 1;
    const double alpha = problem_.alpha;
    const double mu_n = mu_(last);
    const double decay = ml_decay_kernel(alpha, mu_n, t);
    const double f_sup = f_[static_cast<std::size_t>(last)].sup_abs(problem_.horizon);
    return std::abs(a_(last)) * decay + f_sup * ml_kernel_integral(alpha, mu_n, t);
}

double SpectralSolution::source_sup_norm() const
{
    if (problem_.source.is_zero()) {
        return 0.0;
    }
    std::vector<double> ts;
    constexpr int kPoints = 512;
    for (int j = 0; j <= kPoints; ++j) {
        ts.push_back(problem_.horizon * j / kPoints);
    }
    if (problem_.source.sampled) {
        for (double t : problem_.source.sampled->times) {
            if (t >= 0.0 && t <= problem_.horizon) {
                ts.push_back(t);
            }
        }
    }
    for (const SeparableTerm& term : problem_.source.terms) {
        if (const auto* s = std::get_if<SampledProfile>(&term.profile)) {
            for (Eigen::Index j = 0; j < s->times.size(); ++j) {
                if (s->times(j) >= 0.0 && s->times(j) <= problem_.horizon) {
                    ts.push_back(s->times(j));
                }
            }
        }
    }
    double sup = 0.0;
    for (double t : ts) {
        sup = std::max(sup, source_coefficients(t).norm());
    }
    return sup;
}

GraphFunction SpectralSolution::field(double t, const std::vector<int>& intervals) const
{
    return basis_->synthesize(coefficients(t), intervals);
}

SolutionField solve(const SpectralSolution& solution, const std::vector<double>& times,
                    const std::vector<int>& intervals, const SolveOptions& options)
{
    const double horizon = solution.problem().horizon;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!(times[j] >= 0.0 && times[j] <= horizon * (1.0 + 1e-14))) {
            throw InvalidArgument("solve: query times must lie in [0, T]");
        }
        if (j > 0 && !(times[j] >= times[j - 1])) {
            throw InvalidArgument("solve: query times must be sorted");
        }
    }
    SolutionField field{solution.problem().graph, times, {}, {}, solution.mu(), {}, solution.modes(), {}};
    const auto n_times = static_cast<Eigen::Index>(times.size());
    field.mode_history.resize(n_times, static_cast<Eigen::Index>(solution.modes()));
    field.tail.resize(n_times);
    field.values.reserve(times.size());
    std::size_t over = 0;
    double first_over = 0.0;
    for (Eigen::Index j = 0; j < n_times; ++j) {
        const double t = times[static_cast<std::size_t>(j)];
        const Eigen::VectorXd c = solution.coefficients(t);
        field.mode_history.row(j) = c.transpose();
        field.values.push_back(solution.basis().synthesize(c, intervals));
        field.tail(j) = solution.tail_indicator(t);
        if (field.tail(j) > options.tail_tolerance) {
            if (over++ == 0) {
                first_over = t;
            }
        }
    }
    if (over > 0) {
        std::ostringstream msg;
        msg << "tail indicator exceeds " << options.tail_tolerance << " at " << over << " of " << times.size()
            << " times (first at t=" << first_over << "); increase the number of modes";
        field.warnings.push_back(msg.str());
    }
    return field;
}

SolutionField solve(const ProblemSpec& problem, std::size_t n_modes, const std::vector<double>& times,
                    const std::vector<int>& intervals, const SolveOptions& options)
{
    auto basis = std::make_shared<const SpectralBasis>(SpectralBasis::first(problem.graph, n_modes));
    const SpectralSolution solution(problem, std::move(basis), options.convolution);
    return solve(solution, times, intervals, options);
}

GraphFunction steady_tail_limit(const ProblemSpec& problem, const SpectralBasis& basis, const std::vector<int>& intervals)
{
    if (!problem.source.is_time_constant()) {
        throw InvalidArgument("steady_tail_limit: source must be constant in time");
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (const SeparableTerm& term : problem.source.terms) {
        c += std::get<ConstantProfile>(term.profile).value * fourier_coefficients(term.shape, basis).values;
    }
    c = c.cwiseQuotient(basis.eigenvalues());
    return basis.synthesize(c, intervals);
}

std::vector<double> uniform_times(double horizon, int steps)
{
    if (steps < 1 || !(horizon > 0.0)) {
        throw InvalidArgument("uniform_times: need steps >= 1 and horizon > 0");
    }
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j) {
        t[static_cast<std::size_t>(j)] = j == steps ? horizon : horizon * j / steps;
    }
    return t;
}

void write_solution_csv(std::ostream& out, const SolutionField& field)
{
    out << "t,edge,x,y\n";
    for (std::size_t j = 0; j < field.times.size(); ++j) {
        const std::string t = format_double(field.times[j]);
        const GraphFunction& y = field.values[j];
        for (std::size_t e = 0; e < y.edge_count(); ++e) {
            const int n = y.intervals(e);
            for (int i = 0; i <= n; ++i) {
                const double x = i == n ? y.graph().length(e) : y.node(e, i);
                out << t << ',' << e << ',' << format_double(x) << ',' << format_double(y.values(e)(i)) << '\n';
            }
        }
    }
}

void write_mode_history_csv(std::ostream& out, const SolutionField& field)
{
    out << "t,n,T_n\n";
    for (Eigen::Index j = 0; j < field.mode_history.rows(); ++j) {
        const std::string t = format_double(field.times[static_cast<std::size_t>(j)]);
        for (Eigen::Index n = 0; n < field.mode_history.cols(); ++n) {
            out << t << ',' << (n + 1) << ',' << format_double(field.mode_history(j, n)) << '\n';
        }
    }
}

SolutionField read_solution_csv(std::istream& in, const StarGraph& graph)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidArgument("read_solution_csv: empty input");
    }
    std::vector<double> times;
    std::map<double, std::ostringstream> per_time;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument("read_solution_csv: malformed row: " + line);
        }
        const double t = std::stod(line.substr(0, comma));
        auto it = per_time.find(t);
        if (it == per_time.end()) {
            times.push_back(t);
            it = per_time.emplace(t, std::ostringstream{}).first;
            it->second << "edge_index,x,value\n";
        }
        it->second << line.substr(comma + 1) << '\n';
    }
    SolutionField field{graph, times, {}, {}, {}, {}, 0, {}};
    for (double t : times) {
        std::istringstream slice(per_time[t].str());
        field.values.push_back(read_graph_function_csv(slice, graph));
    }
    return field;
}

unsigned worker_count()
{
    if (const char* env = std::getenv("GRAPHFRAC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = n;
    auto run = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (...) {
                // Report the failure of the smallest index, independent of scheduling.
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace graphfrac
