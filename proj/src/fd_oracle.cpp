#include "graphfrac/fd_oracle.hpp"

#include "graphfrac/errors.hpp"
#include "graphfrac/special_functions.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace graphfrac {

Eigen::VectorXd l1_weights(double alpha, int steps)
{
    if (steps < 1) {
        throw InvalidArgument("l1_weights: need at least one step");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("l1_weights: alpha must lie in (0,1)");
    }
    const double e = 1.0 - alpha;
    Eigen::VectorXd b(steps);
    double prev = 0.0;
    for (int j = 0; j < steps; ++j) {
        const double next = std::pow(static_cast<double>(j + 1), e);
        b(j) = next - prev;
        prev = next;
    }
    return b;
}

Eigen::MatrixXd caputo_l1_rows(const Eigen::MatrixXd& samples, double alpha, double dt)
{
    if (samples.rows() < 2) {
        throw InvalidArgument("caputo_l1: need at least two samples");
    }
    if (!(dt > 0.0)) {
        throw InvalidArgument("caputo_l1: dt must be positive");
    }
    const auto steps = static_cast<int>(samples.rows()) - 1;
    const Eigen::VectorXd b = l1_weights(alpha, steps);
    const double scale = std::pow(dt, -alpha) * rgamma(2.0 - alpha);
    const Eigen::MatrixXd diff = samples.bottomRows(steps) - samples.topRows(steps);
    Eigen::MatrixXd out(steps, samples.cols());
    for (int n = 1; n <= steps; ++n) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(samples.cols());
        for (int j = 0; j < n; ++j) {
            acc += b(j) * diff.row(n - 1 - j);
        }
        out.row(n - 1) = scale * acc;
    }
    return out;
}

Eigen::VectorXd caputo_l1(const Eigen::VectorXd& samples, double alpha, double dt)
{
    return caputo_l1_rows(samples, alpha, dt).col(0);
}

FDGrid FDGrid::uniform(const StarGraph& graph, int intervals_per_edge, int steps)
{
    FDGrid grid{GraphFunction::uniform_intervals(graph, intervals_per_edge), steps};
    grid.validate(graph);
    return grid;
}

void FDGrid::validate(const StarGraph& graph) const
{
    if (intervals.size() != graph.edge_count()) {
        throw GraphMismatch("FDGrid: one interval count per edge required");
    }
    for (int m : intervals) {
        if (m < 4) {
            throw InvalidArgument("FDGrid: at least 4 intervals per edge required");
        }
    }
    if (steps < 1) {
        throw InvalidArgument("FDGrid: at least one time step required");
    }
}

namespace {

/// Unknown 0 is the junction; edge e owns interior nodes 1..m_e-1 starting at offset[e].
struct Layout {
    std::vector<Eigen::Index> offset;
    Eigen::Index size = 1;

    explicit Layout(const std::vector<int>& intervals)
    {
        for (int m : intervals) {
            offset.push_back(size);
            size += m - 1;
        }
    }
};

Eigen::VectorXd gather(const GraphFunction& f, const Layout& layout)
{
    Eigen::VectorXd u(layout.size);
    double junction = 0.0;
    for (std::size_t e = 0; e < f.edge_count(); ++e) {
        const Eigen::VectorXd& v = f.values(e);
        junction += v(0);
        u.segment(layout.offset[e], v.size() - 2) = v.segment(1, v.size() - 2);
    }
    u(0) = junction / static_cast<double>(f.edge_count());
    return u;
}

GraphFunction scatter(const Eigen::VectorXd& u, const StarGraph& graph, const std::vector<int>& intervals,
                      const Layout& layout)
{
    std::vector<Eigen::VectorXd> samples;
    for (std::size_t e = 0; e < intervals.size(); ++e) {
        const int m = intervals[e];
        Eigen::VectorXd v(m + 1);
        v(0) = u(0);
        v.segment(1, m - 1) = u.segment(layout.offset[e], m - 1);
        v(m) = 0.0;
        samples.push_back(std::move(v));
    }
    return GraphFunction(graph, std::move(samples));
}

} // namespace

SolutionField solve_fd(const ProblemSpec& problem, const FDGrid& grid)
{
    problem.validate();
    grid.validate(problem.graph);
    const StarGraph& graph = problem.graph;
    const std::vector<int>& intervals = grid.intervals;
    const Layout layout(intervals);
    const int steps = grid.steps;
    const double dt = problem.horizon / steps;
    const double alpha = problem.alpha;
    const Eigen::VectorXd b = l1_weights(alpha, steps);
    const double s = std::pow(dt, -alpha) * rgamma(2.0 - alpha);

    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t e = 0; e < intervals.size(); ++e) {
        const int m = intervals[e];
        const double h = graph.length(e) / m;
        const double inv_h2 = 1.0 / (h * h);
        const Eigen::Index base = layout.offset[e];
        for (int j = 1; j < m; ++j) {
            const Eigen::Index row = base + j - 1;
            entries.emplace_back(row, row, s * b(0) + 2.0 * inv_h2);
            entries.emplace_back(row, j == 1 ? 0 : row - 1, -inv_h2);
            if (j + 1 < m) {
                entries.emplace_back(row, row + 1, -inv_h2);
            }
        }
        // Kirchhoff: (-3 y_0 + 4 y_1 - y_2) / (2h) summed over edges.
        const double w = 1.0 / (2.0 * h);
        entries.emplace_back(0, 0, -3.0 * w);
        entries.emplace_back(0, base, 4.0 * w);
        entries.emplace_back(0, base + 1, -w);
    }
    Eigen::SparseMatrix<double> A(layout.size, layout.size);
    A.setFromTriplets(entries.begin(), entries.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        throw NumericalError("solve_fd: factorization failed: " + lu.lastErrorMessage());
    }

    std::vector<Eigen::VectorXd> term_shapes;
    for (const SeparableTerm& term : problem.source.terms) {
        term_shapes.push_back(gather(term.shape.resampled(intervals), layout));
    }
    Source sampled_only;
    sampled_only.sampled = problem.source.sampled;
    auto source_at = [&](double t) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(layout.size);
        for (std::size_t k = 0; k < term_shapes.size(); ++k) {
            f += evaluate(problem.source.terms[k].profile, t) * term_shapes[k];
        }
        if (sampled_only.sampled) {
            f += gather(sampled_only.at(t, graph, intervals), layout);
        }
        f(0) = 0.0;
        return f;
    };

    const std::vector<double> times = uniform_times(problem.horizon, steps);
    std::vector<Eigen::VectorXd> history;
    history.reserve(static_cast<std::size_t>(steps) + 1);
    history.push_back(gather(problem.y0.resampled(intervals), layout));
    for (int n = 1; n <= steps; ++n) {
        Eigen::VectorXd rhs = source_at(times[static_cast<std::size_t>(n)]);
        Eigen::VectorXd memory = s * b(0) * history[static_cast<std::size_t>(n - 1)];
        for (int j = 1; j < n; ++j) {
            memory -= s * b(j) * (history[static_cast<std::size_t>(n - j)] - history[static_cast<std::size_t>(n - j - 1)]);
        }
        memory(0) = 0.0;
        rhs += memory;
        Eigen::VectorXd next = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !next.allFinite()) {
            throw NumericalError("solve_fd: linear solve failed at level " + std::to_string(n));
        }
        history.push_back(std::move(next));
    }

    SolutionField field{graph, times, {}, {}, {}, {}, 0, {}};
    field.values.reserve(history.size());
    for (const Eigen::VectorXd& u : history) {
        field.values.push_back(scatter(u, graph, intervals, layout));
    }
    return field;
}

} // namespace graphfrac
