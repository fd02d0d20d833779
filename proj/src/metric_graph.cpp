#include "graphfrac/metric_graph.hpp"

#include "edge_integrals.hpp"

#include "graphfrac/errors.hpp"
#include "graphfrac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace graphfrac {

namespace {

void validate_lengths(const Eigen::VectorXd& lengths)
{
    if (lengths.size() < 2) {
        throw InvalidArgument("StarGraph: need at least two edges");
    }
    for (Eigen::Index i = 0; i < lengths.size(); ++i) {
        if (!(lengths(i) > 0.0) || !std::isfinite(lengths(i))) {
            throw InvalidArgument("StarGraph: edge lengths must be positive and finite");
        }
    }
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

StarGraph::StarGraph(Eigen::VectorXd lengths) : lengths_(std::move(lengths)) { validate_lengths(lengths_); }

StarGraph::StarGraph(std::initializer_list<double> lengths)
    : lengths_(Eigen::Map<const Eigen::VectorXd>(lengths.begin(), static_cast<Eigen::Index>(lengths.size())))
{
    validate_lengths(lengths_);
}

double evaluate(const AnalyticForm& form, const StarGraph& graph, std::size_t edge, double x)
{
    if (edge >= graph.edge_count()) {
        throw InvalidArgument("evaluate: edge index out of range");
    }
    const auto i = static_cast<Eigen::Index>(edge);
    const double d = graph.length(edge) - x;
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, SineSeries>) {
                return (f.amplitudes.row(i).transpose().array() * (f.frequencies.array() * d).sin()).sum();
            } else {
                double acc = 0.0;
                for (Eigen::Index j = f.coefficients.cols() - 1; j >= 0; --j) {
                    acc = acc * d + f.coefficients(i, j);
                }
                return acc;
            }
        },
        form);
}

GraphFunction::GraphFunction(StarGraph graph, std::vector<Eigen::VectorXd> samples)
    : graph_(std::move(graph)), samples_(std::move(samples))
{
    if (samples_.size() != graph_.edge_count()) {
        throw GraphMismatch("GraphFunction: one sample vector per edge required");
    }
    for (const auto& s : samples_) {
        if (s.size() < 2) {
            throw InvalidArgument("GraphFunction: each edge needs at least two samples");
        }
    }
}

GraphFunction GraphFunction::from_analytic(StarGraph graph, AnalyticForm form, const std::vector<int>& intervals)
{
    if (intervals.size() != graph.edge_count()) {
        throw GraphMismatch("GraphFunction::from_analytic: one interval count per edge required");
    }
    const auto k = static_cast<Eigen::Index>(graph.edge_count());
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, SineSeries>) {
                if (f.amplitudes.rows() != k || f.amplitudes.cols() != f.frequencies.size()) {
                    throw GraphMismatch("SineSeries: amplitude matrix must be edges x terms");
                }
            } else {
                if (f.coefficients.rows() != k || f.coefficients.cols() < 1) {
                    throw GraphMismatch("DistancePolynomial: coefficient matrix must be edges x (degree + 1)");
                }
            }
        },
        form);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(graph.edge_count());
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        if (intervals[e] < 1) {
            throw InvalidArgument("GraphFunction::from_analytic: interval counts must be positive");
        }
        const double h = graph.length(e) / intervals[e];
        Eigen::VectorXd v(intervals[e] + 1);
        for (int j = 0; j <= intervals[e]; ++j) {
            v(j) = graphfrac::evaluate(form, graph, e, j == intervals[e] ? graph.length(e) : h * j);
        }
        samples.push_back(std::move(v));
    }
    GraphFunction out(std::move(graph), std::move(samples));
    out.analytic_ = std::move(form);
    return out;
}

GraphFunction GraphFunction::zero(StarGraph graph, const std::vector<int>& intervals)
{
    if (intervals.size() != graph.edge_count()) {
        throw GraphMismatch("GraphFunction::zero: one interval count per edge required");
    }
    DistancePolynomial p{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(graph.edge_count()), 1)};
    return from_analytic(std::move(graph), std::move(p), intervals);
}

std::vector<int> GraphFunction::uniform_intervals(const StarGraph& graph, int intervals)
{
    return std::vector<int>(graph.edge_count(), intervals);
}

std::vector<int> GraphFunction::intervals() const
{
    std::vector<int> out(edge_count());
    for (std::size_t e = 0; e < edge_count(); ++e) {
        out[e] = intervals(e);
    }
    return out;
}

double GraphFunction::evaluate(std::size_t edge, double x) const
{
    if (edge >= edge_count()) {
        throw InvalidArgument("GraphFunction::evaluate: edge index out of range");
    }
    if (x < 0.0 || x > graph_.length(edge)) {
        throw InvalidArgument("GraphFunction::evaluate: coordinate outside the edge");
    }
    if (analytic_) {
        return graphfrac::evaluate(*analytic_, graph_, edge, x);
    }
    return cubic_interpolate(samples_[edge], step(edge), x);
}

GraphFunction GraphFunction::resampled(const std::vector<int>& new_intervals) const
{
    if (new_intervals.size() != edge_count()) {
        throw GraphMismatch("GraphFunction::resampled: one interval count per edge required");
    }
    if (analytic_) {
        return from_analytic(graph_, *analytic_, new_intervals);
    }
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(edge_count());
    for (std::size_t e = 0; e < edge_count(); ++e) {
        if (new_intervals[e] == intervals(e)) {
            samples.push_back(samples_[e]);
        } else {
            samples.push_back(cubic_resample(samples_[e], graph_.length(e), new_intervals[e]));
        }
    }
    return GraphFunction(graph_, std::move(samples));
}

bool GraphFunction::is_admissible(double tol) const
{
    return std::all_of(samples_.begin(), samples_.end(),
                       [tol](const Eigen::VectorXd& s) { return std::abs(s(s.size() - 1)) <= tol; });
}

GraphFunction& GraphFunction::operator+=(const GraphFunction& other)
{
    if (!(graph_ == other.graph_)) {
        throw GraphMismatch("GraphFunction: operands live on different graphs");
    }
    const GraphFunction* rhs = &other;
    GraphFunction tmp = other;
    if (other.intervals() != intervals()) {
        tmp = other.resampled(intervals());
        rhs = &tmp;
    }
    for (std::size_t e = 0; e < edge_count(); ++e) {
        samples_[e] += rhs->samples_[e];
    }
    // Sum of two forms of the same kind stays closed form.
    if (analytic_ && other.analytic_ && analytic_->index() == other.analytic_->index()) {
        if (auto* a = std::get_if<SineSeries>(&*analytic_)) {
            const auto& b = std::get<SineSeries>(*other.analytic_);
            SineSeries s;
            s.frequencies.resize(a->frequencies.size() + b.frequencies.size());
            s.frequencies << a->frequencies, b.frequencies;
            s.amplitudes.resize(a->amplitudes.rows(), a->amplitudes.cols() + b.amplitudes.cols());
            s.amplitudes << a->amplitudes, b.amplitudes;
            *a = std::move(s);
        } else {
            auto& pa = std::get<DistancePolynomial>(*analytic_).coefficients;
            const auto& pb = std::get<DistancePolynomial>(*other.analytic_).coefficients;
            Eigen::MatrixXd c = Eigen::MatrixXd::Zero(pa.rows(), std::max(pa.cols(), pb.cols()));
            c.leftCols(pa.cols()) += pa;
            c.leftCols(pb.cols()) += pb;
            pa = std::move(c);
        }
    } else {
        analytic_.reset();
    }
    return *this;
}

GraphFunction& GraphFunction::operator*=(double scale)
{
    for (auto& s : samples_) {
        s *= scale;
    }
    if (analytic_) {
        std::visit(
            [scale](auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, SineSeries>) {
                    f.amplitudes *= scale;
                } else {
                    f.coefficients *= scale;
                }
            },
            *analytic_);
    }
    return *this;
}

double inner_product(const GraphFunction& y, const GraphFunction& w)
{
    if (!(y.graph() == w.graph())) {
        throw GraphMismatch("inner_product: functions live on different graphs");
    }
    if (y.analytic() && w.analytic()) {
        double sum = 0.0;
        for (std::size_t e = 0; e < y.edge_count(); ++e) {
            sum += detail::analytic_edge_product(*y.analytic(), *w.analytic(), y.graph(), e);
        }
        return sum;
    }
    return inner_product_sampled(y, w);
}

double inner_product_sampled(const GraphFunction& y, const GraphFunction& w)
{
    if (!(y.graph() == w.graph())) {
        throw GraphMismatch("inner_product: functions live on different graphs");
    }
    double sum = 0.0;
    for (std::size_t e = 0; e < y.edge_count(); ++e) {
        const int n = std::max(y.intervals(e), w.intervals(e));
        const double len = y.graph().length(e);
        const Eigen::VectorXd a =
            y.intervals(e) == n ? y.values(e) : Eigen::VectorXd(cubic_resample(y.values(e), len, n));
        const Eigen::VectorXd b =
            w.intervals(e) == n ? w.values(e) : Eigen::VectorXd(cubic_resample(w.values(e), len, n));
        sum += composite_simpson(Eigen::VectorXd(a.cwiseProduct(b)), len / n);
    }
    return sum;
}

double l2_norm(const GraphFunction& y) { return std::sqrt(std::max(0.0, inner_product(y, y))); }

VertexReport check_vertex_conditions(const GraphFunction& y, double tol)
{
    VertexReport r;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t e = 0; e < y.edge_count(); ++e) {
        const Eigen::VectorXd& v = y.values(e);
        if (v.size() < 3) {
            throw InvalidArgument("check_vertex_conditions: need at least two intervals per edge");
        }
        lo = std::min(lo, v(0));
        hi = std::max(hi, v(0));
        r.kirchhoff_sum += (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * y.step(e));
        r.dirichlet_gap = std::max(r.dirichlet_gap, std::abs(v(v.size() - 1)));
    }
    r.continuity_gap = hi - lo;
    r.continuity_ok = r.continuity_gap <= tol;
    r.kirchhoff_ok = std::abs(r.kirchhoff_sum) <= tol;
    r.dirichlet_ok = r.dirichlet_gap <= tol;
    return r;
}

void write_csv(std::ostream& out, const GraphFunction& y)
{
    out << "edge_index,x,value\n";
    for (std::size_t e = 0; e < y.edge_count(); ++e) {
        const int n = y.intervals(e);
        for (int j = 0; j <= n; ++j) {
            const double x = j == n ? y.graph().length(e) : y.node(e, j);
            out << e << ',' << format_double(x) << ',' << format_double(y.values(e)(j)) << '\n';
        }
    }
}

GraphFunction read_graph_function_csv(std::istream& in, const StarGraph& graph)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidArgument("read_graph_function_csv: empty input");
    }
    std::map<std::size_t, std::vector<std::pair<double, double>>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
            throw InvalidArgument("read_graph_function_csv: malformed row: " + line);
        }
        const auto e = static_cast<std::size_t>(std::stoul(a));
        if (e >= graph.edge_count()) {
            throw GraphMismatch("read_graph_function_csv: edge index out of range");
        }
        rows[e].emplace_back(std::stod(b), std::stod(c));
    }
    std::vector<Eigen::VectorXd> samples;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        auto& r = rows[e];
        if (r.size() < 2) {
            throw GraphMismatch("read_graph_function_csv: edge without samples");
        }
        std::sort(r.begin(), r.end());
        const double h = graph.length(e) / static_cast<double>(r.size() - 1);
        Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (std::abs(r[j].first - h * static_cast<double>(j)) > 1e-9 * graph.length(e)) {
                throw GraphMismatch("read_graph_function_csv: samples are not on a uniform grid over the edge");
            }
            v(static_cast<Eigen::Index>(j)) = r[j].second;
        }
        samples.push_back(std::move(v));
    }
    return GraphFunction(graph, std::move(samples));
}

} // namespace graphfrac
