#ifndef GRAPHFRAC_METRIC_GRAPH_HPP
#define GRAPHFRAC_METRIC_GRAPH_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

namespace graphfrac {

/// Star graph: k >= 2 edges of lengths l_i glued at the junction v_0.
/// Every edge is parametrized from the junction, x in [0, l_i].
class StarGraph {
public:
    explicit StarGraph(Eigen::VectorXd lengths);
    StarGraph(std::initializer_list<double> lengths);

    [[nodiscard]] std::size_t edge_count() const noexcept { return static_cast<std::size_t>(lengths_.size()); }
    [[nodiscard]] double length(std::size_t edge) const { return lengths_(static_cast<Eigen::Index>(edge)); }
    [[nodiscard]] const Eigen::VectorXd& lengths() const noexcept { return lengths_; }
    [[nodiscard]] double total_length() const noexcept { return lengths_.sum(); }

    friend bool operator==(const StarGraph& a, const StarGraph& b)
    {
        return a.lengths_.size() == b.lengths_.size() && a.lengths_ == b.lengths_;
    }

private:
    Eigen::VectorXd lengths_;
};

/// y_i(x) = sum_t amplitudes(i, t) sin(frequencies(t) (l_i - x)).
/// Eigenfunctions and finite combinations of them have this form.
struct SineSeries {
    Eigen::VectorXd frequencies;
    Eigen::MatrixXd amplitudes; // edges x terms
};

/// y_i(x) = sum_j coefficients(i, j) (l_i - x)^j: polynomials in the distance to
/// the outer vertex. Vanishes at x = l_i whenever column 0 is zero.
struct DistancePolynomial {
    Eigen::MatrixXd coefficients; // edges x (degree + 1)
};

using AnalyticForm = std::variant<SineSeries, DistancePolynomial>;

/// Evaluate an analytic form on edge `edge` of `graph` at coordinate x.
double evaluate(const AnalyticForm& form, const StarGraph& graph, std::size_t edge, double x);

/// A real function on the star graph, sampled on a uniform grid per edge
/// (n_i intervals, node 0 at the junction). Optionally carries the closed
/// form it was sampled from, which enables exact spectral projections.
class GraphFunction {
public:
    GraphFunction(StarGraph graph, std::vector<Eigen::VectorXd> samples);

    /// Samples `form` on grids with the given interval counts and keeps the form.
    static GraphFunction from_analytic(StarGraph graph, AnalyticForm form, const std::vector<int>& intervals);
    static GraphFunction zero(StarGraph graph, const std::vector<int>& intervals);
    /// Uniform interval count on every edge.
    static std::vector<int> uniform_intervals(const StarGraph& graph, int intervals);

    [[nodiscard]] const StarGraph& graph() const noexcept { return graph_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return graph_.edge_count(); }
    [[nodiscard]] const Eigen::VectorXd& values(std::size_t edge) const { return samples_[edge]; }
    [[nodiscard]] int intervals(std::size_t edge) const { return static_cast<int>(samples_[edge].size()) - 1; }
    [[nodiscard]] std::vector<int> intervals() const;
    [[nodiscard]] double step(std::size_t edge) const { return graph_.length(edge) / intervals(edge); }
    [[nodiscard]] double node(std::size_t edge, int j) const { return step(edge) * j; }
    [[nodiscard]] const std::optional<AnalyticForm>& analytic() const noexcept { return analytic_; }

    /// Value at an arbitrary point: the closed form when known, otherwise
    /// four-point interpolation of the samples.
    [[nodiscard]] double evaluate(std::size_t edge, double x) const;

    /// Same function on different grids (cubic interpolation unless analytic).
    [[nodiscard]] GraphFunction resampled(const std::vector<int>& intervals) const;

    /// Dirichlet condition y_i(l_i) = 0 on every edge, within tol.
    [[nodiscard]] bool is_admissible(double tol) const;

    GraphFunction& operator+=(const GraphFunction& other);
    GraphFunction& operator*=(double scale);
    friend GraphFunction operator+(GraphFunction a, const GraphFunction& b) { return a += b; }
    friend GraphFunction operator*(double s, GraphFunction a) { return a *= s; }

private:
    StarGraph graph_;
    std::vector<Eigen::VectorXd> samples_;
    std::optional<AnalyticForm> analytic_;
};

/// Outcome of the junction and boundary checks.
struct VertexReport {
    double continuity_gap = 0.0; // max_{i,j} |y_i(0) - y_j(0)|
    double kirchhoff_sum = 0.0;  // sum_i y_i'(0), one-sided second-order stencils
    double dirichlet_gap = 0.0;  // max_i |y_i(l_i)|
    bool continuity_ok = true;
    bool kirchhoff_ok = true;
    bool dirichlet_ok = true;

    [[nodiscard]] bool passes() const noexcept { return continuity_ok && kirchhoff_ok && dirichlet_ok; }
};

/// <y, w>_{L2(G)} = sum_i int_0^{l_i} y_i w_i dx. Exact when both functions carry
/// closed forms, inner_product_sampled otherwise.
double inner_product(const GraphFunction& y, const GraphFunction& w);

/// Composite Simpson per edge on the samples alone. Edges with different grids
/// are resampled to the finer grid.
double inner_product_sampled(const GraphFunction& y, const GraphFunction& w);

double l2_norm(const GraphFunction& y);

/// Continuity and Kirchhoff at the junction, Dirichlet at the outer vertices.
/// Needs at least two intervals per edge.
VertexReport check_vertex_conditions(const GraphFunction& y, double tol);

/// CSV with header `edge_index,x,value` (edge_index 0-based), 17 significant digits.
void write_csv(std::ostream& out, const GraphFunction& y);
/// Inverse of write_csv; every edge must carry a uniform grid from 0 to l_i.
GraphFunction read_graph_function_csv(std::istream& in, const StarGraph& graph);

} // namespace graphfrac

#endif // GRAPHFRAC_METRIC_GRAPH_HPP
