#ifndef GRAPHFRAC_FD_ORACLE_HPP
#define GRAPHFRAC_FD_ORACLE_HPP

#include "graphfrac/fractional_solver.hpp"
#include "graphfrac/metric_graph.hpp"

#include <Eigen/Dense>

#include <vector>

namespace graphfrac {

/// Unscaled L1 weights b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..M-1.
/// Positive and strictly decreasing; the caller applies dt^{-alpha}/Gamma(2-alpha).
Eigen::VectorXd l1_weights(double alpha, int steps);

/// L1 Caputo derivative of samples y(t_0), ..., y(t_M) on a uniform grid.
/// Entry n-1 is the derivative at level n, so the result has M entries.
Eigen::VectorXd caputo_l1(const Eigen::VectorXd& samples, double alpha, double dt);

/// Row-wise version: rows are time levels, columns independent series.
Eigen::MatrixXd caputo_l1_rows(const Eigen::MatrixXd& samples, double alpha, double dt);

/// Uniform space-time grid: intervals[i] = m_i >= 4 on edge i, `steps` = M uniform steps on [0, T].
struct FDGrid {
    std::vector<int> intervals;
    int steps = 0;

    static FDGrid uniform(const StarGraph& graph, int intervals_per_edge, int steps);
    void validate(const StarGraph& graph) const;
};

/// Implicit L1 / central-difference scheme. One shared junction unknown; the
/// junction row is the second-order one-sided Kirchhoff sum; outer ends are 0.
/// Full history is kept: memory is O(M * sum_i m_i).
SolutionField solve_fd(const ProblemSpec& problem, const FDGrid& grid);

} // namespace graphfrac

#endif // GRAPHFRAC_FD_ORACLE_HPP
