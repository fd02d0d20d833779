#ifndef GRAPHFRAC_SRC_EDGE_INTEGRALS_HPP
#define GRAPHFRAC_SRC_EDGE_INTEGRALS_HPP

#include "graphfrac/metric_graph.hpp"

#include <Eigen/Dense>

namespace graphfrac::detail {

/// int_0^l sin^2(lambda s) ds, cancellation-free for small lambda l.
double sin_sq_integral(double lambda, double l);

/// int_0^l sin(a s) sin(b s) ds.
double sin_sin_integral(double a, double b, double l);

/// int_0^l s^j sin(lambda s) ds for j = 0..degree.
Eigen::VectorXd sine_moments(double lambda, double l, Eigen::Index degree);

/// int_0^{l_i} f_i g_i dx for two closed forms on edge `edge`.
double analytic_edge_product(const AnalyticForm& f, const AnalyticForm& g, const StarGraph& graph, std::size_t edge);

} // namespace graphfrac::detail

#endif // GRAPHFRAC_SRC_EDGE_INTEGRALS_HPP
