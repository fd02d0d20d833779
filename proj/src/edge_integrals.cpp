#include "edge_integrals.hpp"

#include "graphfrac/quadrature.hpp"

#include <cmath>

namespace graphfrac::detail {

namespace {

/// int_0^l cos(d s) ds.
double cos_integral(double d, double l)
{
    const double x = d * l;
    if (std::abs(x) < 1e-4) {
        return l * (1.0 - x * x / 6.0);
    }
    return std::sin(x) / d;
}

double sine_poly(const SineSeries& s, const DistancePolynomial& p, Eigen::Index i, double l)
{
    double sum = 0.0;
    const Eigen::Index degree = p.coefficients.cols() - 1;
    for (Eigen::Index t = 0; t < s.frequencies.size(); ++t) {
        if (s.amplitudes(i, t) != 0.0) {
            sum += s.amplitudes(i, t) * p.coefficients.row(i).dot(sine_moments(s.frequencies(t), l, degree));
        }
    }
    return sum;
}

} // namespace

double sin_sq_integral(double lambda, double l)
{
    const double x = 2.0 * lambda * l;
    if (x < 0.5) {
        const double x2 = x * x;
        // 1 - sin(x)/x = x^2/6 - x^4/120 + x^6/5040 - ...
        const double one_minus_sinc =
            x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))));
        return 0.5 * l * one_minus_sinc;
    }
    return 0.5 * l - std::sin(x) / (4.0 * lambda);
}

double sin_sin_integral(double a, double b, double l)
{
    if (a == b) {
        return sin_sq_integral(a, l);
    }
    return 0.5 * (cos_integral(a - b, l) - cos_integral(a + b, l));
}

Eigen::VectorXd sine_moments(double lambda, double l, Eigen::Index degree)
{
    static const GaussRule<double> rule = gauss_legendre<double>(20);
    const int panels = 1 + static_cast<int>(std::ceil(std::abs(lambda) * l / 4.0)) + static_cast<int>(degree / 8);
    const double width = l / panels;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(degree + 1);
    for (int p = 0; p < panels; ++p) {
        const double a = width * p;
        for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
            const double s = a + 0.5 * width * (rule.nodes(q) + 1.0);
            double term = 0.5 * width * rule.weights(q) * std::sin(lambda * s);
            for (Eigen::Index j = 0; j <= degree; ++j) {
                m(j) += term;
                term *= s;
            }
        }
    }
    return m;
}

double analytic_edge_product(const AnalyticForm& f, const AnalyticForm& g, const StarGraph& graph, std::size_t edge)
{
    const auto i = static_cast<Eigen::Index>(edge);
    const double l = graph.length(edge);
    const auto* fs = std::get_if<SineSeries>(&f);
    const auto* gs = std::get_if<SineSeries>(&g);
    const auto* fp = std::get_if<DistancePolynomial>(&f);
    const auto* gp = std::get_if<DistancePolynomial>(&g);
    if (fs && gs) {
        double sum = 0.0;
        for (Eigen::Index t = 0; t < fs->frequencies.size(); ++t) {
            const double a = fs->amplitudes(i, t);
            if (a == 0.0) {
                continue;
            }
            for (Eigen::Index u = 0; u < gs->frequencies.size(); ++u) {
                const double b = gs->amplitudes(i, u);
                if (b != 0.0) {
                    sum += a * b * sin_sin_integral(fs->frequencies(t), gs->frequencies(u), l);
                }
            }
        }
        return sum;
    }
    if (fs && gp) {
        return sine_poly(*fs, *gp, i, l);
    }
    if (fp && gs) {
        return sine_poly(*gs, *fp, i, l);
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < fp->coefficients.cols(); ++j) {
        for (Eigen::Index m = 0; m < gp->coefficients.cols(); ++m) {
            const auto p = static_cast<double>(j + m + 1);
            sum += fp->coefficients(i, j) * gp->coefficients(i, m) * std::pow(l, p) / p;
        }
    }
    return sum;
}

} // namespace graphfrac::detail
