#ifndef GRAPHFRAC_QUADRATURE_HPP
#define GRAPHFRAC_QUADRATURE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphfrac {

/// Composite Newton-Cotes weights on n+1 uniform nodes with spacing h.
///
/// Even n: composite Simpson. Odd n >= 3: Simpson on the first n-3 intervals
/// and the 3/8 rule on the last three. n = 1: trapezoid.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> simpson_weights(Eigen::Index n, Scalar h)
{
    if (n < 1) {
        throw std::invalid_argument("simpson_weights: need at least one interval");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
    if (n == 1) {
        w << h / 2, h / 2;
        return w;
    }
    const Eigen::Index simpson_end = (n % 2 == 0) ? n : n - 3;
    for (Eigen::Index j = 0; j + 2 <= simpson_end; j += 2) {
        w(j) += h / 3;
        w(j + 1) += 4 * h / 3;
        w(j + 2) += h / 3;
    }
    if (n % 2 == 1) {
        const Scalar c = 3 * h / 8;
        w(n - 3) += c;
        w(n - 2) += 3 * c;
        w(n - 1) += 3 * c;
        w(n) += c;
    }
    return w;
}

/// Composite Simpson integral of uniformly sampled values.
template <typename Derived>
typename Derived::Scalar composite_simpson(const Eigen::MatrixBase<Derived>& values, typename Derived::Scalar h)
{
    return simpson_weights<typename Derived::Scalar>(values.size() - 1, h).dot(values.derived());
}

/// Four-point Lagrange interpolation of uniform samples (spacing h, first node at 0).
template <typename Derived>
typename Derived::Scalar cubic_interpolate(const Eigen::MatrixBase<Derived>& values, typename Derived::Scalar h,
                                           typename Derived::Scalar x)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = values.size() - 1;
    if (n < 1) {
        throw std::invalid_argument("cubic_interpolate: need at least two samples");
    }
    const Scalar s = x / h;
    if (n < 3) {
        // Too few samples for a cubic stencil: piecewise linear.
        Eigen::Index j = static_cast<Eigen::Index>(std::floor(s));
        j = std::clamp<Eigen::Index>(j, 0, n - 1);
        const Scalar t = s - static_cast<Scalar>(j);
        return (1 - t) * values(j) + t * values(j + 1);
    }
    Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(s)) - 1;
    j0 = std::clamp<Eigen::Index>(j0, 0, n - 3);
    const Scalar t = s - static_cast<Scalar>(j0);
    // Nodes at t = 0, 1, 2, 3.
    const Scalar l0 = -(t - 1) * (t - 2) * (t - 3) / 6;
    const Scalar l1 = t * (t - 2) * (t - 3) / 2;
    const Scalar l2 = -t * (t - 1) * (t - 3) / 2;
    const Scalar l3 = t * (t - 1) * (t - 2) / 6;
    return l0 * values(j0) + l1 * values(j0 + 1) + l2 * values(j0 + 2) + l3 * values(j0 + 3);
}

/// Resample uniform samples on [0, length] onto a uniform grid with new_intervals intervals.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
cubic_resample(const Eigen::MatrixBase<Derived>& values, typename Derived::Scalar length, Eigen::Index new_intervals)
{
    using Scalar = typename Derived::Scalar;
    const Scalar h_old = length / static_cast<Scalar>(values.size() - 1);
    const Scalar h_new = length / static_cast<Scalar>(new_intervals);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(new_intervals + 1);
    for (Eigen::Index j = 0; j <= new_intervals; ++j) {
        out(j) = cubic_interpolate(values, h_old, h_new * static_cast<Scalar>(j));
    }
    return out;
}

/// Gauss-Legendre rule on [-1, 1].
template <typename Scalar = double>
struct GaussRule {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
};

/// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights 2 v_0^2.
template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(Eigen::Index n)
{
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix jacobi = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        const Scalar kk = static_cast<Scalar>(k);
        const Scalar b = kk / std::sqrt(4 * kk * kk - 1);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
    GaussRule<Scalar> rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = 2 * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

} // namespace graphfrac

#endif // GRAPHFRAC_QUADRATURE_HPP
