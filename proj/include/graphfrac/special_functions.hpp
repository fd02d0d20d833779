#ifndef GRAPHFRAC_SPECIAL_FUNCTIONS_HPP
#define GRAPHFRAC_SPECIAL_FUNCTIONS_HPP

#include <limits>
#include <vector>

namespace graphfrac {

/// Euler Gamma function on the real line.
///
/// Throws PoleError at x in {0, -1, -2, ...} and OverflowError when the result
/// exceeds the double range (x above ~171.62).
double gamma(double x);

/// 1/Gamma(x), an entire function: returns exactly 0 at the poles of Gamma.
double rgamma(double x);

/// Parameters of the two-parameter Mittag-Leffler function E_{alpha,beta}.
struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Evaluator for E_{alpha,beta}(z) on the real line.
///
/// Three regimes are used on the negative axis:
///   - |z| <= series_radius(): Taylor series accumulated in long double;
///   - z <= -asymptotic_threshold(): the algebraic asymptotic expansion
///       E(-x) ~ -sum_{j>=1} (-x)^{-j} / Gamma(beta - alpha j);
///   - otherwise: numerical inversion of the Laplace transform
///       s^{alpha-beta} / (s^alpha - z)
///     by the trapezoidal rule on an optimal parabolic contour.
/// Positive arguments beyond the series radius use the contour inversion plus
/// the residue of the real pole s = z^{1/alpha}.
///
/// The constructor calibrates both switch points for the given parameters, so
/// an instance should be reused across many evaluations. Instances are
/// immutable and safe to share between threads.
class MittagLeffler {
public:
    explicit MittagLeffler(MLParams params);

    double operator()(double z) const;

    [[nodiscard]] const MLParams& params() const noexcept { return params_; }
    [[nodiscard]] double series_radius() const noexcept { return series_radius_; }
    /// +inf when the asymptotic expansion never reaches full accuracy.
    [[nodiscard]] double asymptotic_threshold() const noexcept { return asymptotic_threshold_; }

    // Individual regimes, exposed for seam and cross-regime tests.
    [[nodiscard]] double series(double z) const;
    [[nodiscard]] double asymptotic(double z, double* smallest_term = nullptr) const;
    [[nodiscard]] double contour(double z) const;

private:
    MLParams params_;
    double series_radius_ = 0.0;
    /// 1/Gamma(alpha j + beta) for every term the series needs on |z| <= series_radius_.
    std::vector<long double> series_coefficients_;
    double asymptotic_threshold_ = std::numeric_limits<double>::infinity();
};

/// E_{alpha,beta}(z). Reuses a small per-thread cache of calibrated evaluators.
double mittag_leffler(MLParams params, double z);

/// E_{alpha,1}(-mu t^alpha): per-mode relaxation factor. alpha in (0,1], mu > 0, t >= 0.
double ml_decay_kernel(double alpha, double mu, double t);

/// int_0^t s^{alpha-1} E_{alpha,alpha}(-mu s^alpha) ds = (1 - E_{alpha,1}(-mu t^alpha)) / mu,
/// evaluated as t^alpha E_{alpha,alpha+1}(-mu t^alpha) to avoid cancellation at small t.
double ml_kernel_integral(double alpha, double mu, double t);

} // namespace graphfrac

#endif // GRAPHFRAC_SPECIAL_FUNCTIONS_HPP
