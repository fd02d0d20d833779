#ifndef GRAPHFRAC_SPECTRAL_HPP
#define GRAPHFRAC_SPECTRAL_HPP

#include "graphfrac/metric_graph.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace graphfrac {

enum class EigenKind { nonresonant, resonant };

const char* to_string(EigenKind kind);

/// Eigenpair of -y'' = mu y with Dirichlet ends, continuity and Kirchhoff at the junction.
/// psi_i(x) = amplitudes(i) sin(lambda (l_i - x)), unit norm in L2 of the graph.
struct EigenPair {
    double mu = 0.0;
    double lambda = 0.0;
    Eigen::VectorXd amplitudes;
    EigenKind kind = EigenKind::nonresonant;
    std::vector<std::size_t> resonant_set; // sorted edge indices; empty when nonresonant
    std::size_t index = 0;                 // 1-based position in the ascending spectrum
    std::size_t multiplicity_group = 0;    // 1-based id shared by pairs with equal mu
};

/// sum_i cot(lambda l_i). Throws PoleError when some |sin(lambda l_i)| < 1e-14.
double secular_function(const StarGraph& graph, double lambda);

/// True when dist(lambda l, pi Z) < 1e-9 (1 + lambda l).
bool is_resonant(double lambda, double length);

/// All eigenpairs with lambda <= lambda_max, ascending, degenerate values repeated.
/// Nonresonant roots are located to |d lambda| <= tol.
std::vector<EigenPair> eigenpairs_up_to(const StarGraph& graph, double lambda_max, double tol = 1e-13);

/// The first N eigenpairs.
std::vector<EigenPair> enumerate_eigenvalues(const StarGraph& graph, std::size_t n, double tol = 1e-13);

/// Truncated eigenbasis together with its graph and a content fingerprint.
class SpectralBasis {
public:
    SpectralBasis(StarGraph graph, std::vector<EigenPair> pairs);
    static SpectralBasis first(const StarGraph& graph, std::size_t n, double tol = 1e-13);

    [[nodiscard]] const StarGraph& graph() const noexcept { return graph_; }
    [[nodiscard]] const std::vector<EigenPair>& pairs() const noexcept { return pairs_; }
    [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
    [[nodiscard]] const EigenPair& operator[](std::size_t n) const { return pairs_[n]; }
    [[nodiscard]] Eigen::VectorXd eigenvalues() const;
    [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    /// sum_n coefficients(n) Psi_n as a closed-form GraphFunction sampled on `intervals`.
    [[nodiscard]] GraphFunction synthesize(const Eigen::VectorXd& coefficients, const std::vector<int>& intervals) const;

private:
    StarGraph graph_;
    std::vector<EigenPair> pairs_;
    std::uint64_t fingerprint_ = 0;
};

/// Samples Psi_n on the given per-edge interval counts; the result carries its closed form.
GraphFunction build_eigenfunction(const EigenPair& pair, const StarGraph& graph, const std::vector<int>& intervals);

/// <y, Psi_n> for every n of the basis.
struct SpectralCoefficients {
    Eigen::VectorXd values;
    std::uint64_t basis_id = 0;
};

/// Closed-form projections for SineSeries and DistancePolynomial functions;
/// composite Simpson on the samples otherwise.
SpectralCoefficients fourier_coefficients(const GraphFunction& y, const SpectralBasis& basis);

/// (sum_n mu_n^{2 gamma} c_n^2)^{1/2}. Throws GraphMismatch when the coefficients
/// were computed against a different basis.
double fractional_power_norm(const SpectralCoefficients& coeffs, const SpectralBasis& basis, double gamma);
double fractional_power_norm(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& mu, double gamma);

/// CSV `n,mu,kind,multiplicity_group,A_1..A_k`, 17 significant digits.
void write_eigen_report(std::ostream& out, const SpectralBasis& basis);

} // namespace graphfrac

#endif // GRAPHFRAC_SPECTRAL_HPP
