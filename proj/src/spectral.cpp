#include "graphfrac/spectral.hpp"

#include "edge_integrals.hpp"

#include "graphfrac/errors.hpp"
#include "graphfrac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace graphfrac {

using detail::sin_sin_integral;
using detail::sin_sq_integral;
using detail::sine_moments;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleTolerance = 1e-14;
constexpr long long kDenominatorCap = 1000000;

/// l_i / l_j = p / q exactly up to rounding, with q <= kDenominatorCap.
struct Ratio {
    long long p = 0;
    long long q = 0;
};

std::optional<Ratio> rational_ratio(double r)
{
    // Continued-fraction convergents h/k of r.
    long long h0 = 1, h1 = 0, k0 = 0, k1 = 1;
    double x = r;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(x);
        if (a > 1e12) {
            break;
        }
        const auto ai = static_cast<long long>(a);
        const long long h2 = ai * h0 + h1;
        const long long k2 = ai * k0 + k1;
        if (k2 > kDenominatorCap) {
            break;
        }
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
        if (std::abs(r - static_cast<double>(h0) / static_cast<double>(k0)) <= 1e-12 * r) {
            return Ratio{h0, k0};
        }
        const double frac = x - a;
        if (frac <= 0.0) {
            break;
        }
        x = 1.0 / frac;
    }
    return std::nullopt;
}

struct Pole {
    double value;
    std::size_t edge;
    long long m;
};

class PoleGrouper {
public:
    explicit PoleGrouper(const StarGraph& graph) : graph_(graph), k_(graph.edge_count()), ratios_(k_ * k_)
    {
        for (std::size_t i = 0; i < k_; ++i) {
            for (std::size_t j = 0; j < k_; ++j) {
                if (i != j) {
                    ratios_[i * k_ + j] = rational_ratio(graph.length(i) / graph.length(j));
                }
            }
        }
    }

    /// Whether two poles of different edges are the same point of the spectrum.
    [[nodiscard]] bool coincide(const Pole& a, const Pole& b) const
    {
        if (a.edge == b.edge) {
            return false;
        }
        if (const auto& r = ratios_[a.edge * k_ + b.edge]) {
            // m_a pi / l_a = m_b pi / l_b  <=>  m_a q = m_b p  with l_a / l_b = p / q.
            return a.m * r->q == b.m * r->p;
        }
        return is_resonant(a.value, graph_.length(b.edge));
    }

private:
    const StarGraph& graph_;
    std::size_t k_;
    std::vector<std::optional<Ratio>> ratios_;
};

struct PoleGroup {
    double value;
    std::vector<std::size_t> edges; // sorted
};

std::vector<PoleGroup> pole_groups(const StarGraph& graph, double lambda_max)
{
    std::vector<Pole> poles;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const double l = graph.length(i);
        // One pole past lambda_max per edge closes the last gap.
        const auto m_max = static_cast<long long>(std::floor(lambda_max * l / kPi)) + 1;
        for (long long m = 1; m <= m_max; ++m) {
            poles.push_back({static_cast<double>(m) * kPi / l, i, m});
        }
    }
    std::sort(poles.begin(), poles.end(), [](const Pole& a, const Pole& b) {
        return a.value < b.value || (a.value == b.value && a.edge < b.edge);
    });
    PoleGrouper grouper(graph);
    std::vector<PoleGroup> groups;
    std::size_t start = 0;
    while (start < poles.size()) {
        std::vector<const Pole*> members{&poles[start]};
        std::size_t next = start + 1;
        while (next < poles.size() && grouper.coincide(poles[start], poles[next])) {
            members.push_back(&poles[next]);
            ++next;
        }
        PoleGroup g;
        const Pole* anchor = *std::min_element(members.begin(), members.end(),
                                               [](const Pole* a, const Pole* b) { return a->edge < b->edge; });
        g.value = anchor->value;
        for (const Pole* p : members) {
            g.edges.push_back(p->edge);
        }
        std::sort(g.edges.begin(), g.edges.end());
        groups.push_back(std::move(g));
        start = next;
    }
    return groups;
}

struct SecularValue {
    double f;
    double df;
};

SecularValue secular_with_derivative(const StarGraph& graph, double lambda)
{
    SecularValue v{0.0, 0.0};
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const double l = graph.length(i);
        const double s = std::sin(lambda * l);
        const double c = std::cos(lambda * l);
        v.f += c / s;
        v.df -= l / (s * s);
    }
    return v;
}

/// The unique root of the secular function in the open gap (a, b) between
/// consecutive pole groups; the function decreases from +inf to -inf there.
double gap_root(const StarGraph& graph, double a, double b, double tol)
{
    double lo = a;
    double hi = b;
    double x = 0.5 * (a + b);
    for (int it = 0; it < 400; ++it) {
        const SecularValue v = secular_with_derivative(graph, x);
        if (!std::isfinite(v.f)) {
            throw ConvergenceError("enumerate_eigenvalues: secular function not finite inside gap");
        }
        if (v.f == 0.0) {
            return x;
        }
        if (v.f > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double step = v.f / v.df;
        const double stop = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * x);
        if (std::abs(step) <= stop) {
            return std::clamp(x - step, lo, hi);
        }
        double next = x - step;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo <= stop) {
            return next;
        }
        x = next;
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "enumerate_eigenvalues: root isolation failed in (" << a << ", " << b << ")";
    throw ConvergenceError(msg.str());
}

EigenPair nonresonant_pair(const StarGraph& graph, double lambda)
{
    const std::size_t k = graph.edge_count();
    Eigen::VectorXd s(static_cast<Eigen::Index>(k));
    double norm2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double l = graph.length(i);
        s(static_cast<Eigen::Index>(i)) = std::sin(lambda * l);
        norm2 += sin_sq_integral(lambda, l) / (s(static_cast<Eigen::Index>(i)) * s(static_cast<Eigen::Index>(i)));
    }
    EigenPair p;
    p.lambda = lambda;
    p.mu = lambda * lambda;
    p.kind = EigenKind::nonresonant;
    // Junction value c > 0.
    const double c = 1.0 / std::sqrt(norm2);
    p.amplitudes = c * s.cwiseInverse();
    return p;
}

/// Orthonormal basis of {A : A_i = 0 off S, sum_{i in S} A_i cos(lambda l_i) = 0}.
std::vector<EigenPair> resonant_pairs(const StarGraph& graph, const PoleGroup& group)
{
    const auto k = static_cast<Eigen::Index>(graph.edge_count());
    const double lambda = group.value;
    Eigen::VectorXd w(k);
    Eigen::VectorXd v(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double l = graph.length(static_cast<std::size_t>(i));
        w(i) = sin_sq_integral(lambda, l);
        v(i) = std::cos(lambda * l) >= 0.0 ? 1.0 : -1.0;
    }
    const auto s0 = static_cast<Eigen::Index>(group.edges.front());
    std::vector<Eigen::VectorXd> basis;
    for (std::size_t j = 1; j < group.edges.size(); ++j) {
        const auto sj = static_cast<Eigen::Index>(group.edges[j]);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
        b(sj) = 1.0;
        b(s0) = -v(sj) / v(s0);
        // Modified Gram-Schmidt in the weighted inner product, twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                b -= (b.cwiseProduct(w).dot(q)) * q;
            }
        }
        b /= std::sqrt(b.cwiseProduct(w).dot(b));
        basis.push_back(std::move(b));
    }
    std::vector<EigenPair> out;
    for (auto& b : basis) {
        EigenPair p;
        p.lambda = lambda;
        p.mu = lambda * lambda;
        p.kind = EigenKind::resonant;
        p.resonant_set = group.edges;
        p.amplitudes = std::move(b);
        out.push_back(std::move(p));
    }
    return out;
}

void fnv1a(std::uint64_t& h, const void* data, std::size_t bytes)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

const char* to_string(EigenKind kind) { return kind == EigenKind::resonant ? "resonant" : "nonresonant"; }

bool is_resonant(double lambda, double length)
{
    const double x = lambda * length;
    const double dist = std::abs(x - kPi * std::round(x / kPi));
    return dist < 1e-9 * (1.0 + x);
}

double secular_function(const StarGraph& graph, double lambda)
{
    if (!(lambda > 0.0)) {
        throw InvalidArgument("secular_function: lambda must be positive");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const double s = std::sin(lambda * graph.length(i));
        if (std::abs(s) < kPoleTolerance) {
            throw PoleError("secular_function: lambda is a pole (sin(lambda l_i) = 0 on edge " + std::to_string(i) + ")");
        }
        sum += std::cos(lambda * graph.length(i)) / s;
    }
    return sum;
}

std::vector<EigenPair> eigenpairs_up_to(const StarGraph& graph, double lambda_max, double tol)
{
    if (!(tol > 0.0)) {
        throw InvalidArgument("eigenpairs_up_to: tol must be positive");
    }
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
        throw InvalidArgument("eigenpairs_up_to: lambda_max must be positive and finite");
    }
    const std::vector<PoleGroup> groups = pole_groups(graph, lambda_max);
    std::vector<EigenPair> pairs;
    double left = 0.0;
    for (const PoleGroup& g : groups) {
        if (left > lambda_max) {
            break;
        }
        const double root = gap_root(graph, left, g.value, tol);
        if (root <= lambda_max) {
            pairs.push_back(nonresonant_pair(graph, root));
        }
        if (g.value <= lambda_max && g.edges.size() >= 2) {
            for (auto& p : resonant_pairs(graph, g)) {
                pairs.push_back(std::move(p));
            }
        }
        left = g.value;
    }
    std::size_t group = 0;
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        if (n == 0 || pairs[n].lambda != pairs[n - 1].lambda) {
            ++group;
        }
        pairs[n].index = n + 1;
        pairs[n].multiplicity_group = group;
    }
    return pairs;
}

std::vector<EigenPair> enumerate_eigenvalues(const StarGraph& graph, std::size_t n, double tol)
{
    if (n < 1) {
        throw InvalidArgument("enumerate_eigenvalues: N must be at least 1");
    }
    // Weyl: #{lambda_n <= L} ~ L sum(l_i) / pi.
    double lambda_max = kPi * (static_cast<double>(n + graph.edge_count()) + 2.0) / graph.total_length();
    for (;;) {
        std::vector<EigenPair> pairs = eigenpairs_up_to(graph, lambda_max, tol);
        if (pairs.size() >= n) {
            pairs.resize(n);
            return pairs;
        }
        lambda_max *= 1.5;
    }
}

SpectralBasis::SpectralBasis(StarGraph graph, std::vector<EigenPair> pairs)
    : graph_(std::move(graph)), pairs_(std::move(pairs))
{
    std::uint64_t h = 14695981039346656037ULL;
    fnv1a(h, graph_.lengths().data(), sizeof(double) * static_cast<std::size_t>(graph_.lengths().size()));
    for (const auto& p : pairs_) {
        if (p.amplitudes.size() != graph_.lengths().size()) {
            throw GraphMismatch("SpectralBasis: amplitude vector length differs from edge count");
        }
        fnv1a(h, &p.mu, sizeof p.mu);
        fnv1a(h, p.amplitudes.data(), sizeof(double) * static_cast<std::size_t>(p.amplitudes.size()));
    }
    fingerprint_ = h;
}

SpectralBasis SpectralBasis::first(const StarGraph& graph, std::size_t n, double tol)
{
    return SpectralBasis(graph, enumerate_eigenvalues(graph, n, tol));
}

Eigen::VectorXd SpectralBasis::eigenvalues() const
{
    Eigen::VectorXd mu(static_cast<Eigen::Index>(pairs_.size()));
    for (std::size_t n = 0; n < pairs_.size(); ++n) {
        mu(static_cast<Eigen::Index>(n)) = pairs_[n].mu;
    }
    return mu;
}

GraphFunction SpectralBasis::synthesize(const Eigen::VectorXd& coefficients, const std::vector<int>& intervals) const
{
    if (static_cast<std::size_t>(coefficients.size()) != pairs_.size()) {
        throw GraphMismatch("SpectralBasis::synthesize: coefficient count differs from basis size");
    }
    SineSeries s;
    s.frequencies.resize(coefficients.size());
    s.amplitudes.resize(graph_.lengths().size(), coefficients.size());
    for (Eigen::Index n = 0; n < coefficients.size(); ++n) {
        const EigenPair& p = pairs_[static_cast<std::size_t>(n)];
        s.frequencies(n) = p.lambda;
        s.amplitudes.col(n) = coefficients(n) * p.amplitudes;
    }
    return GraphFunction::from_analytic(graph_, std::move(s), intervals);
}

GraphFunction build_eigenfunction(const EigenPair& pair, const StarGraph& graph, const std::vector<int>& intervals)
{
    if (pair.amplitudes.size() != graph.lengths().size()) {
        throw GraphMismatch("build_eigenfunction: amplitude vector length differs from edge count");
    }
    SineSeries s;
    s.frequencies = Eigen::VectorXd::Constant(1, pair.lambda);
    s.amplitudes = pair.amplitudes;
    return GraphFunction::from_analytic(graph, std::move(s), intervals);
}

SpectralCoefficients fourier_coefficients(const GraphFunction& y, const SpectralBasis& basis)
{
    const StarGraph& graph = basis.graph();
    if (!(y.graph() == graph)) {
        throw GraphMismatch("fourier_coefficients: function and basis live on different graphs");
    }
    const auto n_modes = static_cast<Eigen::Index>(basis.size());
    const std::size_t k = graph.edge_count();
    SpectralCoefficients out;
    out.basis_id = basis.fingerprint();
    out.values = Eigen::VectorXd::Zero(n_modes);

    const auto* sine = y.analytic() ? std::get_if<SineSeries>(&*y.analytic()) : nullptr;
    const auto* poly = y.analytic() ? std::get_if<DistancePolynomial>(&*y.analytic()) : nullptr;
    for (Eigen::Index n = 0; n < n_modes; ++n) {
        const EigenPair& p = basis[static_cast<std::size_t>(n)];
        double c = 0.0;
        for (std::size_t e = 0; e < k; ++e) {
            const auto i = static_cast<Eigen::Index>(e);
            const double a = p.amplitudes(i);
            if (a == 0.0) {
                continue;
            }
            const double l = graph.length(e);
            double edge_sum = 0.0;
            if (sine != nullptr) {
                for (Eigen::Index t = 0; t < sine->frequencies.size(); ++t) {
                    const double b = sine->amplitudes(i, t);
                    if (b != 0.0) {
                        edge_sum += b * sin_sin_integral(p.lambda, sine->frequencies(t), l);
                    }
                }
            } else if (poly != nullptr) {
                const Eigen::Index degree = poly->coefficients.cols() - 1;
                edge_sum = poly->coefficients.row(i).dot(sine_moments(p.lambda, l, degree));
            } else {
                const Eigen::VectorXd& v = y.values(e);
                const int m = y.intervals(e);
                const double h = y.step(e);
                const Eigen::VectorXd w = simpson_weights<double>(m, h);
                for (int j = 0; j <= m; ++j) {
                    edge_sum += w(j) * v(j) * std::sin(p.lambda * (l - h * j));
                }
            }
            c += a * edge_sum;
        }
        out.values(n) = c;
    }
    return out;
}

double fractional_power_norm(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& mu, double gamma)
{
    if (coeffs.size() > mu.size()) {
        throw GraphMismatch("fractional_power_norm: more coefficients than eigenvalues");
    }
    double sum = 0.0;
    for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
        sum += std::pow(mu(n), 2.0 * gamma) * coeffs(n) * coeffs(n);
    }
    return std::sqrt(sum);
}

double fractional_power_norm(const SpectralCoefficients& coeffs, const SpectralBasis& basis, double gamma)
{
    if (coeffs.basis_id != basis.fingerprint()) {
        throw GraphMismatch("fractional_power_norm: coefficients were computed against a different basis");
    }
    return fractional_power_norm(coeffs.values, basis.eigenvalues(), gamma);
}

void write_eigen_report(std::ostream& out, const SpectralBasis& basis)
{
    out << "n,mu,kind,multiplicity_group";
    for (std::size_t i = 0; i < basis.graph().edge_count(); ++i) {
        out << ",A_" << (i + 1);
    }
    out << '\n';
    for (const EigenPair& p : basis.pairs()) {
        out << p.index << ',' << format_double(p.mu) << ',' << to_string(p.kind) << ',' << p.multiplicity_group;
        for (Eigen::Index i = 0; i < p.amplitudes.size(); ++i) {
            out << ',' << format_double(p.amplitudes(i));
        }
        out << '\n';
    }
}

} // namespace graphfrac
