#include "graphfrac/special_functions.hpp"

#include "graphfrac/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

namespace graphfrac {

namespace {

constexpr double kPi = std::numbers::pi;
// log(2^-52)
constexpr double kLogMachineEps = -36.043653389117154;
constexpr double kGammaOverflow = 171.6243769563027;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

long double rgammal(long double x)
{
    if (x <= 0.0L && x == std::floor(x)) {
        return 0.0L;
    }
    const long double g = std::tgamma(x);
    if (!std::isfinite(g)) {
        return 0.0L;
    }
    return 1.0L / g;
}

void require_params(const MLParams& p)
{
    if (!(p.alpha > 0.0) || !(p.alpha < 2.0) || !std::isfinite(p.beta)) {
        std::ostringstream os;
        os << "Mittag-Leffler parameters out of range: alpha=" << p.alpha << " beta=" << p.beta
           << " (need 0 < alpha < 2)";
        throw InvalidArgument(os.str());
    }
}

// Parameters of the trapezoidal rule on the parabola z(u) = mu (1 + iu)^2, |u| <= N h.
struct ContourRule {
    double mu = 0.0;
    double h = 0.0;
    double nodes = std::numeric_limits<double>::infinity();
};

// Parabolic contour confined to the strip between two consecutive singularities.
ContourRule bounded_region_rule(double phi_left, double phi_right, double p, double q, double log_eps)
{
    constexpr double fac = 1.01;
    const double f_max = std::exp(log_eps - kLogMachineEps);

    const double sq_left = std::sqrt(phi_left);
    const double threshold = 2.0 * std::sqrt(log_eps - kLogMachineEps);
    const double sq_right = std::min(std::sqrt(phi_right), threshold - sq_left);

    double sq_bar_left = sq_left;
    double sq_bar_right = sq_right;
    double f_bar = 1.0;
    bool admissible = true;

    const bool p_zero = p < 1.0e-14;
    const bool q_zero = q < 1.0e-14;
    if (p_zero && !q_zero) {
        const double f_min = sq_left > 0.0 ? fac * std::pow(sq_left / (sq_right - sq_left), q) : fac;
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fq = std::pow(f_bar, -1.0 / q);
            sq_bar_right = (2.0 * sq_right - fq * sq_left) / (2.0 + fq);
        } else {
            admissible = false;
        }
    } else if (!p_zero && q_zero) {
        const double f_min = fac * std::pow(sq_right / (sq_right - sq_left), p);
        if (f_min < f_max) {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / p);
            sq_bar_left = (2.0 * sq_left + fp * sq_right) / (2.0 - fp);
        } else {
            admissible = false;
        }
    } else if (!p_zero && !q_zero) {
        double f_min = fac * (sq_left + sq_right) / std::pow(sq_right - sq_left, std::max(p, q));
        if (f_min < f_max) {
            f_min = std::max(f_min, 1.5);
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            const double fp = std::pow(f_bar, -1.0 / p);
            const double fq = std::pow(f_bar, -1.0 / q);
            const double w = -phi_right / log_eps;
            const double den = 2.0 + w - (1.0 + w) * fp + fq;
            sq_bar_left = ((2.0 + w + fq) * sq_left + fp * sq_right) / den;
            sq_bar_right = (-(1.0 + w) * fq * sq_left + (2.0 + w - (1.0 + w) * fp) * sq_right) / den;
        } else {
            admissible = false;
        }
    }
    if (!admissible) {
        return {};
    }

    const double le = log_eps - std::log(f_bar);
    const double w = -sq_bar_right * sq_bar_right / le;
    ContourRule rule;
    const double base = (1.0 + w) * sq_bar_left + sq_bar_right;
    rule.mu = std::pow(base / (2.0 + w), 2);
    rule.h = -2.0 * kPi / le * (sq_bar_right - sq_bar_left) / base;
    rule.nodes = std::ceil(std::sqrt(1.0 - le / rule.mu) / rule.h);
    return rule;
}

// Parabolic contour to the right of the last singularity.
ContourRule unbounded_region_rule(double phi_star, double p, double log_eps)
{
    const double sq_phi_star = std::sqrt(phi_star);
    double phi_bar = phi_star > 0.0 ? phi_star * 1.01 : 0.01;
    double sq_phi_bar = std::sqrt(phi_bar);

    constexpr double f_min = 1.0;
    constexpr double f_max = 10.0;
    constexpr double f_tar = 5.0;

    double nodes = 0.0;
    double a = 0.0;
    double sq_mu = 0.0;
    for (int iter = 0;; ++iter) {
        const double phi_t = phi_bar;
        const double log_eps_phi_t = log_eps / phi_t;
        nodes = std::ceil(phi_t / kPi * (1.0 - 1.5 * log_eps_phi_t + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
        a = kPi * nodes / phi_t;
        sq_mu = sq_phi_bar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
        const double f_bar = std::pow((sq_phi_bar - sq_phi_star) / sq_mu, -p);
        if (p < 1.0e-14 || (f_min < f_bar && f_bar < f_max) || iter > 100) {
            break;
        }
        sq_phi_bar = std::pow(f_tar, -1.0 / p) * sq_mu + sq_phi_star;
        phi_bar = sq_phi_bar * sq_phi_bar;
    }

    ContourRule rule;
    rule.mu = sq_mu * sq_mu;
    rule.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / nodes;
    rule.nodes = nodes;

    // Keep round-off under control: the contour must not start too far right.
    const double threshold = log_eps - kLogMachineEps;
    if (rule.mu > threshold) {
        const double q = std::abs(p) < 1.0e-14 ? 0.0 : std::pow(f_tar, -1.0 / p) * std::sqrt(rule.mu);
        phi_bar = std::pow(q + sq_phi_star, 2);
        if (phi_bar < threshold) {
            const double w = std::sqrt(kLogMachineEps / (kLogMachineEps - log_eps));
            const double u = std::sqrt(-phi_bar / kLogMachineEps);
            rule.mu = threshold;
            rule.nodes = std::ceil(w * log_eps / 2.0 / kPi / (u * w - 1.0));
            rule.h = w / rule.nodes;
        } else {
            rule.nodes = std::numeric_limits<double>::infinity();
            rule.h = 0.0;
        }
    }
    return rule;
}

struct Singularity {
    double phi;
    std::complex<double> s;
};

} // namespace

double gamma(double x)
{
    if (std::isnan(x)) {
        throw InvalidArgument("gamma: NaN argument");
    }
    if (is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "gamma: pole at x=" << x;
        throw PoleError(os.str());
    }
    if (x > kGammaOverflow) {
        std::ostringstream os;
        os << "gamma: overflow at x=" << x;
        throw OverflowError(os.str());
    }
    return std::tgamma(x);
}

double rgamma(double x)
{
    if (is_nonpositive_integer(x) || x > kGammaOverflow) {
        return 0.0;
    }
    return 1.0 / std::tgamma(x);
}

MittagLeffler::MittagLeffler(MLParams params) : params_(params)
{
    require_params(params_);

    // Largest radius on which the alternating Taylor series loses at most three
    // digits to cancellation (largest term magnitude <= 1e3).
    constexpr std::array<double, 10> radii{5.0, 4.0, 3.0, 2.5, 2.0, 1.5, 1.0, 0.75, 0.5, 0.25};
    series_radius_ = radii.back();
    for (const double r : radii) {
        long double largest = 0.0L;
        long double rj = 1.0L;
        for (int j = 0; j < 4000; ++j) {
            const long double term = rj * std::abs(rgammal(params_.alpha * j + params_.beta));
            largest = std::max(largest, term);
            if (params_.alpha * j + params_.beta > 2.0 && term < 1.0e-25L * largest) {
                break;
            }
            rj *= r;
        }
        if (largest <= 1.0e3L) {
            series_radius_ = r;
            break;
        }
    }
    {
        long double largest = 0.0L;
        long double rj = 1.0L;
        for (int j = 0; j < 4000; ++j) {
            const long double c = rgammal(params_.alpha * j + params_.beta);
            series_coefficients_.push_back(c);
            const long double term = rj * std::abs(c);
            largest = std::max(largest, term);
            if (params_.alpha * j + params_.beta > 2.0 && term < 1.0e-25L * largest) {
                break;
            }
            rj *= series_radius_;
        }
    }

    // Seam calibration: the asymptotic branch takes over once its truncation
    // error is negligible and it agrees with the contour integral on three
    // consecutive probes.
    constexpr double kSeamTolerance = 1.0e-14;
    int consecutive = 0;
    double first_good = 0.0;
    for (double x = std::max(series_radius_, 1.0); x < 1.0e8; x *= 1.1) {
        double smallest = 0.0;
        const double a = asymptotic(-x, &smallest);
        const bool ok = smallest <= 1.0e-16 * std::max(1.0, std::abs(a)) &&
                        std::abs(a - contour(-x)) <= kSeamTolerance;
        if (ok) {
            if (consecutive == 0) {
                first_good = x;
            }
            if (++consecutive == 3) {
                asymptotic_threshold_ = first_good;
                break;
            }
        } else {
            consecutive = 0;
        }
    }
}

double MittagLeffler::series(double z) const
{
    const long double zl = z;
    // Gamma arguments in extended precision: their rounding is amplified by the cancellation.
    const long double alpha = params_.alpha;
    const long double beta = params_.beta;
    long double sum = 0.0L;
    long double largest = 0.0L;
    long double zj = 1.0L;
    for (int j = 0; j < 4000; ++j) {
        const auto index = static_cast<std::size_t>(j);
        const long double c =
            index < series_coefficients_.size() ? series_coefficients_[index] : rgammal(alpha * j + beta);
        const long double term = zj * c;
        sum += term;
        largest = std::max(largest, std::abs(term));
        if (alpha * j + beta > 2.0L && std::abs(term) <= 1.0e-22L * largest) {
            if (!std::isfinite(static_cast<double>(sum))) {
                throw OverflowError("mittag_leffler: series result overflows double");
            }
            return static_cast<double>(sum);
        }
        zj *= zl;
        if (zj == 0.0L) {
            return static_cast<double>(sum);
        }
    }
    std::ostringstream os;
    os << "mittag_leffler: Taylor series did not converge for z=" << z;
    throw ConvergenceError(os.str());
}

double MittagLeffler::asymptotic(double z, double* smallest_term) const
{
    // E(z) ~ -sum_{j>=1} z^{-j} / Gamma(beta - alpha j); truncated at the smallest term.
    const double inv = 1.0 / z;
    double sum = 0.0;
    double power = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    double smallest = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 200; ++j) {
        power *= inv;
        const double term = -power * rgamma(params_.beta - params_.alpha * j);
        const double mag = std::abs(term);
        if (mag == 0.0) {
            continue;
        }
        if (mag > previous) {
            smallest = previous;
            break;
        }
        sum += term;
        previous = mag;
        smallest = mag;
        if (mag <= 1.0e-18 * std::abs(sum)) {
            smallest = 0.0;
            break;
        }
    }
    if (smallest == std::numeric_limits<double>::infinity()) {
        smallest = 0.0; // every term vanished
    }
    if (smallest_term != nullptr) {
        *smallest_term = smallest;
    }
    return sum;
}

double MittagLeffler::contour(double z) const
{
    const double alpha = params_.alpha;
    const double beta = params_.beta;
    if (z == 0.0) {
        return rgamma(beta);
    }

    // Poles s* of s^{alpha-beta}/(s^alpha - z) on the principal sheet.
    const double theta = z < 0.0 ? kPi : 0.0;
    const int kmin = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * kPi)));
    const int kmax = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * kPi)));
    const double radius = std::pow(std::abs(z), 1.0 / alpha);
    std::vector<Singularity> poles;
    for (int k = kmin; k <= kmax; ++k) {
        const std::complex<double> s = std::polar(radius, (theta + 2.0 * kPi * k) / alpha);
        const double phi = 0.5 * (s.real() + std::abs(s));
        if (phi > 1.0e-15) {
            poles.push_back({phi, s});
        }
    }
    std::sort(poles.begin(), poles.end(), [](const Singularity& a, const Singularity& b) { return a.phi < b.phi; });

    const std::size_t n_poles = poles.size();
    std::vector<double> phis(n_poles + 2);
    phis[0] = 0.0;
    for (std::size_t j = 0; j < n_poles; ++j) {
        phis[j + 1] = poles[j].phi;
    }
    phis[n_poles + 1] = std::numeric_limits<double>::infinity();
    std::vector<double> p(n_poles + 1, 1.0);
    std::vector<double> q(n_poles + 1, 1.0);
    p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
    q[n_poles] = std::numeric_limits<double>::infinity();

    double log_eps = std::log(1.0e-15);
    ContourRule best;
    std::size_t best_region = 0;
    for (int attempt = 0;; ++attempt) {
        best = ContourRule{};
        for (std::size_t j = 0; j <= n_poles; ++j) {
            if (!(phis[j] < log_eps - kLogMachineEps && phis[j] < phis[j + 1])) {
                continue;
            }
            const ContourRule rule = j < n_poles ? bounded_region_rule(phis[j], phis[j + 1], p[j], q[j], log_eps)
                                                 : unbounded_region_rule(phis[j], p[j], log_eps);
            if (rule.nodes < best.nodes) {
                best = rule;
                best_region = j;
            }
        }
        if (best.nodes <= 200.0) {
            break;
        }
        if (attempt > 12) {
            std::ostringstream os;
            os << "mittag_leffler: no admissible integration contour for z=" << z;
            throw ConvergenceError(os.str());
        }
        log_eps += std::log(10.0);
    }

    // Trapezoidal rule; for real z the nodes pair up as conjugates, so
    // (1/2 pi i) sum_k S_k = (1/pi) [Im S_0 / 2 + sum_{k>0} Im S_k].
    const int n = static_cast<int>(best.nodes);
    const std::complex<double> i1(0.0, 1.0);
    auto integrand = [&](double u) {
        const std::complex<double> s = best.mu * (1.0 + i1 * u) * (1.0 + i1 * u);
        const std::complex<double> ds = 2.0 * best.mu * (i1 - u);
        return std::exp(s) * std::pow(s, alpha - beta) / (std::pow(s, alpha) - z) * ds;
    };
    double acc = 0.5 * integrand(0.0).imag();
    for (int k = 1; k <= n; ++k) {
        acc += integrand(best.h * k).imag();
    }
    double result = best.h * acc / kPi;

    // Residues of the poles lying to the right of the chosen contour.
    std::complex<double> residues(0.0, 0.0);
    for (std::size_t j = best_region; j < n_poles; ++j) {
        const std::complex<double> s = poles[j].s;
        residues += std::pow(s, 1.0 - beta) * std::exp(s) / alpha;
    }
    result += residues.real();
    if (!std::isfinite(result)) {
        std::ostringstream os;
        os << "mittag_leffler: result overflows double at z=" << z;
        throw OverflowError(os.str());
    }
    return result;
}

double MittagLeffler::operator()(double z) const
{
    if (std::isnan(z)) {
        throw InvalidArgument("mittag_leffler: NaN argument");
    }
    if (std::abs(z) <= series_radius_) {
        return series(z);
    }
    if (z < 0.0 && -z >= asymptotic_threshold_) {
        return asymptotic(z);
    }
    return contour(z);
}

double mittag_leffler(MLParams params, double z)
{
    struct Slot {
        double alpha;
        double beta;
        MittagLeffler eval;
    };
    thread_local std::vector<Slot> cache;
    for (const Slot& slot : cache) {
        if (slot.alpha == params.alpha && slot.beta == params.beta) {
            return slot.eval(z);
        }
    }
    if (cache.size() >= 16) {
        cache.erase(cache.begin());
    }
    cache.push_back({params.alpha, params.beta, MittagLeffler(params)});
    return cache.back().eval(z);
}

namespace {

void require_kernel_args(const char* name, double alpha, double mu, double t)
{
    if (!(alpha > 0.0 && alpha <= 1.0) || !(mu > 0.0) || !(t >= 0.0)) {
        std::ostringstream os;
        os << name << ": need 0 < alpha <= 1, mu > 0, t >= 0 (got alpha=" << alpha << ", mu=" << mu << ", t=" << t
           << ")";
        throw InvalidArgument(os.str());
    }
}

} // namespace

double ml_decay_kernel(double alpha, double mu, double t)
{
    require_kernel_args("ml_decay_kernel", alpha, mu, t);
    if (t == 0.0) {
        return 1.0;
    }
    return mittag_leffler({alpha, 1.0}, -mu * std::pow(t, alpha));
}

double ml_kernel_integral(double alpha, double mu, double t)
{
    require_kernel_args("ml_kernel_integral", alpha, mu, t);
    if (t == 0.0) {
        return 0.0;
    }
    const double ta = std::pow(t, alpha);
    return ta * mittag_leffler({alpha, alpha + 1.0}, -mu * ta);
}

} // namespace graphfrac
