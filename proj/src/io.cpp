#include "graphfrac/io.hpp"

#include "graphfrac/errors.hpp"
#include "graphfrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <memory>

namespace graphfrac {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message)
{
    throw InvalidArgument(field + ": " + message);
}

double number(const json& node, const std::string& field)
{
    if (!node.is_number()) {
        fail(field, "expected a number");
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        fail(field, "must be finite");
    }
    return v;
}

double number_or(const json& object, const char* key, double fallback, const std::string& field)
{
    return object.contains(key) ? number(object.at(key), field + "." + key) : fallback;
}

const json& member(const json& object, const char* key, const std::string& field)
{
    if (!object.is_object() || !object.contains(key)) {
        fail(field, std::string("missing field '") + key + "'");
    }
    return object.at(key);
}

Eigen::VectorXd vector(const json& node, const std::string& field)
{
    if (!node.is_array()) {
        fail(field, "expected an array of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t j = 0; j < node.size(); ++j) {
        v(static_cast<Eigen::Index>(j)) = number(node[j], field + "[" + std::to_string(j) + "]");
    }
    return v;
}

/// Lazily grown eigenbasis shared by every named mode in one document.
class BasisCache {
public:
    explicit BasisCache(const StarGraph& graph) : graph_(graph) {}

    const SpectralBasis& at_least(std::size_t n)
    {
        if (!basis_ || basis_->size() < n) {
            basis_ = std::make_unique<SpectralBasis>(SpectralBasis::first(graph_, n));
        }
        return *basis_;
    }

private:
    const StarGraph& graph_;
    std::unique_ptr<SpectralBasis> basis_;
};

GraphFunction modes(const Eigen::VectorXd& c, BasisCache& cache, const std::vector<int>& intervals)
{
    const SpectralBasis& basis = cache.at_least(static_cast<std::size_t>(c.size()));
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    full.head(c.size()) = c;
    return basis.synthesize(full, intervals);
}

int mode_index(const std::string& name, const std::string& field)
{
    const std::string digits = name.substr(5);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char ch) { return std::isdigit(ch); }) ||
        digits.size() > 6) {
        fail(field, "expected mode:n with a positive integer n");
    }
    const int n = std::stoi(digits);
    if (n < 1) {
        fail(field, "mode index must be at least 1");
    }
    return n;
}

GraphFunction parse_function(const json& node, const std::string& field, const StarGraph& graph,
                             const std::vector<int>& intervals, BasisCache& cache)
{
    const auto k = static_cast<Eigen::Index>(graph.edge_count());
    if (node.is_string()) {
        const std::string name = node.get<std::string>();
        if (name == "zero") {
            return GraphFunction::zero(graph, intervals);
        }
        if (name == "hat") {
            DistancePolynomial p{Eigen::MatrixXd::Zero(k, 2)};
            p.coefficients.col(1) = graph.lengths().cwiseInverse();
            return GraphFunction::from_analytic(graph, p, intervals);
        }
        if (name.rfind("mode:", 0) == 0) {
            const int n = mode_index(name, field);
            return modes(Eigen::VectorXd::Unit(n, n - 1), cache, intervals);
        }
        fail(field, "unknown function '" + name + "' (expected zero, hat, mode:n or an object)");
    }
    if (!node.is_object()) {
        fail(field, "expected a function name or object");
    }
    const json& type_node = member(node, "type", field);
    if (!type_node.is_string()) {
        fail(field + ".type", "expected a string");
    }
    const std::string type = type_node.get<std::string>();
    if (type == "modes") {
        const Eigen::VectorXd c = vector(member(node, "coefficients", field), field + ".coefficients");
        if (c.size() == 0) {
            fail(field + ".coefficients", "must not be empty");
        }
        return modes(c, cache, intervals);
    }
    if (type == "power_modes") {
        const double count = number(member(node, "count", field), field + ".count");
        if (!(count >= 1.0 && count <= 1e5 && count == std::floor(count))) {
            fail(field + ".count", "must be a positive integer");
        }
        const double exponent = number(member(node, "exponent", field), field + ".exponent");
        const double scale = number_or(node, "scale", 1.0, field);
        Eigen::VectorXd c(static_cast<Eigen::Index>(count));
        for (Eigen::Index n = 0; n < c.size(); ++n) {
            c(n) = scale * std::pow(static_cast<double>(n + 1), exponent);
        }
        return modes(c, cache, intervals);
    }
    if (type == "polynomial") {
        const json& rows = member(node, "coefficients", field);
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != k) {
            fail(field + ".coefficients", "expected one coefficient list per edge");
        }
        std::vector<Eigen::VectorXd> per_edge;
        Eigen::Index width = 1;
        for (std::size_t e = 0; e < rows.size(); ++e) {
            per_edge.push_back(vector(rows[e], field + ".coefficients[" + std::to_string(e) + "]"));
            width = std::max(width, per_edge.back().size());
        }
        DistancePolynomial p{Eigen::MatrixXd::Zero(k, width)};
        for (Eigen::Index e = 0; e < k; ++e) {
            p.coefficients.row(e).head(per_edge[static_cast<std::size_t>(e)].size()) =
                per_edge[static_cast<std::size_t>(e)].transpose();
        }
        return GraphFunction::from_analytic(graph, p, intervals);
    }
    if (type == "samples") {
        const json& rows = member(node, "values", field);
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != k) {
            fail(field + ".values", "expected one sample list per edge");
        }
        std::vector<Eigen::VectorXd> samples;
        for (std::size_t e = 0; e < rows.size(); ++e) {
            samples.push_back(vector(rows[e], field + ".values[" + std::to_string(e) + "]"));
            if (samples.back().size() < 3) {
                fail(field + ".values[" + std::to_string(e) + "]", "need at least 3 samples");
            }
        }
        return GraphFunction(graph, std::move(samples));
    }
    fail(field + ".type", "unknown function type '" + type + "'");
}

TimeProfile parse_profile(const json& node, const std::string& field)
{
    const json& type_node = member(node, "type", field);
    if (!type_node.is_string()) {
        fail(field + ".type", "expected a string");
    }
    const std::string type = type_node.get<std::string>();
    if (type == "constant") {
        return ConstantProfile{number_or(node, "value", 1.0, field)};
    }
    if (type == "polynomial") {
        return PolynomialProfile{vector(member(node, "coefficients", field), field + ".coefficients")};
    }
    if (type == "power") {
        const double exponent = number(member(node, "exponent", field), field + ".exponent");
        if (!(exponent > -1.0)) {
            fail(field + ".exponent", "must exceed -1");
        }
        return PowerProfile{number_or(node, "coefficient", 1.0, field), exponent};
    }
    if (type == "sine") {
        return SineProfile{number_or(node, "amplitude", 1.0, field), number_or(node, "frequency", 1.0, field),
                           number_or(node, "phase", 0.0, field)};
    }
    if (type == "exponential") {
        return ExponentialProfile{number_or(node, "amplitude", 1.0, field), number_or(node, "rate", -1.0, field)};
    }
    if (type == "samples") {
        SampledProfile p{vector(member(node, "times", field), field + ".times"),
                         vector(member(node, "values", field), field + ".values")};
        if (p.times.size() == 0 || p.times.size() != p.values.size()) {
            fail(field, "times and values must be non-empty and of equal length");
        }
        return p;
    }
    fail(field + ".type", "unknown profile type '" + type + "'");
}

void add_source_term(Source& source, const json& node, const std::string& field, const StarGraph& graph,
                     const std::vector<int>& intervals, BasisCache& cache)
{
    if (node.is_string()) {
        const std::string name = node.get<std::string>();
        if (name == "zero") {
            return;
        }
        source.terms.push_back({ConstantProfile{1.0}, parse_function(node, field, graph, intervals, cache)});
        return;
    }
    if (!node.is_object()) {
        fail(field, "expected a source name, term object or list of terms");
    }
    if (node.contains("type") && node.at("type") == "samples") {
        if (source.sampled) {
            fail(field, "at most one sampled source is allowed");
        }
        SampledSource samples;
        const Eigen::VectorXd times = vector(member(node, "times", field), field + ".times");
        const json& slices = member(node, "slices", field);
        if (!slices.is_array() || static_cast<Eigen::Index>(slices.size()) != times.size() || times.size() == 0) {
            fail(field + ".slices", "expected one slice per time");
        }
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            samples.times.push_back(times(j));
            samples.slices.push_back(parse_function(slices[static_cast<std::size_t>(j)],
                                                    field + ".slices[" + std::to_string(j) + "]", graph, intervals,
                                                    cache));
        }
        source.sampled = Source::from_samples(std::move(samples)).sampled;
        return;
    }
    const TimeProfile profile =
        node.contains("profile") ? parse_profile(node.at("profile"), field + ".profile") : TimeProfile{ConstantProfile{}};
    source.terms.push_back({profile, parse_function(member(node, "shape", field), field + ".shape", graph, intervals, cache)});
}

} // namespace

ProblemSpec parse_problem(const json& document, int intervals_per_edge)
{
    if (!document.is_object()) {
        fail("problem", "expected a JSON object");
    }
    if (intervals_per_edge < 2) {
        fail("grid", "need at least 2 intervals per edge");
    }
    if (document.contains("schema_version")) {
        const json& v = document.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != 1) {
            fail("schema_version", "unsupported version (expected 1)");
        }
    }
    const Eigen::VectorXd lengths = vector(member(document, "lengths", "problem"), "lengths");
    if (lengths.size() < 2) {
        fail("lengths", "a star graph needs at least two edges");
    }
    for (Eigen::Index e = 0; e < lengths.size(); ++e) {
        if (!(lengths(e) > 0.0)) {
            fail("lengths[" + std::to_string(e) + "]", "must be positive");
        }
    }
    if (document.contains("k")) {
        const json& k = document.at("k");
        if (!k.is_number_integer() || k.get<long>() != lengths.size()) {
            fail("k", "must be an integer equal to the number of lengths");
        }
    }
    const double alpha = number(member(document, "alpha", "problem"), "alpha");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail("alpha", "alpha must lie in (0,1)");
    }
    const double horizon = number(member(document, "T", "problem"), "T");
    if (!(horizon > 0.0)) {
        fail("T", "must be positive");
    }

    StarGraph graph(lengths);
    BasisCache cache(graph);
    const std::vector<int> intervals = GraphFunction::uniform_intervals(graph, intervals_per_edge);
    const json zero = "zero";
    GraphFunction y0 = parse_function(document.contains("y0") ? document.at("y0") : zero, "y0", graph, intervals, cache);
    Source source;
    if (document.contains("f")) {
        const json& f = document.at("f");
        if (f.is_array()) {
            for (std::size_t j = 0; j < f.size(); ++j) {
                add_source_term(source, f[j], "f[" + std::to_string(j) + "]", graph, intervals, cache);
            }
        } else {
            add_source_term(source, f, "f", graph, intervals, cache);
        }
    }
    ProblemSpec problem{graph, alpha, horizon, std::move(y0), std::move(source)};
    try {
        problem.validate();
    } catch (const InvalidArgument& e) {
        fail("problem", e.what());
    }
    return problem;
}

ProblemSpec parse_problem_file(const std::string& path, int intervals_per_edge)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("problem: cannot open '" + path + "'");
    }
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("problem: malformed JSON in '" + path + "': " + e.what());
    }
    return parse_problem(document, intervals_per_edge);
}

nlohmann::json to_json(const EstimateReport& report)
{
    json samples = json::array();
    for (const EstimateSample& s : report.samples) {
        samples.push_back({{"t", s.t}, {"lhs", s.lhs}, {"rhs", s.rhs}});
    }
    auto optional = [](const std::optional<double>& v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); };
    json out = json::object();
    out["estimate_id"] = report.estimate_id;
    out["pass"] = report.pass ? json(*report.pass) : json(nullptr);
    out["fitted_constant"] = optional(report.fitted_constant);
    out["exponent"] = optional(report.exponent);
    if (report.value) {
        out["value"] = optional(report.value);
    }
    out["samples"] = std::move(samples);
    out["note"] = report.note;
    return out;
}

nlohmann::json to_json(const std::vector<EstimateReport>& reports)
{
    json out = json::array();
    for (const EstimateReport& r : reports) {
        out.push_back(to_json(r));
    }
    return out;
}

std::vector<EstimateReport> run_all_checks(const SpectralSolution& solution, const VerifyOptions& options)
{
    std::vector<EstimateReport> reports;
    reports.push_back(check_smoothing_estimate(solution, options));
    if (solution.problem().source.is_zero()) {
        reports.push_back(check_decay_estimate(solution, options));
        reports.push_back(check_decay_estimate_domain(solution, options));
    }
    reports.push_back(check_l2_stability(solution, options));
    reports.push_back(check_energy_caputo(solution, options));
    reports.push_back(check_energy_caputo_domain(solution, options));
    return reports;
}

} // namespace graphfrac
