#include "graphfrac/errors.hpp"
#include "graphfrac/io.hpp"
#include "graphfrac/spectral.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace graphfrac;
using nlohmann::json;

namespace {

json minimal()
{
    return json::parse(R"({"k": 3, "lengths": [1, 1, 1], "alpha": 0.5, "T": 1, "y0": "mode:1", "f": "zero"})");
}

std::string rejection(const json& document)
{
    try {
        (void)parse_problem(document);
    } catch (const InvalidArgument& e) {
        return e.what();
    }
    return {};
}

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

CliRun cli(const std::string& args)
{
    // Per-test names: ctest may run these processes concurrently.
    const std::string tag = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    const auto dir = std::filesystem::temp_directory_path();
    const auto out = dir / ("graphfrac_test_io_" + tag + ".out");
    const auto err = dir / ("graphfrac_test_io_" + tag + ".err");
    const std::string command =
        std::string("\"") + GRAPHFRAC_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(command.c_str());
    CliRun r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    return r;
}

std::string problem(const std::string& name)
{
    return std::string("\"") + GRAPHFRAC_PROBLEMS + "/" + name + ".json\"";
}

std::filesystem::path scratch_file(const std::string& name, const std::string& contents)
{
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path, std::ios::binary) << contents;
    return path;
}

} // namespace

TEST(ParseProblem, MinimalDocumentIsValid)
{
    const ProblemSpec p = parse_problem(minimal());
    EXPECT_EQ(p.graph.edge_count(), 3U);
    EXPECT_EQ(p.alpha, 0.5);
    EXPECT_EQ(p.horizon, 1.0);
    EXPECT_TRUE(p.source.is_zero());
    // Psi_1 = sqrt(2/3) cos(pi x / 2) on every edge.
    for (std::size_t e = 0; e < 3; ++e) {
        EXPECT_NEAR(p.y0.evaluate(e, 0.0), std::sqrt(2.0 / 3.0), 1e-12);
        EXPECT_NEAR(p.y0.evaluate(e, 0.4), std::sqrt(2.0 / 3.0) * std::cos(0.2 * std::numbers::pi), 1e-12);
    }
    EXPECT_NEAR(l2_norm(p.y0), 1.0, 1e-12);
}

TEST(ParseProblem, AlphaMustBeStrictlyInsideUnitInterval)
{
    for (double alpha : {1.0, 0.0, -0.3, 1.5}) {
        json d = minimal();
        d["alpha"] = alpha;
        EXPECT_NE(rejection(d).find("alpha must lie in (0,1)"), std::string::npos) << alpha;
    }
}

TEST(ParseProblem, RejectsInvalidGeometryAndSchema)
{
    json d = minimal();
    d["lengths"] = {1, -2};
    d.erase("k");
    EXPECT_NE(rejection(d).find("lengths"), std::string::npos);

    d = minimal();
    d["k"] = 4;
    EXPECT_NE(rejection(d).find("k"), std::string::npos);

    d = minimal();
    d["schema_version"] = 2;
    EXPECT_NE(rejection(d).find("schema_version"), std::string::npos);

    d = minimal();
    d.erase("T");
    EXPECT_NE(rejection(d).find("T"), std::string::npos);

    d = minimal();
    d["y0"] = "gaussian";
    EXPECT_FALSE(rejection(d).empty());

    d = minimal();
    d["f"] = {{"profile", {{"type", "sine"}, {"amplitude", 1}, {"frequency", 2}, {"phase", 0}}}, {"shape", "mode:0"}};
    EXPECT_FALSE(rejection(d).empty());
}

TEST(ParseProblem, RejectsDirichletViolation)
{
    json d = minimal();
    d["lengths"] = {1, 1};
    d["k"] = 2;
    d["y0"] = {{"type", "samples"}, {"values", {{1.0, 0.5, 0.2}, {1.0, 0.5, 0.0}}}};
    EXPECT_FALSE(rejection(d).empty());
    d["y0"]["values"][0][2] = 0.0;
    EXPECT_NO_THROW((void)parse_problem(d));
}

TEST(ParseProblem, NamedFunctionsResolve)
{
    json d = minimal();
    d["y0"] = "hat";
    d["f"] = {{"profile", {{"type", "polynomial"}, {"coefficients", {0, 1}}}}, {"shape", "mode:2"}};
    const ProblemSpec p = parse_problem(d);
    EXPECT_NEAR(p.y0.evaluate(1, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(p.y0.evaluate(1, 0.25), 0.75, 1e-15);
    EXPECT_FALSE(p.source.is_zero());
    EXPECT_FALSE(p.source.is_time_constant());

    d["y0"] = {{"type", "polynomial"}, {"coefficients", {{0, 2}, {0, 2}, {0, 2}}}};
    EXPECT_NEAR(parse_problem(d).y0.evaluate(2, 0.25), 1.5, 1e-15);
}

TEST(ParseProblem, FileVariantReportsMissingFile)
{
    EXPECT_THROW((void)parse_problem_file("/nonexistent/problem.json"), InvalidArgument);
    const auto path = scratch_file("graphfrac_test_io_problem.json", minimal().dump());
    EXPECT_EQ(parse_problem_file(path.string()).alpha, 0.5);
}

TEST(Reports, JsonIsDeterministic)
{
    const ProblemSpec p = parse_problem_file(std::string(GRAPHFRAC_PROBLEMS) + "/standard.json");
    auto basis = std::make_shared<const SpectralBasis>(SpectralBasis::first(p.graph, 32));
    const SpectralSolution s(p, basis);
    const std::string first = to_json(run_all_checks(s)).dump(2);
    const std::string second = to_json(run_all_checks(s)).dump(2);
    EXPECT_EQ(first, second);
    const json parsed = json::parse(first);
    ASSERT_TRUE(parsed.is_array());
    for (const json& r : parsed) {
        EXPECT_TRUE(r.contains("estimate_id"));
        EXPECT_TRUE(r.contains("pass"));
        EXPECT_TRUE(r.contains("samples"));
    }
}

TEST(Reports, DecayChecksOnlyWithoutSource)
{
    auto ids = [](const std::string& name) {
        const ProblemSpec p = parse_problem_file(std::string(GRAPHFRAC_PROBLEMS) + "/" + name + ".json");
        auto basis = std::make_shared<const SpectralBasis>(SpectralBasis::first(p.graph, 16));
        std::string joined;
        for (const EstimateReport& r : run_all_checks(SpectralSolution(p, basis))) {
            joined += r.estimate_id + ";";
        }
        return joined;
    };
    EXPECT_NE(ids("standard").find("decay"), std::string::npos);
    EXPECT_EQ(ids("source").find("decay"), std::string::npos);
    EXPECT_NE(ids("source").find("l2_stability"), std::string::npos);
}

TEST(Cli, VerifyStandardProblemPassesDeterministically)
{
    const CliRun a = cli("verify --problem " + problem("standard"));
    const CliRun b = cli("verify --problem " + problem("standard"));
    EXPECT_EQ(a.exit_code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    for (const json& r : json::parse(a.out)) {
        EXPECT_NE(r["pass"], json(false)) << r["estimate_id"];
    }
}

TEST(Cli, ForcedCompareFailureExitsOne)
{
    const CliRun r = cli("compare --problem " + problem("standard") + " --grid 4 --timesteps 4 --tol 1e-6");
    EXPECT_EQ(r.exit_code, 1);
    const json report = json::parse(r.out);
    ASSERT_EQ(report.size(), 1U);
    EXPECT_EQ(report[0]["estimate_id"], "cross_validate");
    EXPECT_EQ(report[0]["pass"], json(false));
}

TEST(Cli, InvalidInputExitsTwoWithErrorJson)
{
    json d = minimal();
    d["alpha"] = 1.0;
    const auto path = scratch_file("graphfrac_test_io_bad.json", d.dump());
    const CliRun r = cli("verify --problem \"" + path.string() + "\"");
    EXPECT_EQ(r.exit_code, 2);
    const json error = json::parse(r.err);
    EXPECT_EQ(error["exit_code"], 2);
    EXPECT_EQ(error["error"]["kind"], "invalid_input");
    EXPECT_NE(error["error"]["message"].get<std::string>().find("alpha must lie in (0,1)"), std::string::npos);

    const CliRun usage = cli("solve --modes -3");
    EXPECT_EQ(usage.exit_code, 2);
    EXPECT_EQ(json::parse(usage.err)["error"]["kind"], "usage");
}

TEST(Cli, EigenReportMatchesAnalyticList)
{
    const CliRun r = cli("eigen --lengths 1 1 1 --modes 6");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,mu,kind,multiplicity_group,A_1,A_2,A_3");
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double expected[] = {pi2 / 4, pi2, pi2, 9 * pi2 / 4, 4 * pi2, 4 * pi2};
    int n = 0;
    while (std::getline(in, line)) {
        ASSERT_LT(n, 6);
        std::istringstream fields(line);
        std::string index;
        std::string mu;
        std::getline(fields, index, ',');
        std::getline(fields, mu, ',');
        EXPECT_EQ(std::stoi(index), n + 1);
        EXPECT_NEAR(std::stod(mu), expected[n], 1e-10 * expected[n]);
        ++n;
    }
    EXPECT_EQ(n, 6);
}

TEST(Cli, SolveWritesRoundTrippableArtifacts)
{
    const auto dir = std::filesystem::temp_directory_path() / "graphfrac_test_io_solve";
    std::filesystem::remove_all(dir);
    const CliRun r = cli("solve --problem " + problem("standard") + " --modes 16 --grid 8 --timesteps 4 --out \"" +
                      dir.string() + "\"");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    for (const char* name : {"solution.csv", "modes.csv", "tail.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    const std::string text = slurp(dir / "solution.csv");
    std::istringstream in(text);
    const SolutionField field = read_solution_csv(in, StarGraph{1.0, 1.0, 1.0});
    std::ostringstream again;
    write_solution_csv(again, field);
    EXPECT_EQ(again.str(), text);
    EXPECT_EQ(slurp(dir / "modes.csv").rfind("t,n,T_n\n", 0), 0U);
}

TEST(Cli, MlTableTabulatesExponentialAtAlphaOne)
{
    const CliRun r = cli("ml-table --alpha 1 --beta 1 --zmin -5 --zmax 0 --points 11");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "z,value");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double z = std::stod(line.substr(0, comma));
        EXPECT_NEAR(std::stod(line.substr(comma + 1)), std::exp(z), 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 11);
}
