#ifndef GRAPHFRAC_IO_HPP
#define GRAPHFRAC_IO_HPP

#include "graphfrac/fractional_solver.hpp"
#include "graphfrac/verification.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace graphfrac {

/// Problem-file layout (JSON):
///   schema_version  optional, must be 1 when present
///   k               optional, must equal the number of lengths
///   lengths         edge lengths, at least two, all positive
///   alpha           in (0,1)
///   T               horizon > 0
///   y0              function (default "zero")
///   f               source (default "zero")
///
/// Functions: "zero" | "hat" | "mode:n" | {"type": "modes", "coefficients": [c_1, ...]}
///   | {"type": "power_modes", "count": N, "exponent": p, "scale": s}  (a_n = s n^p)
///   | {"type": "polynomial", "coefficients": [[c_0, c_1, ...] per edge]}  (powers of l_i - x)
///   | {"type": "samples", "values": [[...] per edge]}
/// Sources: "zero" | "mode:n" (constant in time) | {"profile": P, "shape": function} | [terms]
///   | {"type": "samples", "times": [...], "slices": [function, ...]}
/// Profiles: {"type": "constant", "value"} | {"type": "polynomial", "coefficients"}
///   | {"type": "power", "coefficient", "exponent"} | {"type": "sine", "amplitude", "frequency", "phase"}
///   | {"type": "exponential", "amplitude", "rate"} | {"type": "samples", "times", "values"}
///
/// Functions are sampled on `intervals` per edge; closed forms are kept.
/// Throws InvalidArgument with a field-level message on any violation.
ProblemSpec parse_problem(const nlohmann::json& document, int intervals = 64);
ProblemSpec parse_problem_file(const std::string& path, int intervals = 64);

nlohmann::json to_json(const EstimateReport& report);
nlohmann::json to_json(const std::vector<EstimateReport>& reports);

/// Every estimate that applies to the problem: smoothing, L2 stability and both
/// energy checks always; the decay checks only when f = 0.
std::vector<EstimateReport> run_all_checks(const SpectralSolution& solution, const VerifyOptions& options = {});

} // namespace graphfrac

#endif // GRAPHFRAC_IO_HPP
