#pragma once

#include "dircq/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dircq {

inline constexpr const char* kToolName = "dircq";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportVersion = 1;

/// Flags shared by all commands. Everything a command reads is echoed into the report,
/// so `verify` can rerun it from the report alone.
struct RunConfig {
    std::optional<Vec> point;       // x; overrides the points of the file
    std::optional<Vec> point_y;     // y for patch maps
    std::vector<Vec> directions;    // overrides the directions of the file
    std::vector<std::string> checks = {"ALL"};
    LambdaMode mode = LambdaMode::Asym;
    std::string targets;            // "objective" or "full"; empty picks objective when one is given
    std::string basis = "canonical";  // "canonical", "file" (the problem's basis) or a JSON path
    std::optional<Mat> basis_matrix;  // resolved basis, echoed into the report
    std::optional<std::string> schedule;
    std::optional<int> kmax;
    std::optional<long> truncate_K;

    // oracle probes
    std::string probe = "asym";     // asym, normality, coderivative, sample, penalty
    std::string kind = "pseudo";    // normality probe
    std::optional<Vec> lambda, v, ystar;
    bool gfrerer = false;
    std::vector<Rational> C;

    json to_json() const;
    static RunConfig from_json(const json& j);
};

/// Runs one command ("cones", "cq", "mstat", "oracle") on a problem file's JSON contents.
/// Throws SchemaError / GeometryError / RegularityError on bad input.
json run_command(const std::string& command, const json& problem_source, RunConfig cfg);

/// 0 every counted row HOLDS, 1 some FAILS, 2 some UNDECIDED (and none FAILS).
int report_exit_code(const json& report);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> failures;
};

/// Reruns the command recorded in the report, re-checks every certificate exactly and
/// compares each row with the rerun. Nothing in the report is trusted.
VerifyResult verify_report(const json& report);

std::string render_text(const json& report);

}  // namespace dircq
