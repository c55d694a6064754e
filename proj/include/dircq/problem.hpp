#pragma once

#include "dircq/oracle.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dircq {

/// Malformed problem file; the message names the offending field.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kProblemVersion = 1;

enum class ProblemKind { Constraint, Patch, Mpec };
const char* kind_name(ProblemKind k);

/// x and, for patch maps, the reference value y (zero when omitted).
struct AnalysisPoint {
    Vec x, y;
};

/// Graph normal cone supplied by the user for a point where it cannot be computed.
struct DeclaredCones {
    AnalysisPoint at;
    ConeUnion graph_normals;
};

struct Problem {
    int version = kProblemVersion;
    std::string name;
    ProblemKind kind = ProblemKind::Constraint;
    std::vector<std::string> xnames;
    std::optional<Polynomial> objective;  // in the x variables

    ConstraintSystem sys;  // constraint block
    PatchMap map;          // patch block, or the assembled mpec graph
    PatchMap S;            // mpec: the solution map
    PolyUnion omega;       // mpec: the feasible set of the first variable

    std::vector<AnalysisPoint> points;
    std::vector<Vec> directions;
    std::optional<Mat> basis;
    Schedule schedule;
    std::vector<DeclaredCones> declared;
    std::vector<Rational> penalty_C;
    long truncation = -1;  // upper index of generated patch families, -1 when there are none

    std::size_t nx() const { return kind == ProblemKind::Constraint ? sys.n() : map.nx; }
    std::size_t ny() const { return kind == ProblemKind::Constraint ? sys.m() : map.ny; }
};

struct LoadOptions {
    std::optional<long> truncate_K;  // overrides the upper index of every patch family
};

Problem load_problem(const json& j, const LoadOptions& opt = {});
Problem load_problem_file(const std::string& path, const LoadOptions& opt = {});
json read_json_file(const std::string& path);

/// "ratio-to-zero", "ratio-to-inf" or "power:<gamma>".
Schedule parse_schedule(const std::string& text, Schedule base = {});
json schedule_json(const Schedule& s);

/// Generators and canonical H-form.
json cone_json(const PolyhedralCone& C);
json cone_json(const ConeUnion& U);
/// Pieces given as {"A": rows, "E": rows} (right-hand sides zero).
ConeUnion cone_union_from_json(const json& j, std::size_t dim, const std::string& where);

Vec vec_from_json(const json& j, std::size_t dim, const std::string& where);
Mat mat_from_json(const json& j, std::size_t cols, const std::string& where);

}  // namespace dircq
