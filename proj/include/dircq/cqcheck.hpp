#pragma once

#include "dircq/varcalc.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dircq {

using json = nlohmann::json;

enum class Status { Holds, Fails, Undecided, HoldsByOracleExhaustion };
const char* status_name(Status s);
Status parse_status(const std::string& s);

/// One polyhedral piece of a condition system, with strict rows already mapped to <= -1.
struct Subsystem {
    std::string label;
    HPolyhedron P;
};

/// A finite union of subsystems; the question is always whether one of them is feasible.
struct Family {
    std::string name;
    std::vector<Subsystem> systems;
};

/// Solves the subsystems in order and stops at the first feasible one.
/// The certificate holds either that witness or one Farkas vector per subsystem.
json solve_family(const Family& f);
/// Exact re-check of a certificate produced by solve_family against a regenerated family.
bool check_family(const Family& f, const json& cert, std::string& why);
bool family_feasible(const json& cert);

struct Condition {
    std::string name;
    Status status = Status::Undecided;
    bool applicable = true;
    std::string detail;
    json certificate;
};

struct Verdict {
    std::string check;
    Status status = Status::Undecided;
    std::vector<Condition> conditions;
    std::string note;
    json inputs;
};

json to_json(const Verdict& v);

enum class LambdaMode { Asym, Strong };

struct CheckOptions {
    LambdaMode mode = LambdaMode::Asym;
    /// keep only multipliers x* with <x*,u> >= 0
    bool restrict_nonneg = false;
    /// nullopt: the whole range of x* (inclusion of cone unions)
    std::optional<std::vector<Vec>> targets;
};

Verdict mordukhovich(const ConstraintSystem& sys, const Vec& xbar);
Verdict foscms(const ConstraintSystem& sys, const Vec& xbar, const Vec& u);
Verdict soscms(const ConstraintSystem& sys, const Vec& xbar, const Vec& u);
Verdict check_thm_nonpolyhedral(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                const CheckOptions& opt = {});
Verdict check_thm_polyhedral_I(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                               const CheckOptions& opt = {});
Verdict check_thm_polyhedral_II(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                const CheckOptions& opt = {});
/// lambda in N_D(g(xbar)) with grad phi + grad g^T lambda = 0
Verdict mstationarity(const ConstraintSystem& sys, const Polynomial& phi, const Vec& xbar);

/// Nonzero y* in N_D(g(xbar); grad g u) with grad g^T y* = 0 (u = 0: non-directional).
ConeUnion kernel_candidates(const ConstraintSystem& sys, const Vec& xbar, const Vec& u);

/// Regenerates every condition system from the inputs recorded in the verdict and checks
/// all certificates exactly. phi is needed for M-stationarity verdicts only.
bool verify_verdict(const ConstraintSystem& sys, const json& verdict, std::string& why,
                    const Polynomial* phi = nullptr);

}  // namespace dircq
