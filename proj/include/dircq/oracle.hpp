#pragma once

#include "dircq/cqcheck.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dircq {

enum class Coupling { RatioToZero, RatioToInf, Power };

/// Decreasing scales t_k = 2^-k, k = 1..kmax, and the secondary scale tau_k.
struct Schedule {
    int kmax = 60;
    Coupling coupling = Coupling::RatioToZero;
    double gamma = 2;
    double tol = 1e-10;        // graph membership
    double residual_tol = 1e-8;
    int window = 5;            // slope test over the last points
    double slope = -0.5;       // log2 decrease per step required when not below residual_tol

    Rational t(int k) const;
    /// tau_k: t^gamma (Power), t^2 (RatioToZero), t^(1/2) rounded to a dyadic (RatioToInf)
    Rational tau(int k) const;
};

/// Residual series r_k; converged when the tail is below residual_tol or decays with the required slope.
struct Residual {
    std::string name;
    std::vector<double> values;
    bool converged(const Schedule& s) const;
};

struct WitnessRecord {
    int k = 0;
    Vec x, y, xstar, lambda;
    bool exact = true;  // point lies exactly on the graph (rational data)
};

struct WitnessSequence {
    std::string kind;
    bool found = false;
    std::vector<WitnessRecord> records;
    std::vector<Residual> residuals;
    Vec limit_xstar, limit_ystar;
    std::string conclusion;
    json trace;

    json to_json() const;
};

/// Exact Euclidean projection onto a polyhedron by active-set enumeration (small row counts).
Vec project_onto(const HPolyhedron& P, const Vec& p);
/// Nearest point of a union.
Vec project_onto(const PolyUnion& D, const Vec& p);

/// Continued-fraction snap of a double to a rational with denominator at most maxden.
Rational rationalize(double v, double tol = 1e-13, long long maxden = 1LL << 62);

struct NormalSample {
    std::vector<Vec> normals;  // unit-scaled generators of the regular normal cones met along the schedule
    ConeUnion exact;           // exact directional limiting normal cone
    bool all_inside = true;    // every sampled normal lies in the exact cone
    double max_gap = 0;        // worst angle from an exact extreme ray to the nearest sample
    std::string diagnostic;
};

NormalSample sample_directional_normals(const PolyUnion& D, const Vec& base, const Vec& direction,
                                        const Schedule& s = {});

/// Graph points (x, y) with x fixed, found by Newton steps onto each patch and active set.
struct GraphPoint {
    Vec p;
    std::size_t patch = 0;
    std::vector<std::size_t> active;
    bool exact = false;
};
std::vector<GraphPoint> graph_points_at(const PatchMap& M, const Vec& x, const std::vector<Vec>& seeds,
                                        double tol = 1e-10);
/// Regular normal cone at a graph point; uses exact gradients when the point is exact.
std::optional<PolyhedralCone> normal_cone_at(const PatchMap& M, const GraphPoint& gp);

/// Checks the sequences of an asymptotic-regularity violation against exact normal cones
/// and evaluates every convergence residual.
WitnessSequence replay_asym_reg_witness(const PatchMap& M, const Vec& xbar, const Vec& ybar, const Vec& u,
                                        const std::vector<WitnessRecord>& records, const Schedule& s = {});

/// Searches graph points from direction u with y_k != ybar, builds (x_k*, lambda_k) with ||x_k*|| = 1
/// and lambda_k aligned with y_k - ybar, and accepts a sequence whose residuals converge and whose
/// limit x* lies outside the directional coderivative image.
WitnessSequence search_asym_reg_violation(const PatchMap& M, const Vec& xbar, const Vec& ybar, const Vec& u,
                                          const Schedule& s = {});

enum class NormalityKind { Pseudo, Quasi };

/// Constraint maps: x_k = xbar + t_k u, z_k the projection of g(x_k) onto D, lambda_k the projection
/// of lambda onto the regular normal cone at z_k, and the sign conditions on y_k = g(x_k) - z_k.
WitnessSequence search_normality_violation(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                           const Vec& lambda, NormalityKind kind, const Mat& basis,
                                           const Schedule& s = {});

/// Patch maps: for graph points meeting the sign condition, rho_k is the largest s for which
/// (eta, -(s lambda + xi)) is a regular normal with |eta|, |xi| <= eps_k. A trace with rho_k -> 0
/// shows no multiplier sequence can approach lambda along the searched points.
WitnessSequence search_normality_violation(const PatchMap& M, const Vec& xbar, const Vec& u, const Vec& lambda,
                                           NormalityKind kind, const Mat& basis, const Schedule& s = {});

/// Rows of basis form an orthonormal basis (exact check).
bool is_orthonormal(const Mat& basis, std::size_t m);
Mat canonical_basis(std::size_t m);

Verdict pseudo_quasi_verdict(const ConstraintSystem& sys, const Vec& xbar, const Vec& u, NormalityKind kind,
                             const Mat& basis, const Schedule& s = {});
Verdict pseudo_quasi_verdict(const PatchMap& M, const Vec& xbar, const Vec& u, NormalityKind kind,
                             const Mat& basis, const Schedule& s = {});

struct CoderivativeEvidence {
    std::string variant;
    std::vector<WitnessRecord> records;
    Vec limit;
    bool settled = false;
    json to_json() const;
};

/// Follows graph points (xbar + t_k u, ybar + tau_k v_k) and the coderivative values the chosen
/// scaling produces for y*. Power(gamma): pseudo-coderivative of order gamma; RatioToZero:
/// super-coderivative; gfrerer = true uses offsets ybar + t_k v.
CoderivativeEvidence probe_pseudo_or_super_coderivative(const PatchMap& M, const Vec& xbar, const Vec& ybar,
                                                        const Vec& u, const Vec& v, const Vec& ystar,
                                                        const Schedule& s, bool gfrerer = false);

struct PenaltyRow {
    Rational C;
    long first_k = -1;  // first k with phi(1/k) + C dist(ybar, Phi(1/k)) < phi(xbar)
    Rational value;     // the penalized value at first_k
};

/// x_k = xbar + (1/k) u; distances are exact when the patches are linear in y once x is fixed.
std::vector<PenaltyRow> penalty_failure_demo(const PatchMap& M, const Polynomial& phi, const Vec& xbar,
                                             const Vec& ybar, const Vec& u, const std::vector<Rational>& Cs,
                                             long kmax = 100000);
/// Exact distance from ybar to Phi(x) (l-infinity; equal to Euclidean for one output).
std::optional<Rational> distance_to_image(const PatchMap& M, const Vec& x, const Vec& ybar);

}  // namespace dircq
