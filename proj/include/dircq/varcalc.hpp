#pragma once

#include "dircq/polymap.hpp"
#include "dircq/polyunion.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dircq {

/// Phi(x) = g(x) - D with the reference value y = 0.
struct ConstraintSystem {
    PolyMap g;
    PolyUnion D;
    Vec xbar;

    std::size_t n() const { return g.n(); }
    std::size_t m() const { return g.m(); }
    /// g(x) - y in D
    bool in_graph(const Vec& x, const Vec& y) const;
};

/// nullopt is Empty.
std::optional<Vec> regular_coderivative(const ConstraintSystem& sys, const Vec& x, const Vec& y, const Vec& ystar);
std::optional<Vec> directional_limiting_coderivative(const ConstraintSystem& sys, const Vec& x, const Vec& y,
                                                     const Vec& u, const Vec& v, const Vec& ystar);

/// The set {offset - t : t in cones}.
struct ShiftedCones {
    Vec offset;
    ConeUnion cones;
    bool contains(const Vec& v) const { return cones.contains(sub(offset, v)); }
};

/// D Phi(x,y)(u) = grad g(x) u - T_D(g(x) - y); nullopt when (x,y) is off the graph.
std::optional<ShiftedCones> graphical_derivative(const ConstraintSystem& sys, const Vec& x, const Vec& y,
                                                 const Vec& u);

/// {u : grad g u in T_D(g(xbar)), grad phi . u <= 0}, one piece per tangent piece.
ConeUnion critical_cells(const ConstraintSystem& sys, const Polynomial& phi, const Vec& xbar);

/// Normal cone of D at g(xbar) pulled back by the adjoint: the pieces of N_D(g(xbar)).
ConeUnion normal_cone_at(const ConstraintSystem& sys, const Vec& x);

class RegularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One closed piece {p : eq(p) = 0, ineq(p) <= 0} of a graph in Q^nx x Q^ny.
struct GraphPatch {
    std::vector<Polynomial> eq;
    std::vector<Polynomial> ineq;

    bool contains(const Vec& p) const;
    bool is_linear() const;
};

struct PatchMap {
    std::size_t nx = 0, ny = 0;
    std::vector<std::string> names;  // nx + ny variable names
    std::vector<GraphPatch> patches;

    std::size_t dim() const { return nx + ny; }
    bool contains(const Vec& p) const;
    std::vector<std::size_t> patches_at(const Vec& p) const;
    bool is_linear() const;
    /// Only for linear patch maps.
    PolyUnion as_polyunion() const;
};

/// Gradients of the equalities and of the active inequalities of one patch at p.
struct ActiveGradients {
    Mat eq;
    Mat ineq;
    std::vector<std::size_t> ineq_index;
};

/// Throws RegularityError when the active gradients are linearly dependent.
ActiveGradients active_gradients(const GraphPatch& P, const Vec& p);
/// {d : eq grads . d = 0, active ineq grads . d <= 0}
PolyhedralCone linearized_tangent(const ActiveGradients& G, std::size_t dim);

ConeUnion patch_tangent_cone(const PatchMap& M, const Vec& p);
/// Intersection over patches through p of the polars of their tangent cones; nullopt when p is off the graph.
std::optional<PolyhedralCone> patch_regular_normal_cone(const PatchMap& M, const Vec& p);
/// Union over patches through p, with w tangent to the patch, of the normal cone of the patch tangent cone at w.
/// Contains the limiting normal cone of the graph at p in direction w (w = 0: non-directional).
ConeUnion patch_normal_upper(const PatchMap& M, const Vec& p, const Vec& w);
/// {x* : (x*, -l) in the cone for some l}
ConeUnion coderivative_image(const ConeUnion& graph_normals, std::size_t nx, std::size_t ny);
/// {l : (0, -l) in the cone}
ConeUnion coderivative_kernel(const ConeUnion& graph_normals, std::size_t nx, std::size_t ny);

/// Graph of x -> (Omega - x1, S(x1) - x2) in variables (x1, x2, y1, y2).
PatchMap mpec_assemble(const PolyUnion& Omega, const PatchMap& S);

}  // namespace dircq
