#pragma once

#include "dircq/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dircq {

/// Finite union of polyhedral cones. No pieces means the empty set, which is
/// kept apart from {0} (one piece equal to the origin).
struct ConeUnion {
    std::size_t dim = 0;
    std::vector<PolyhedralCone> pieces;

    ConeUnion() = default;
    explicit ConeUnion(std::size_t n) : dim(n) {}
    static ConeUnion empty_set(std::size_t n) { return ConeUnion(n); }
    static ConeUnion single(PolyhedralCone c);

    bool is_empty() const { return pieces.empty(); }
    bool contains(const Vec& v) const;
    bool is_origin_only() const;
    std::optional<Vec> nonzero_point() const;
};

/// Drops pieces covered by another piece and puts the rest in canonical H-form and order.
ConeUnion simplify(const ConeUnion& U);
/// A point of P outside every piece of V, or nullopt when P is covered.
std::optional<Vec> uncovered_point(const PolyhedralCone& P, const ConeUnion& V);
bool union_subset(const ConeUnion& U, const ConeUnion& V, Vec* counterexample = nullptr);
bool union_equal(const ConeUnion& U, const ConeUnion& V);
ConeUnion intersect(const ConeUnion& U, const PolyhedralCone& C);
ConeUnion union_of(const ConeUnion& U, const ConeUnion& V);
ConeUnion preimage(const ConeUnion& U, const Mat& M, std::size_t n);
std::string describe(const ConeUnion& U);

/// Finite union of convex polyhedra.
struct PolyUnion {
    std::size_t dim = 0;
    std::vector<HPolyhedron> pieces;

    PolyUnion() = default;
    explicit PolyUnion(std::size_t n) : dim(n) {}
    static PolyUnion from(const ConeUnion& U);
    bool contains(const Vec& y) const;
};

ConeUnion tangent_cone(const PolyUnion& D, const Vec& y);
/// nullopt is the Empty marker (y not in D).
std::optional<PolyhedralCone> regular_normal_cone(const PolyUnion& D, const Vec& y);

/// Cells of the hyperplane arrangement cut out by every row of every piece of a cone union,
/// restricted to the union. Each cell is relatively open; on it the regular normal cone is constant.
struct Arrangement {
    struct Cell {
        std::vector<signed char> sign;  // per hyperplane: -1, 0, +1
        Vec witness;                    // relative-interior point
        PolyhedralCone closure;
        PolyhedralCone dual;  // regular normal cone of the union at the witness
    };
    std::size_t dim = 0;
    ConeUnion T;
    Mat hyperplanes;
    std::vector<Cell> cells;

    /// cell whose relative interior holds w, or cells.size()
    std::size_t locate(const Vec& w) const;
    /// true when cell a lies in the closure of cell b
    bool below(std::size_t a, std::size_t b) const;
    /// limiting normal cone of T at w (Empty when w is not in T)
    ConeUnion limiting_normal_at(const Vec& w) const;
};

Arrangement build_arrangement(const ConeUnion& T);

ConeUnion limiting_normal_cone(const PolyUnion& D, const Vec& y);
ConeUnion directional_limiting_normal_cone(const PolyUnion& D, const Vec& y, const Vec& v);

struct NormalGraphModel {
    struct Cell {
        PolyhedralCone primal;
        PolyhedralCone dual;
        Vec witness;
    };
    std::size_t dim = 0;
    std::vector<Cell> cells;
};

NormalGraphModel normal_graph(const PolyUnion& D, const Vec& y);
NormalGraphModel normal_graph_of(const Arrangement& A);

/// Tangent cone of a single cone K at a point of K.
PolyhedralCone tangent_of_cone(const PolyhedralCone& K, const Vec& p);

ConeUnion graphical_derivative_of_normal_map(const PolyUnion& D, const Vec& y, const Vec& ystar, const Vec& v);
/// Nonzero members only are meaningful: w belongs iff w != 0 lies in one of the pieces.
ConeUnion graphical_subderivative_of_normal_map(const PolyUnion& D, const Vec& y, const Vec& ystar,
                                                const Vec& v);
/// Subderivative of a conic set Q = union of pieces in Q^n x Q^n at the origin in direction v:
/// the union of {w : (0,w) in P} over pieces P whose first-factor projection contains v.
ConeUnion conic_subderivative(const std::vector<PolyhedralCone>& pieces, std::size_t n, const Vec& v);
/// Local conic model of gph N_D at (y, ystar): pieces P_i x T_{K_i}(ystar) in Q^n x Q^n.
std::vector<PolyhedralCone> normal_graph_tangent_pieces(const NormalGraphModel& G, const Vec& ystar);

}  // namespace dircq
