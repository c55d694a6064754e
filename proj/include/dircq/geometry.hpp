#pragma once

#include "dircq/rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dircq {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {x in Q^dim : A x <= b, E x = d}
struct HPolyhedron {
    std::size_t dim = 0;
    Mat A;
    Vec b;
    Mat E;
    Vec d;

    HPolyhedron() = default;
    explicit HPolyhedron(std::size_t n) : dim(n) {}

    void add_ineq(Vec a, Rational rhs);
    void add_eq(Vec a, Rational rhs);
    bool contains(const Vec& x) const;
    std::size_t rows() const { return A.size() + E.size(); }
    void validate() const;
};

/// A polyhedron with zero right-hand sides.
struct PolyhedralCone : HPolyhedron {
    PolyhedralCone() = default;
    explicit PolyhedralCone(std::size_t n) : HPolyhedron(n) {}
    static PolyhedralCone from(const HPolyhedron& p);
    static PolyhedralCone whole(std::size_t n) { return PolyhedralCone(n); }
    static PolyhedralCone origin(std::size_t n);
    void add_ineq(Vec a) { HPolyhedron::add_ineq(std::move(a), 0); }
    void add_eq(Vec a) { HPolyhedron::add_eq(std::move(a), 0); }
};

struct LpResult {
    enum class Status { Feasible, Infeasible, Unbounded };
    Status status = Status::Infeasible;
    Vec x;              // witness / optimizer
    Rational value = 0;  // objective at x when optimal
    Vec farkas_ineq;    // y >= 0
    Vec farkas_eq;      // z free; A^T y + E^T z = 0, b.y + d.z = -1
    bool feasible() const { return status != Status::Infeasible; }
};

LpResult lp_feasibility(const HPolyhedron& P);
/// maximize c.x over P; Unbounded when no finite optimum exists.
LpResult lp_maximize(const HPolyhedron& P, const Vec& c);
/// Exact check of a Farkas certificate against P.
bool check_farkas(const HPolyhedron& P, const Vec& y, const Vec& z);

/// Cone {x : A x <= 0, E x = 0, S x < 0}; strict rows become S x <= -1 by homogeneity.
struct StrictCone {
    std::size_t dim = 0;
    Mat A, E, S;
    explicit StrictCone(std::size_t n = 0) : dim(n) {}
    HPolyhedron relaxed() const;  // strict rows mapped to <= -1
};

struct Generators {
    Mat rays;       // primitive integer, orthogonal to lineality, sorted
    Mat lineality;  // rref basis, primitive_signed
};

Generators enumerate_generators(const PolyhedralCone& C);

struct Face {
    PolyhedralCone face;
    Vec relint_witness;
    std::vector<std::size_t> active;  // indices into C.A that are tight on the face
    std::size_t dim = 0;
};

std::vector<Face> enumerate_faces(const PolyhedralCone& C);
PolyhedralCone polar_cone(const PolyhedralCone& C);
PolyhedralCone cone_from_generators(const Generators& g, std::size_t dim);
HPolyhedron project_polyhedron(const HPolyhedron& P, const std::vector<std::size_t>& coords);

/// Rows of P.A that are tight everywhere on P (P must be nonempty).
std::vector<std::size_t> implicit_equalities(const HPolyhedron& P);
/// Point in the relative interior, or nullopt if P is empty.
std::optional<Vec> relint_point(const HPolyhedron& P);
std::size_t cone_dimension(const PolyhedralCone& C);
bool cone_subset(const PolyhedralCone& a, const PolyhedralCone& b);
bool cone_equal(const PolyhedralCone& a, const PolyhedralCone& b);
PolyhedralCone intersect(const PolyhedralCone& a, const PolyhedralCone& b);
bool is_origin(const PolyhedralCone& C);
/// Nonzero point of C, if any.
std::optional<Vec> nonzero_point(const PolyhedralCone& C);
/// Canonical H-form: lineality equations plus facet rows, primitive and sorted.
PolyhedralCone canonical(const PolyhedralCone& C);
/// Image {M x : x in P} for a cone P in Q^n, M is k x n.
PolyhedralCone linear_image(const PolyhedralCone& P, const Mat& M, std::size_t k);
/// Preimage {x : M x in P}, M is P.dim x n.
PolyhedralCone preimage(const PolyhedralCone& P, const Mat& M, std::size_t n);

std::string describe(const PolyhedralCone& C);

}  // namespace dircq
