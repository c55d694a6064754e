#include "dircq/varcalc.hpp"

namespace dircq {

bool ConstraintSystem::in_graph(const Vec& x, const Vec& y) const {
    return D.contains(sub(g.eval(x), y));
}

std::optional<Vec> regular_coderivative(const ConstraintSystem& sys, const Vec& x, const Vec& y,
                                        const Vec& ystar) {
    if (!sys.in_graph(x, y)) return std::nullopt;
    auto N = regular_normal_cone(sys.D, sub(sys.g.eval(x), y));
    if (!N || !N->contains(ystar)) return std::nullopt;
    return mat_t_vec(jacobian(sys.g, x), ystar, sys.n());
}

std::optional<Vec> directional_limiting_coderivative(const ConstraintSystem& sys, const Vec& x, const Vec& y,
                                                     const Vec& u, const Vec& v, const Vec& ystar) {
    if (!sys.in_graph(x, y)) return std::nullopt;
    Mat J = jacobian(sys.g, x);
    auto N = directional_limiting_normal_cone(sys.D, sub(sys.g.eval(x), y), sub(mat_vec(J, u), v));
    if (!N.contains(ystar)) return std::nullopt;
    return mat_t_vec(J, ystar, sys.n());
}

std::optional<ShiftedCones> graphical_derivative(const ConstraintSystem& sys, const Vec& x, const Vec& y,
                                                 const Vec& u) {
    if (!sys.in_graph(x, y)) return std::nullopt;
    ShiftedCones r;
    r.offset = mat_vec(jacobian(sys.g, x), u);
    r.cones = tangent_cone(sys.D, sub(sys.g.eval(x), y));
    return r;
}

ConeUnion critical_cells(const ConstraintSystem& sys, const Polynomial& phi, const Vec& xbar) {
    std::size_t n = sys.n();
    if (!sys.in_graph(xbar, zeros(sys.m()))) return ConeUnion::empty_set(n);
    Mat J = jacobian(sys.g, xbar);
    Vec grad(n);
    for (std::size_t i = 0; i < n; ++i) grad[i] = phi.derivative(i).eval(xbar);
    ConeUnion pre = preimage(tangent_cone(sys.D, sys.g.eval(xbar)), J, n);
    PolyhedralCone half(n);
    if (!is_zero(grad)) half.add_ineq(grad);
    return simplify(intersect(pre, half));
}

ConeUnion normal_cone_at(const ConstraintSystem& sys, const Vec& x) {
    return limiting_normal_cone(sys.D, sys.g.eval(x));
}

bool GraphPatch::contains(const Vec& p) const {
    for (auto& e : eq)
        if (e.eval(p) != 0) return false;
    for (auto& q : ineq)
        if (q.eval(p) > 0) return false;
    return true;
}

bool GraphPatch::is_linear() const {
    for (auto& e : eq)
        if (e.degree() > 1) return false;
    for (auto& q : ineq)
        if (q.degree() > 1) return false;
    return true;
}

bool PatchMap::contains(const Vec& p) const {
    for (auto& P : patches)
        if (P.contains(p)) return true;
    return false;
}

std::vector<std::size_t> PatchMap::patches_at(const Vec& p) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < patches.size(); ++i)
        if (patches[i].contains(p)) out.push_back(i);
    return out;
}

bool PatchMap::is_linear() const {
    for (auto& P : patches)
        if (!P.is_linear()) return false;
    return true;
}

namespace {

Vec gradient(const Polynomial& f, const Vec& p) {
    Vec g(f.nvars());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = f.derivative(i).eval(p);
    return g;
}

// a.p + c with a the gradient and c the constant term of a degree-1 polynomial
void linear_row(const Polynomial& f, std::size_t dim, Vec& a, Rational& c) {
    Vec z = zeros(dim);
    a = gradient(f, z);
    c = f.eval(z);
}

}  // namespace

PolyUnion PatchMap::as_polyunion() const {
    if (!is_linear()) throw GeometryError("patch map is not linear");
    PolyUnion U(dim());
    for (auto& P : patches) {
        HPolyhedron H(dim());
        Vec a;
        Rational c;
        for (auto& e : P.eq) {
            linear_row(e, dim(), a, c);
            H.add_eq(a, -c);
        }
        for (auto& q : P.ineq) {
            linear_row(q, dim(), a, c);
            H.add_ineq(a, -c);
        }
        U.pieces.push_back(std::move(H));
    }
    return U;
}

ActiveGradients active_gradients(const GraphPatch& P, const Vec& p) {
    ActiveGradients G;
    for (auto& e : P.eq) G.eq.push_back(gradient(e, p));
    for (std::size_t j = 0; j < P.ineq.size(); ++j) {
        if (P.ineq[j].eval(p) != 0) continue;
        G.ineq.push_back(gradient(P.ineq[j], p));
        G.ineq_index.push_back(j);
    }
    Mat all = G.eq;
    all.insert(all.end(), G.ineq.begin(), G.ineq.end());
    if (rank(all, p.size()) != all.size())
        throw RegularityError("active gradients are linearly dependent; use the oracle");
    return G;
}

PolyhedralCone linearized_tangent(const ActiveGradients& G, std::size_t dim) {
    PolyhedralCone T(dim);
    for (auto& e : G.eq) T.add_eq(e);
    for (auto& a : G.ineq) T.add_ineq(a);
    return T;
}

ConeUnion patch_tangent_cone(const PatchMap& M, const Vec& p) {
    ConeUnion T(M.dim());
    for (auto i : M.patches_at(p)) T.pieces.push_back(linearized_tangent(active_gradients(M.patches[i], p), M.dim()));
    return simplify(T);
}

std::optional<PolyhedralCone> patch_regular_normal_cone(const PatchMap& M, const Vec& p) {
    auto at = M.patches_at(p);
    if (at.empty()) return std::nullopt;
    PolyhedralCone N = PolyhedralCone::whole(M.dim());
    for (auto i : at) N = intersect(N, polar_cone(linearized_tangent(active_gradients(M.patches[i], p), M.dim())));
    return canonical(N);
}

ConeUnion patch_normal_upper(const PatchMap& M, const Vec& p, const Vec& w) {
    ConeUnion U(M.dim());
    for (auto i : M.patches_at(p)) {
        auto G = active_gradients(M.patches[i], p);
        PolyhedralCone T = linearized_tangent(G, M.dim());
        if (!T.contains(w)) continue;
        U.pieces.push_back(polar_cone(tangent_of_cone(T, w)));
    }
    return simplify(U);
}

ConeUnion coderivative_image(const ConeUnion& graph_normals, std::size_t nx, std::size_t ny) {
    Mat P(nx, zeros(nx + ny));
    for (std::size_t i = 0; i < nx; ++i) P[i][i] = 1;
    ConeUnion out(nx);
    for (auto& c : graph_normals.pieces) out.pieces.push_back(linear_image(c, P, nx));
    return simplify(out);
}

ConeUnion coderivative_kernel(const ConeUnion& graph_normals, std::size_t nx, std::size_t ny) {
    Mat M(nx + ny, zeros(ny));
    for (std::size_t i = 0; i < ny; ++i) M[nx + i][i] = -1;
    return simplify(preimage(graph_normals, M, ny));
}

PatchMap mpec_assemble(const PolyUnion& Omega, const PatchMap& S) {
    std::size_t n1 = S.nx, n2 = S.ny, N = 2 * (n1 + n2);
    if (Omega.dim != n1) throw GeometryError("Omega dimension does not match S");
    PatchMap out;
    out.nx = n1 + n2;
    out.ny = n1 + n2;
    for (std::size_t i = 0; i < n1; ++i) out.names.push_back("x1_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n2; ++i) out.names.push_back("x2_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n1; ++i) out.names.push_back("y1_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n2; ++i) out.names.push_back("y2_" + std::to_string(i + 1));
    // S variables (t, s) -> (x1, x2 + y2); Omega variable -> x1 + y1
    std::vector<Polynomial> subs_S, omega_arg;
    for (std::size_t i = 0; i < n1; ++i) subs_S.push_back(Polynomial::variable(N, i));
    for (std::size_t i = 0; i < n2; ++i)
        subs_S.push_back(Polynomial::variable(N, n1 + i) + Polynomial::variable(N, 2 * n1 + n2 + i));
    for (std::size_t i = 0; i < n1; ++i)
        omega_arg.push_back(Polynomial::variable(N, i) + Polynomial::variable(N, n1 + n2 + i));
    auto affine = [&](const Vec& a, const Rational& b) {
        Polynomial f = Polynomial::constant(N, -b);
        for (std::size_t i = 0; i < n1; ++i)
            if (a[i] != 0) f = f + omega_arg[i].scaled(a[i]);
        return f;
    };
    for (auto& w : Omega.pieces) {
        for (auto& s : S.patches) {
            GraphPatch P;
            for (auto& e : s.eq) P.eq.push_back(e.compose(subs_S));
            for (auto& q : s.ineq) P.ineq.push_back(q.compose(subs_S));
            for (std::size_t r = 0; r < w.E.size(); ++r) P.eq.push_back(affine(w.E[r], w.d[r]));
            for (std::size_t r = 0; r < w.A.size(); ++r) P.ineq.push_back(affine(w.A[r], w.b[r]));
            out.patches.push_back(std::move(P));
        }
    }
    return out;
}

}  // namespace dircq
