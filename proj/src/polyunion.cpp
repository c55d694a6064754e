#include "dircq/polyunion.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dircq {

ConeUnion ConeUnion::single(PolyhedralCone c) {
    ConeUnion u(c.dim);
    u.pieces.push_back(std::move(c));
    return u;
}

bool ConeUnion::contains(const Vec& v) const {
    for (auto& p : pieces)
        if (p.contains(v)) return true;
    return false;
}

bool ConeUnion::is_origin_only() const {
    if (pieces.empty()) return false;
    for (auto& p : pieces)
        if (!is_origin(p)) return false;
    return true;
}

std::optional<Vec> ConeUnion::nonzero_point() const {
    for (auto& p : pieces)
        if (auto v = dircq::nonzero_point(p)) return v;
    return std::nullopt;
}

ConeUnion simplify(const ConeUnion& U) {
    std::vector<PolyhedralCone> can;
    for (auto& p : U.pieces) can.push_back(canonical(p));
    std::vector<bool> drop(can.size(), false);
    for (std::size_t i = 0; i < can.size(); ++i) {
        for (std::size_t j = 0; j < can.size() && !drop[i]; ++j) {
            if (i == j || drop[j]) continue;
            if (cone_subset(can[i], can[j])) {
                if (cone_subset(can[j], can[i]) && j > i) continue;
                drop[i] = true;
            }
        }
    }
    ConeUnion out(U.dim);
    for (std::size_t i = 0; i < can.size(); ++i)
        if (!drop[i]) out.pieces.push_back(can[i]);
    std::sort(out.pieces.begin(), out.pieces.end(), [](const PolyhedralCone& a, const PolyhedralCone& b) {
        if (a.E != b.E) return a.E < b.E;
        return a.A < b.A;
    });
    return out;
}

std::optional<Vec> uncovered_point(const PolyhedralCone& P, const ConeUnion& V) {
    for (auto& Q : V.pieces)
        if (cone_subset(P, Q)) return std::nullopt;
    Vec w = *relint_point(P);
    const PolyhedralCone* host = nullptr;
    for (auto& Q : V.pieces)
        if (Q.contains(w)) {
            host = &Q;
            break;
        }
    if (!host) return w;
    // a row of the host that is violated somewhere in P splits P through its relative interior
    Mat cand = host->A;
    for (auto& e : host->E) {
        cand.push_back(e);
        cand.push_back(neg(e));
    }
    for (auto& a : cand) {
        HPolyhedron L = P;
        L.add_ineq(a, 1);
        auto r = lp_maximize(L, a);
        if (r.status != LpResult::Status::Feasible || r.value <= 0) continue;
        PolyhedralCone lo = P, hi = P;
        lo.add_ineq(a);
        hi.add_ineq(neg(a));
        if (auto u = uncovered_point(lo, V)) return u;
        return uncovered_point(hi, V);
    }
    throw GeometryError("uncovered_point: no splitting row found");
}

bool union_subset(const ConeUnion& U, const ConeUnion& V, Vec* counterexample) {
    for (auto& P : U.pieces)
        if (auto w = uncovered_point(P, V)) {
            if (counterexample) *counterexample = *w;
            return false;
        }
    return true;
}

bool union_equal(const ConeUnion& U, const ConeUnion& V) {
    if (U.is_empty() != V.is_empty()) return false;
    return union_subset(U, V) && union_subset(V, U);
}

ConeUnion intersect(const ConeUnion& U, const PolyhedralCone& C) {
    ConeUnion out(U.dim);
    for (auto& p : U.pieces) out.pieces.push_back(intersect(p, C));
    return simplify(out);
}

ConeUnion union_of(const ConeUnion& U, const ConeUnion& V) {
    ConeUnion out = U;
    for (auto& p : V.pieces) out.pieces.push_back(p);
    return simplify(out);
}

ConeUnion preimage(const ConeUnion& U, const Mat& M, std::size_t n) {
    ConeUnion out(n);
    for (auto& p : U.pieces) out.pieces.push_back(preimage(p, M, n));
    return simplify(out);
}

std::string describe(const ConeUnion& U) {
    if (U.is_empty()) return "EMPTY";
    std::string s;
    for (std::size_t i = 0; i < U.pieces.size(); ++i) {
        if (i) s += " U ";
        s += describe(U.pieces[i]);
    }
    return s;
}

PolyUnion PolyUnion::from(const ConeUnion& U) {
    PolyUnion D(U.dim);
    for (auto& p : U.pieces) D.pieces.push_back(p);
    return D;
}

bool PolyUnion::contains(const Vec& y) const {
    for (auto& p : pieces)
        if (p.contains(y)) return true;
    return false;
}

namespace {

PolyhedralCone piece_tangent(const HPolyhedron& P, const Vec& y) {
    PolyhedralCone c(P.dim);
    for (std::size_t i = 0; i < P.A.size(); ++i)
        if (dot(P.A[i], y) == P.b[i]) c.add_ineq(P.A[i]);
    for (auto& e : P.E) c.add_eq(e);
    return c;
}

}  // namespace

ConeUnion tangent_cone(const PolyUnion& D, const Vec& y) {
    ConeUnion T(D.dim);
    for (auto& P : D.pieces)
        if (P.contains(y)) T.pieces.push_back(piece_tangent(P, y));
    return simplify(T);
}

std::optional<PolyhedralCone> regular_normal_cone(const PolyUnion& D, const Vec& y) {
    PolyhedralCone N(D.dim);
    bool any = false;
    for (auto& P : D.pieces) {
        if (!P.contains(y)) continue;
        any = true;
        N = intersect(N, polar_cone(piece_tangent(P, y)));
    }
    if (!any) return std::nullopt;
    return canonical(N);
}

std::size_t Arrangement::locate(const Vec& w) const {
    std::vector<signed char> s;
    for (auto& h : hyperplanes) {
        Rational v = dot(h, w);
        s.push_back(v < 0 ? -1 : (v > 0 ? 1 : 0));
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].sign == s) return i;
    return cells.size();
}

bool Arrangement::below(std::size_t a, std::size_t b) const {
    for (std::size_t k = 0; k < hyperplanes.size(); ++k)
        if (cells[a].sign[k] != 0 && cells[a].sign[k] != cells[b].sign[k]) return false;
    return true;
}

ConeUnion Arrangement::limiting_normal_at(const Vec& w) const {
    std::size_t c = locate(w);
    ConeUnion out(dim);
    if (c == cells.size()) return out;
    for (std::size_t b = 0; b < cells.size(); ++b)
        if (below(c, b)) out.pieces.push_back(cells[b].dual);
    return simplify(out);
}

Arrangement build_arrangement(const ConeUnion& T) {
    Arrangement A;
    A.dim = T.dim;
    A.T = T;
    std::set<Vec> hs;
    for (auto& p : T.pieces) {
        for (auto& r : p.A)
            if (!is_zero(r)) hs.insert(primitive_signed(r));
        for (auto& r : p.E)
            if (!is_zero(r)) hs.insert(primitive_signed(r));
    }
    A.hyperplanes.assign(hs.begin(), hs.end());
    struct Partial {
        StrictCone sys;
        std::vector<signed char> sign;
        Vec w;
    };
    std::map<std::vector<signed char>, Vec> found;
    for (auto& p : T.pieces) {
        std::vector<Partial> cur;
        Partial start{StrictCone(T.dim), {}, zeros(T.dim)};
        start.sys.A = p.A;
        start.sys.E = p.E;
        cur.push_back(start);
        for (auto& h : A.hyperplanes) {
            std::vector<Partial> next;
            for (auto& part : cur) {
                Rational hw = dot(h, part.w);
                int known = hw < 0 ? -1 : (hw > 0 ? 1 : 0);
                for (int s = -1; s <= 1; ++s) {
                    Partial q = part;
                    if (s == -1) q.sys.S.push_back(h);
                    else if (s == 1) q.sys.S.push_back(neg(h));
                    else q.sys.E.push_back(h);
                    q.sign.push_back(static_cast<signed char>(s));
                    if (s != known) {
                        auto r = lp_feasibility(q.sys.relaxed());
                        if (!r.feasible()) continue;
                        q.w = r.x;
                    }
                    next.push_back(std::move(q));
                }
            }
            cur = std::move(next);
        }
        for (auto& part : cur) found.emplace(part.sign, part.w);
    }
    PolyUnion D = PolyUnion::from(T);
    for (auto& [sign, w] : found) {
        Arrangement::Cell c;
        c.sign = sign;
        c.witness = w;
        c.closure = PolyhedralCone(T.dim);
        for (std::size_t k = 0; k < A.hyperplanes.size(); ++k) {
            if (sign[k] < 0) c.closure.add_ineq(A.hyperplanes[k]);
            else if (sign[k] > 0) c.closure.add_ineq(neg(A.hyperplanes[k]));
            else c.closure.add_eq(A.hyperplanes[k]);
        }
        c.dual = *regular_normal_cone(D, w);
        A.cells.push_back(std::move(c));
    }
    return A;
}

ConeUnion limiting_normal_cone(const PolyUnion& D, const Vec& y) {
    if (!D.contains(y)) return ConeUnion::empty_set(D.dim);
    return build_arrangement(tangent_cone(D, y)).limiting_normal_at(zeros(D.dim));
}

ConeUnion directional_limiting_normal_cone(const PolyUnion& D, const Vec& y, const Vec& v) {
    if (!D.contains(y)) return ConeUnion::empty_set(D.dim);
    auto T = tangent_cone(D, y);
    if (!T.contains(v)) return ConeUnion::empty_set(D.dim);
    return build_arrangement(T).limiting_normal_at(v);
}

NormalGraphModel normal_graph_of(const Arrangement& A) {
    NormalGraphModel G;
    G.dim = A.dim;
    for (auto& c : A.cells) G.cells.push_back({c.closure, c.dual, c.witness});
    return G;
}

NormalGraphModel normal_graph(const PolyUnion& D, const Vec& y) {
    if (!D.contains(y)) {
        NormalGraphModel G;
        G.dim = D.dim;
        return G;
    }
    return normal_graph_of(build_arrangement(tangent_cone(D, y)));
}

PolyhedralCone tangent_of_cone(const PolyhedralCone& K, const Vec& p) {
    PolyhedralCone t(K.dim);
    for (auto& r : K.A)
        if (dot(r, p) == 0) t.add_ineq(r);
    for (auto& e : K.E) t.add_eq(e);
    return t;
}

ConeUnion graphical_derivative_of_normal_map(const PolyUnion& D, const Vec& y, const Vec& ystar, const Vec& v) {
    ConeUnion out(D.dim);
    auto G = normal_graph(D, y);
    for (auto& c : G.cells)
        if (c.dual.contains(ystar) && c.primal.contains(v)) out.pieces.push_back(tangent_of_cone(c.dual, ystar));
    return simplify(out);
}

std::vector<PolyhedralCone> normal_graph_tangent_pieces(const NormalGraphModel& G, const Vec& ystar) {
    std::vector<PolyhedralCone> out;
    const std::size_t n = G.dim;
    for (auto& c : G.cells) {
        if (!c.dual.contains(ystar)) continue;
        PolyhedralCone t = tangent_of_cone(c.dual, ystar);
        PolyhedralCone Q(2 * n);
        for (auto& r : c.primal.A) Q.add_ineq(concat(r, zeros(n)));
        for (auto& r : c.primal.E) Q.add_eq(concat(r, zeros(n)));
        for (auto& r : t.A) Q.add_ineq(concat(zeros(n), r));
        for (auto& r : t.E) Q.add_eq(concat(zeros(n), r));
        out.push_back(std::move(Q));
    }
    return out;
}

ConeUnion conic_subderivative(const std::vector<PolyhedralCone>& pieces, std::size_t n, const Vec& v) {
    ConeUnion out(n);
    for (auto& Q : pieces) {
        HPolyhedron fiber(n);
        PolyhedralCone section(n);
        for (auto& r : Q.A) {
            Vec a1(r.begin(), r.begin() + n), a2(r.begin() + n, r.end());
            fiber.add_ineq(a2, -dot(a1, v));
            section.add_ineq(a2);
        }
        for (auto& r : Q.E) {
            Vec a1(r.begin(), r.begin() + n), a2(r.begin() + n, r.end());
            fiber.add_eq(a2, -dot(a1, v));
            section.add_eq(a2);
        }
        if (!lp_feasibility(fiber).feasible()) continue;
        if (is_origin(section)) continue;
        out.pieces.push_back(section);
    }
    return simplify(out);
}

ConeUnion graphical_subderivative_of_normal_map(const PolyUnion& D, const Vec& y, const Vec& ystar,
                                                const Vec& v) {
    auto G = normal_graph(D, y);
    return conic_subderivative(normal_graph_tangent_pieces(G, ystar), D.dim, v);
}

}  // namespace dircq
