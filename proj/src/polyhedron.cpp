#include "dircq/geometry.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dircq {

PolyhedralCone PolyhedralCone::from(const HPolyhedron& p) {
    PolyhedralCone c(p.dim);
    for (auto& r : p.A) c.add_ineq(r);
    for (auto& r : p.E) c.add_eq(r);
    return c;
}

PolyhedralCone PolyhedralCone::origin(std::size_t n) {
    PolyhedralCone c(n);
    for (std::size_t i = 0; i < n; ++i) c.add_eq(unit(n, i));
    return c;
}

std::vector<std::size_t> implicit_equalities(const HPolyhedron& P) {
    std::vector<std::size_t> out;
    if (P.A.empty()) return out;
    // max t s.t. A x + t <= b, E x = d, t <= 1
    HPolyhedron L(P.dim + 1);
    for (std::size_t i = 0; i < P.A.size(); ++i) {
        Vec r = P.A[i];
        r.push_back(1);
        L.add_ineq(r, P.b[i]);
    }
    for (std::size_t i = 0; i < P.E.size(); ++i) {
        Vec r = P.E[i];
        r.push_back(0);
        L.add_eq(r, P.d[i]);
    }
    L.add_ineq(unit(P.dim + 1, P.dim), 1);
    auto res = lp_maximize(L, unit(P.dim + 1, P.dim));
    if (res.status != LpResult::Status::Feasible) throw GeometryError("implicit_equalities: empty polyhedron");
    if (res.value > 0) return out;
    Vec x(res.x.begin(), res.x.begin() + P.dim);
    for (std::size_t i = 0; i < P.A.size(); ++i) {
        if (dot(P.A[i], x) < P.b[i]) continue;
        auto r = lp_maximize(P, neg(P.A[i]));
        if (r.status == LpResult::Status::Feasible && r.value == -P.b[i]) out.push_back(i);
    }
    return out;
}

std::optional<Vec> relint_point(const HPolyhedron& P) {
    auto f = lp_feasibility(P);
    if (!f.feasible()) return std::nullopt;
    if (P.A.empty()) return f.x;
    auto imp = implicit_equalities(P);
    std::vector<bool> is_imp(P.A.size(), false);
    for (auto i : imp) is_imp[i] = true;
    HPolyhedron L(P.dim + 1);
    for (std::size_t i = 0; i < P.A.size(); ++i) {
        Vec r = P.A[i];
        r.push_back(is_imp[i] ? 0 : 1);
        if (is_imp[i]) L.add_eq(r, P.b[i]);
        else L.add_ineq(r, P.b[i]);
    }
    for (std::size_t i = 0; i < P.E.size(); ++i) {
        Vec r = P.E[i];
        r.push_back(0);
        L.add_eq(r, P.d[i]);
    }
    L.add_ineq(unit(P.dim + 1, P.dim), 1);
    auto res = lp_maximize(L, unit(P.dim + 1, P.dim));
    if (res.status != LpResult::Status::Feasible) throw GeometryError("relint_point: inconsistent LP");
    return Vec(res.x.begin(), res.x.begin() + P.dim);
}

std::size_t cone_dimension(const PolyhedralCone& C) {
    Mat rows = C.E;
    for (auto i : implicit_equalities(C)) rows.push_back(C.A[i]);
    return C.dim - rank(rows, C.dim);
}

namespace {

using Bits = std::vector<std::uint64_t>;

void set_bit(Bits& b, std::size_t i) {
    if (b.size() <= i / 64) b.resize(i / 64 + 1, 0);
    b[i / 64] |= (std::uint64_t(1) << (i % 64));
}

Bits bit_and(const Bits& a, const Bits& b) {
    Bits r(std::min(a.size(), b.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] & b[i];
    return r;
}

bool superset(const Bits& a, const Bits& sub) {
    for (std::size_t i = 0; i < sub.size(); ++i) {
        std::uint64_t ai = i < a.size() ? a[i] : 0;
        if ((sub[i] & ~ai) != 0) return false;
    }
    return true;
}

struct Ray {
    Vec v;
    Bits zero;
};

Vec project_out(const Vec& r, const Mat& L) {
    if (L.empty()) return r;
    std::size_t k = L.size();
    Mat G(k, zeros(k));
    Vec rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) G[i][j] = dot(L[i], L[j]);
        rhs[i] = dot(L[i], r);
    }
    Vec c;
    solve(G, rhs, k, c);
    Vec out = r;
    for (std::size_t i = 0; i < k; ++i) out = sub(out, scale(L[i], c[i]));
    return out;
}

}  // namespace

Generators enumerate_generators(const PolyhedralCone& C) {
    C.validate();
    const std::size_t n = C.dim;
    Mat L;
    for (std::size_t i = 0; i < n; ++i) L.push_back(unit(n, i));
    std::vector<Ray> R;
    struct Row {
        Vec a;
        bool eq;
    };
    std::vector<Row> rows;
    for (auto& e : C.E) rows.push_back({e, true});
    for (auto& a : C.A) rows.push_back({a, false});

    for (std::size_t ci = 0; ci < rows.size(); ++ci) {
        const Vec& a = rows[ci].a;
        const bool eq = rows[ci].eq;
        std::size_t piv = L.size();
        for (std::size_t j = 0; j < L.size(); ++j)
            if (!dot(a, L[j]).is_zero()) {
                piv = j;
                break;
            }
        if (piv < L.size()) {
            Vec l0 = L[piv];
            Rational al0 = dot(a, l0);
            if (al0 > 0) {
                l0 = neg(l0);
                al0 = -al0;
            }
            Mat NL;
            for (std::size_t j = 0; j < L.size(); ++j) {
                if (j == piv) continue;
                NL.push_back(sub(L[j], scale(l0, dot(a, L[j]) / al0)));
            }
            L = std::move(NL);
            for (auto& r : R) {
                Rational ar = dot(a, r.v);
                if (!ar.is_zero()) r.v = sub(r.v, scale(l0, ar / al0));
                set_bit(r.zero, ci);
            }
            if (!eq) {
                Ray nr;
                nr.v = l0;
                for (std::size_t k = 0; k < ci; ++k) set_bit(nr.zero, k);
                R.push_back(nr);
            }
            continue;
        }
        std::vector<std::size_t> pos, negs, zer;
        std::vector<Rational> val(R.size());
        for (std::size_t j = 0; j < R.size(); ++j) {
            val[j] = dot(a, R[j].v);
            if (val[j] > 0) pos.push_back(j);
            else if (val[j] < 0) negs.push_back(j);
            else zer.push_back(j);
        }
        std::vector<Ray> NR;
        for (auto j : zer) {
            Ray r = R[j];
            set_bit(r.zero, ci);
            NR.push_back(r);
        }
        if (!eq)
            for (auto j : negs) NR.push_back(R[j]);
        for (auto p : pos)
            for (auto q : negs) {
                Bits z = bit_and(R[p].zero, R[q].zero);
                bool adjacent = true;
                for (std::size_t r = 0; r < R.size() && adjacent; ++r) {
                    if (r == p || r == q) continue;
                    if (superset(R[r].zero, z)) adjacent = false;
                }
                if (!adjacent) continue;
                Ray nr;
                nr.v = primitive(sub(scale(R[q].v, val[p]), scale(R[p].v, val[q])));
                nr.zero = z;
                set_bit(nr.zero, ci);
                NR.push_back(nr);
            }
        R = std::move(NR);
    }

    Generators g;
    g.lineality = rowspace_basis(L, n);
    std::set<Vec> seen;
    for (auto& r : R) {
        Vec v = primitive(project_out(r.v, g.lineality));
        if (is_zero(v)) continue;
        if (seen.insert(v).second) g.rays.push_back(v);
    }
    std::sort(g.rays.begin(), g.rays.end());
    return g;
}

PolyhedralCone cone_from_generators(const Generators& g, std::size_t dim) {
    // polar of the generator description, then polar again gives H-form
    PolyhedralCone P(dim);
    for (auto& r : g.rays) P.add_ineq(r);
    for (auto& l : g.lineality) P.add_eq(l);
    return polar_cone(P);
}

PolyhedralCone polar_cone(const PolyhedralCone& C) {
    Generators g = enumerate_generators(C);
    PolyhedralCone P(C.dim);
    for (auto& r : g.rays) P.add_ineq(r);
    for (auto& l : g.lineality) P.add_eq(l);
    return P;
}

PolyhedralCone canonical(const PolyhedralCone& C) { return polar_cone(polar_cone(C)); }

bool cone_subset(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.dim != b.dim) throw GeometryError("cone_subset: dimension mismatch");
    Generators g = enumerate_generators(a);
    for (auto& r : g.rays)
        if (!b.contains(r)) return false;
    for (auto& l : g.lineality)
        if (!b.contains(l) || !b.contains(neg(l))) return false;
    return true;
}

bool cone_equal(const PolyhedralCone& a, const PolyhedralCone& b) { return cone_subset(a, b) && cone_subset(b, a); }

PolyhedralCone intersect(const PolyhedralCone& a, const PolyhedralCone& b) {
    if (a.dim != b.dim) throw GeometryError("intersect: dimension mismatch");
    PolyhedralCone c = a;
    for (auto& r : b.A) c.add_ineq(r);
    for (auto& r : b.E) c.add_eq(r);
    return c;
}

std::optional<Vec> nonzero_point(const PolyhedralCone& C) {
    Generators g = enumerate_generators(C);
    if (!g.rays.empty()) return g.rays.front();
    if (!g.lineality.empty()) return g.lineality.front();
    return std::nullopt;
}

bool is_origin(const PolyhedralCone& C) { return !nonzero_point(C).has_value(); }

std::vector<Face> enumerate_faces(const PolyhedralCone& C) {
    std::vector<Face> out;
    std::set<std::vector<std::size_t>> seen;
    auto make = [&](const std::vector<std::size_t>& forced) {
        PolyhedralCone F(C.dim);
        std::vector<bool> f(C.A.size(), false);
        for (auto i : forced) f[i] = true;
        for (std::size_t i = 0; i < C.A.size(); ++i) {
            if (f[i]) F.add_eq(C.A[i]);
            else F.add_ineq(C.A[i]);
        }
        for (auto& e : C.E) F.add_eq(e);
        // tight set of the face within the original row numbering
        auto imp = implicit_equalities(F);
        std::vector<std::size_t> ineq_idx;
        for (std::size_t i = 0; i < C.A.size(); ++i)
            if (!f[i]) ineq_idx.push_back(i);
        std::vector<std::size_t> active = forced;
        for (auto k : imp) active.push_back(ineq_idx[k]);
        std::sort(active.begin(), active.end());
        return active;
    };
    std::vector<std::vector<std::size_t>> queue{make({})};
    seen.insert(queue.front());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        auto act = queue[qi];
        for (std::size_t i = 0; i < C.A.size(); ++i) {
            if (std::binary_search(act.begin(), act.end(), i)) continue;
            auto f = act;
            f.push_back(i);
            std::sort(f.begin(), f.end());
            auto closed = make(f);
            if (seen.insert(closed).second) queue.push_back(closed);
        }
    }
    for (auto& act : queue) {
        Face fc;
        fc.active = act;
        fc.face = PolyhedralCone(C.dim);
        for (std::size_t i = 0; i < C.A.size(); ++i) {
            if (std::binary_search(act.begin(), act.end(), i)) fc.face.add_eq(C.A[i]);
            else fc.face.add_ineq(C.A[i]);
        }
        for (auto& e : C.E) fc.face.add_eq(e);
        fc.relint_witness = *relint_point(fc.face);
        Mat rows = fc.face.E;
        fc.dim = C.dim - rank(rows, C.dim);
        out.push_back(std::move(fc));
    }
    std::sort(out.begin(), out.end(), [](const Face& a, const Face& b) {
        if (a.dim != b.dim) return a.dim > b.dim;
        return a.active < b.active;
    });
    return out;
}

namespace {

void drop_redundant(HPolyhedron& P) {
    // remove duplicate and LP-redundant inequalities
    std::set<std::pair<Vec, Rational>> seen;
    HPolyhedron Q(P.dim);
    Q.E = P.E;
    Q.d = P.d;
    for (std::size_t i = 0; i < P.A.size(); ++i) {
        if (is_zero(P.A[i])) {
            if (P.b[i] < 0) {
                Q.add_ineq(P.A[i], -1);
            }
            continue;
        }
        // normalize by a positive factor
        Vec row = P.A[i];
        Rational rhs = P.b[i];
        Vec key = concat(row, Vec{rhs});
        Vec pk = primitive(key);
        Vec pr(pk.begin(), pk.end() - 1);
        if (is_zero(pr)) continue;
        if (seen.insert({pr, pk.back()}).second) Q.add_ineq(pr, pk.back());
    }
    if (!lp_feasibility(Q).feasible()) {
        HPolyhedron E(P.dim);
        E.add_ineq(zeros(P.dim), -1);
        P = E;
        return;
    }
    for (std::size_t i = 0; i < Q.A.size();) {
        HPolyhedron R = Q;
        R.A.erase(R.A.begin() + i);
        R.b.erase(R.b.begin() + i);
        auto r = lp_maximize(R, Q.A[i]);
        if (r.status == LpResult::Status::Feasible && r.value <= Q.b[i]) {
            Q = std::move(R);
        } else {
            ++i;
        }
    }
    P = std::move(Q);
}

}  // namespace

HPolyhedron project_polyhedron(const HPolyhedron& P, const std::vector<std::size_t>& coords) {
    P.validate();
    std::vector<bool> keep(P.dim, false);
    for (auto c : coords) {
        if (c >= P.dim) throw GeometryError("project_polyhedron: coordinate out of range");
        keep[c] = true;
    }
    HPolyhedron Q = P;
    for (std::size_t j = 0; j < P.dim; ++j) {
        if (keep[j]) continue;
        // substitute using an equality when one involves x_j
        std::size_t ei = Q.E.size();
        for (std::size_t i = 0; i < Q.E.size(); ++i)
            if (!Q.E[i][j].is_zero()) {
                ei = i;
                break;
            }
        if (ei < Q.E.size()) {
            Vec e = Q.E[ei];
            Rational de = Q.d[ei];
            Q.E.erase(Q.E.begin() + ei);
            Q.d.erase(Q.d.begin() + ei);
            auto elim = [&](Vec& row, Rational& rhs) {
                if (row[j].is_zero()) return;
                Rational f = row[j] / e[j];
                row = sub(row, scale(e, f));
                rhs -= f * de;
            };
            for (std::size_t i = 0; i < Q.A.size(); ++i) elim(Q.A[i], Q.b[i]);
            for (std::size_t i = 0; i < Q.E.size(); ++i) elim(Q.E[i], Q.d[i]);
            continue;
        }
        HPolyhedron N(Q.dim);
        N.E = Q.E;
        N.d = Q.d;
        std::vector<std::size_t> pos, ng;
        for (std::size_t i = 0; i < Q.A.size(); ++i) {
            if (Q.A[i][j] > 0) pos.push_back(i);
            else if (Q.A[i][j] < 0) ng.push_back(i);
            else N.add_ineq(Q.A[i], Q.b[i]);
        }
        for (auto p : pos)
            for (auto q : ng) {
                Rational cp = -Q.A[q][j], cq = Q.A[p][j];
                N.add_ineq(add(scale(Q.A[p], cp), scale(Q.A[q], cq)), cp * Q.b[p] + cq * Q.b[q]);
            }
        drop_redundant(N);
        Q = std::move(N);
    }
    HPolyhedron out(coords.size());
    auto pick = [&](const Vec& row) {
        Vec r;
        for (auto c : coords) r.push_back(row[c]);
        return r;
    };
    for (std::size_t i = 0; i < Q.A.size(); ++i) out.add_ineq(pick(Q.A[i]), Q.b[i]);
    for (std::size_t i = 0; i < Q.E.size(); ++i) {
        Vec r = pick(Q.E[i]);
        if (is_zero(r)) {
            if (!Q.d[i].is_zero()) out.add_ineq(zeros(coords.size()), -1);
            continue;
        }
        out.add_eq(r, Q.d[i]);
    }
    drop_redundant(out);
    return out;
}

PolyhedralCone linear_image(const PolyhedralCone& P, const Mat& M, std::size_t k) {
    Generators g = enumerate_generators(P);
    Generators img;
    PolyhedralCone dual(k);
    for (auto& r : g.rays) dual.add_ineq(mat_vec(M, r));
    for (auto& l : g.lineality) dual.add_eq(mat_vec(M, l));
    return polar_cone(dual);
}

PolyhedralCone preimage(const PolyhedralCone& P, const Mat& M, std::size_t n) {
    PolyhedralCone c(n);
    for (auto& r : P.A) c.add_ineq(mat_t_vec(M, r, n));
    for (auto& r : P.E) c.add_eq(mat_t_vec(M, r, n));
    return c;
}

std::string describe(const PolyhedralCone& C) {
    std::ostringstream os;
    Generators g = enumerate_generators(C);
    os << "cone{rays=[";
    for (std::size_t i = 0; i < g.rays.size(); ++i) {
        if (i) os << ",";
        os << "(";
        for (std::size_t j = 0; j < g.rays[i].size(); ++j) os << (j ? "," : "") << to_string(g.rays[i][j]);
        os << ")";
    }
    os << "] lin=[";
    for (std::size_t i = 0; i < g.lineality.size(); ++i) {
        if (i) os << ",";
        os << "(";
        for (std::size_t j = 0; j < g.lineality[i].size(); ++j) os << (j ? "," : "") << to_string(g.lineality[i][j]);
        os << ")";
    }
    os << "]}";
    return os.str();
}

}  // namespace dircq
