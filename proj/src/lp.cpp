#include "dircq/geometry.hpp"

namespace dircq {

namespace {

// Dense tableau over columns [p | q | s | artificial], rows [ineq ; eq].
// x = p - q. Bland's rule throughout, so rational pivoting terminates.
struct Tableau {
    std::size_t n, mi, me, rows, cols, art0;
    Mat T;  // rows x (cols + 1), last column is the rhs
    std::vector<std::size_t> basis;
    std::vector<int> sign;  // row flip applied to make rhs >= 0
    Vec red;                // reduced objective row (maximize), last entry = -value

    explicit Tableau(const HPolyhedron& P)
        : n(P.dim), mi(P.A.size()), me(P.E.size()), rows(mi + me) {
        art0 = 2 * n + mi;
        cols = art0 + rows;
        T.assign(rows, zeros(cols + 1));
        sign.assign(rows, 1);
        basis.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            const Vec& a = i < mi ? P.A[i] : P.E[i - mi];
            Rational r = i < mi ? P.b[i] : P.d[i - mi];
            int sg = r < 0 ? -1 : 1;
            sign[i] = sg;
            for (std::size_t j = 0; j < n; ++j) {
                if (a[j].is_zero()) continue;
                T[i][j] = sg * a[j];
                T[i][n + j] = -sg * a[j];
            }
            if (i < mi) T[i][2 * n + i] = sg;
            T[i][art0 + i] = 1;
            T[i][cols] = sg * r;
            basis[i] = art0 + i;
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        Rational inv = 1 / T[r][c];
        for (auto& x : T[r])
            if (!x.is_zero()) x *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || T[i][c].is_zero()) continue;
            Rational f = T[i][c];
            for (std::size_t j = 0; j <= cols; ++j)
                if (!T[r][j].is_zero()) T[i][j] -= f * T[r][j];
        }
        if (!red[c].is_zero()) {
            Rational f = red[c];
            for (std::size_t j = 0; j <= cols; ++j)
                if (!T[r][j].is_zero()) red[j] -= f * T[r][j];
        }
        basis[r] = c;
    }

    void set_objective(const Vec& c) {
        red = c;
        red.resize(cols + 1, Rational(0));
        for (std::size_t i = 0; i < rows; ++i) {
            const Rational& cb = red[basis[i]];
            if (cb.is_zero()) continue;
            Rational f = cb;
            for (std::size_t j = 0; j <= cols; ++j)
                if (!T[i][j].is_zero()) red[j] -= f * T[i][j];
        }
    }

    // returns false when unbounded
    bool optimize(std::size_t allowed_cols) {
        for (;;) {
            std::size_t e = allowed_cols;
            for (std::size_t j = 0; j < allowed_cols; ++j)
                if (red[j] > 0) {
                    e = j;
                    break;
                }
            if (e == allowed_cols) return true;
            std::size_t leave = rows;
            Rational best;
            for (std::size_t i = 0; i < rows; ++i) {
                if (T[i][e] <= 0) continue;
                Rational ratio = T[i][cols] / T[i][e];
                if (leave == rows || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == rows) return false;
            pivot(leave, e);
        }
    }

    Vec primal() const {
        Vec x = zeros(n);
        for (std::size_t i = 0; i < rows; ++i) {
            std::size_t b = basis[i];
            if (b < n) x[b] += T[i][cols];
            else if (b < 2 * n) x[b - n] -= T[i][cols];
        }
        return x;
    }
};

}  // namespace

void HPolyhedron::add_ineq(Vec a, Rational rhs) {
    if (a.size() != dim) throw GeometryError("row dimension mismatch");
    A.push_back(std::move(a));
    b.push_back(std::move(rhs));
}

void HPolyhedron::add_eq(Vec a, Rational rhs) {
    if (a.size() != dim) throw GeometryError("row dimension mismatch");
    E.push_back(std::move(a));
    d.push_back(std::move(rhs));
}

bool HPolyhedron::contains(const Vec& x) const {
    for (std::size_t i = 0; i < A.size(); ++i)
        if (dot(A[i], x) > b[i]) return false;
    for (std::size_t i = 0; i < E.size(); ++i)
        if (dot(E[i], x) != d[i]) return false;
    return true;
}

void HPolyhedron::validate() const {
    if (A.size() != b.size() || E.size() != d.size()) throw GeometryError("row/rhs count mismatch");
    for (auto& r : A)
        if (r.size() != dim) throw GeometryError("row dimension mismatch");
    for (auto& r : E)
        if (r.size() != dim) throw GeometryError("row dimension mismatch");
}

LpResult lp_maximize(const HPolyhedron& P, const Vec& c) {
    P.validate();
    Tableau tb(P);
    LpResult res;
    // phase I: maximize -sum(artificial)
    Vec c1 = zeros(tb.cols);
    for (std::size_t i = 0; i < tb.rows; ++i) c1[tb.art0 + i] = -1;
    tb.set_objective(c1);
    tb.optimize(tb.cols);
    Rational infeas = tb.red[tb.cols];  // equals +sum(artificial) at optimum
    if (infeas != 0) {
        Vec y = zeros(tb.mi), z = zeros(tb.me);
        for (std::size_t i = 0; i < tb.rows; ++i) {
            // red_j = c_j - pi A_j with c = -1 on artificials and A_j = e_i, so
            // red = -1 - pi_i. The dual of min sum(a) is w = -pi = red + 1.
            Rational wmin = tb.red[tb.art0 + i] + 1;
            Rational w0 = tb.sign[i] * wmin;
            if (i < tb.mi) y[i] = -w0;
            else z[i - tb.mi] = -w0;
        }
        Rational val = dot(y, P.b) + dot(z, P.d);
        if (val >= 0) throw GeometryError("internal: Farkas extraction failed");
        Rational s = -1 / val;
        res.status = LpResult::Status::Infeasible;
        res.farkas_ineq = scale(y, s);
        res.farkas_eq = scale(z, s);
        if (!check_farkas(P, res.farkas_ineq, res.farkas_eq)) throw GeometryError("internal: invalid Farkas vector");
        return res;
    }
    // drive artificials out of the basis where possible
    for (std::size_t i = 0; i < tb.rows; ++i) {
        if (tb.basis[i] < tb.art0) continue;
        for (std::size_t j = 0; j < tb.art0; ++j)
            if (!tb.T[i][j].is_zero()) {
                tb.pivot(i, j);
                break;
            }
    }
    Vec c2 = zeros(tb.cols);
    bool has_obj = false;
    for (std::size_t j = 0; j < P.dim; ++j) {
        c2[j] = c[j];
        c2[P.dim + j] = -c[j];
        if (!c[j].is_zero()) has_obj = true;
    }
    if (has_obj) {
        tb.set_objective(c2);
        if (!tb.optimize(tb.art0)) {
            res.status = LpResult::Status::Unbounded;
            res.x = tb.primal();
            return res;
        }
    }
    res.status = LpResult::Status::Feasible;
    res.x = tb.primal();
    res.value = dot(c, res.x);
    if (!P.contains(res.x)) throw GeometryError("internal: simplex witness infeasible");
    return res;
}

LpResult lp_feasibility(const HPolyhedron& P) { return lp_maximize(P, zeros(P.dim)); }

bool check_farkas(const HPolyhedron& P, const Vec& y, const Vec& z) {
    if (y.size() != P.A.size() || z.size() != P.E.size()) return false;
    for (auto& v : y)
        if (v < 0) return false;
    Vec s = add(mat_t_vec(P.A, y, P.dim), mat_t_vec(P.E, z, P.dim));
    if (!is_zero(s)) return false;
    return dot(P.b, y) + dot(P.d, z) < 0;
}

HPolyhedron StrictCone::relaxed() const {
    HPolyhedron P(dim);
    for (auto& r : A) P.add_ineq(r, 0);
    for (auto& r : S) P.add_ineq(r, -1);
    for (auto& r : E) P.add_eq(r, 0);
    return P;
}

}  // namespace dircq
