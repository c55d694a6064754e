#pragma once

#include "dircq/varcalc.hpp"

#include <random>

namespace testsupport {

using namespace dircq;

inline Vec V(std::initializer_list<long> xs) {
    Vec v;
    for (long x : xs) v.push_back(Rational(x));
    return v;
}

inline Vec rand_vec(std::mt19937& rng, std::size_t n, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    Vec v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(Rational(d(rng)));
    return v;
}

inline PolyhedralCone halfspace(Vec a) {
    PolyhedralCone c(a.size());
    c.add_ineq(std::move(a));
    return c;
}

// D = (R+ x R) u (R x R+)
inline PolyUnion cross_set() {
    PolyUnion D(2);
    HPolyhedron p1(2), p2(2);
    p1.add_ineq(V({-1, 0}), 0);
    p2.add_ineq(V({0, -1}), 0);
    D.pieces = {p1, p2};
    return D;
}

// g(x) = (x, -x^2), D the cross set, xbar = 0
inline ConstraintSystem cross_system() {
    ConstraintSystem s;
    s.g = PolyMap::parse({"x", "-x^2"}, {"x"});
    s.D = cross_set();
    s.xbar = V({0});
    return s;
}

/// Random instance: n, m <= 3, quadratic g with g(0) = 0, D a union of <= 3 cones
/// with <= 4 inequalities each (so 0 = g(0) is in D), xbar = 0, and a nonzero direction u.
struct Instance {
    ConstraintSystem sys;
    Vec u;
};

inline Instance random_instance(std::mt19937& rng) {
    std::uniform_int_distribution<int> dim(1, 3), coef(-2, 2), pieces(1, 3), rows(1, 4);
    std::size_t n = dim(rng), m = dim(rng);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
    Instance I;
    I.sys.g.names = names;
    for (std::size_t j = 0; j < m; ++j) {
        Polynomial p(n);
        for (std::size_t i = 0; i < n; ++i) {
            Polynomial::Exponents e(n, 0);
            e[i] = 1;
            int c = coef(rng);
            if (c != 0 && rng() % 3 != 0) p.add_term(e, c);
            for (std::size_t k = i; k < n; ++k) {
                Polynomial::Exponents q(n, 0);
                q[i] += 1;
                q[k] += 1;
                int d = coef(rng);
                if (d != 0 && rng() % 2 == 0) p.add_term(q, d);
            }
        }
        I.sys.g.comps.push_back(p);
    }
    I.sys.D = PolyUnion(m);
    int np = pieces(rng);
    for (int k = 0; k < np; ++k) {
        HPolyhedron P(m);
        int nr = rows(rng);
        for (int r = 0; r < nr; ++r) {
            Vec a = rand_vec(rng, m, -2, 2);
            if (is_zero(a)) continue;
            if (rng() % 5 == 0)
                P.add_eq(a, 0);
            else
                P.add_ineq(a, 0);
        }
        I.sys.D.pieces.push_back(P);
    }
    I.sys.xbar = zeros(n);
    do {
        I.u = rand_vec(rng, n, -1, 1);
    } while (is_zero(I.u));
    return I;
}

inline PatchMap map_1d(std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> patches,
                       std::vector<std::string> names = {"x", "y"}) {
    PatchMap M;
    M.nx = M.ny = 1;
    M.names = names;
    for (auto& [eq, ineq] : patches) {
        GraphPatch P;
        for (auto& e : eq) P.eq.push_back(parse_polynomial(e, M.names));
        for (auto& q : ineq) P.ineq.push_back(parse_polynomial(q, M.names));
        M.patches.push_back(P);
    }
    return M;
}

// gph of x -> R (x <= 0), [x^2, inf) (x > 0), closed
inline PatchMap epigraph_switch() { return map_1d({{{}, {"x"}}, {{}, {"x^2 - y", "-x"}}}); }

// gph of x -> {0, x^2}
inline PatchMap parabola_or_zero() { return map_1d({{{"y"}, {}}, {{"y - x^2"}, {}}}); }

// S(t) = {-t^2} for t <= 0, {sqrt t} for t > 0
inline PatchMap switching_solution_map() {
    return map_1d({{{"s + t^2"}, {"t"}}, {{"t - s^2"}, {"-s"}}}, {"t", "s"});
}

// x1 in R_+, x2 in S(x1), assembled over (x1, x2, y1, y2)
inline PatchMap mpec_example() {
    PolyUnion Omega(1);
    HPolyhedron half(1);
    half.add_ineq(V({-1}), 0);
    Omega.pieces = {half};
    return mpec_assemble(Omega, switching_solution_map());
}

// x -> R (x <= 0), [x^2, inf) at x = 1/k for k <= K
inline PatchMap penalty_map(long K) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> ps = {{{}, {"x"}}};
    for (long k = 1; k <= K; ++k) ps.push_back({{"x - 1/" + std::to_string(k)}, {"x^2 - y"}});
    return map_1d(ps);
}

// x -> [x, inf) (x <= 0), [1/k - (x - 1/k)/k, inf) on [1/(k+1), 1/k], k <= K
inline PatchMap sawtooth_map(long K) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> ps = {{{}, {"x", "x - y"}}};
    for (long k = 1; k <= K; ++k) {
        std::string kk = std::to_string(k), k1 = std::to_string(k + 1);
        ps.push_back({{}, {"1/" + k1 + " - x", "x - 1/" + kk, "1/" + kk + " - (x - 1/" + kk + ")/" + kk + " - y"}});
    }
    return map_1d(ps);
}

}  // namespace testsupport
