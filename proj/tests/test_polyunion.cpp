#include "doctest.h"
#include "dircq/polyunion.hpp"

#include <random>

using namespace dircq;

namespace {

Vec V(std::initializer_list<long> xs) {
    Vec v;
    for (long x : xs) v.push_back(Rational(x));
    return v;
}

PolyhedralCone halfspace(Vec a) {
    PolyhedralCone c(a.size());
    c.add_ineq(std::move(a));
    return c;
}

// D = (R+ x R) u (R x R+)
PolyUnion cross_set() {
    PolyUnion D(2);
    HPolyhedron p1(2), p2(2);
    p1.add_ineq(V({-1, 0}), 0);
    p2.add_ineq(V({0, -1}), 0);
    D.pieces = {p1, p2};
    return D;
}

PolyhedralCone ray_cone(Vec r) {
    // cone generated by a single ray r in the plane
    PolyhedralCone c(2);
    c.add_eq(V({-r[1].convert_to<long>(), r[0].convert_to<long>()}));
    c.add_ineq(neg(r));
    return c;
}

Vec rand_vec(std::mt19937& rng, std::size_t n, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    Vec v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(Rational(d(rng)));
    return v;
}

}  // namespace

TEST_CASE("cross-shaped union: tangent and normal cones at the origin") {
    auto D = cross_set();
    Vec o = V({0, 0});
    auto T = tangent_cone(D, o);
    ConeUnion expectT(2);
    expectT.pieces = {halfspace(V({-1, 0})), halfspace(V({0, -1}))};
    CHECK(union_equal(T, simplify(expectT)));

    auto N = limiting_normal_cone(D, o);
    ConeUnion expectN(2);
    expectN.pieces = {ray_cone(V({-1, 0})), ray_cone(V({0, -1}))};
    CHECK(union_equal(N, expectN));

    auto Np = directional_limiting_normal_cone(D, o, V({1, 0}));
    CHECK(Np.is_origin_only());
    auto Nm = directional_limiting_normal_cone(D, o, V({-1, 0}));
    CHECK(union_equal(Nm, ConeUnion::single(ray_cone(V({0, -1})))));

    auto Nreg = regular_normal_cone(D, o);
    REQUIRE(Nreg.has_value());
    CHECK(is_origin(*Nreg));
}

TEST_CASE("empty marker differs from the origin") {
    auto D = cross_set();
    CHECK_FALSE(regular_normal_cone(D, V({-1, -1})).has_value());
    CHECK(limiting_normal_cone(D, V({-1, -1})).is_empty());
    CHECK(directional_limiting_normal_cone(D, V({0, 0}), V({-1, -1})).is_empty());
    ConeUnion origin = ConeUnion::single(PolyhedralCone::origin(2));
    CHECK_FALSE(union_equal(origin, ConeUnion::empty_set(2)));
    CHECK(union_subset(ConeUnion::empty_set(2), origin));
    CHECK_FALSE(union_subset(origin, ConeUnion::empty_set(2)));
}

TEST_CASE("normal graph of the cross-shaped union has eight cells") {
    auto G = normal_graph(cross_set(), V({0, 0}));
    CHECK(G.cells.size() == 8);
    int nontrivial = 0;
    for (auto& c : G.cells) {
        CHECK(c.primal.contains(c.witness));
        if (!is_origin(c.dual)) ++nontrivial;
    }
    CHECK(nontrivial == 2);
}

TEST_CASE("normal map of the half-line") {
    PolyUnion D(1);
    HPolyhedron p(1);
    p.add_ineq(V({1}), 0);
    D.pieces = {p};
    auto d1 = graphical_derivative_of_normal_map(D, V({0}), V({0}), V({-1}));
    CHECK(d1.is_origin_only());
    auto d0 = graphical_derivative_of_normal_map(D, V({0}), V({0}), V({0}));
    CHECK(d0.contains(V({5})));
    CHECK_FALSE(d0.contains(V({-1})));
    auto s1 = graphical_subderivative_of_normal_map(D, V({0}), V({0}), V({-1}));
    CHECK_FALSE(s1.nonzero_point().has_value());
    auto dout = graphical_derivative_of_normal_map(D, V({0}), V({0}), V({1}));
    CHECK(dout.is_empty());
}

TEST_CASE("conic subderivative on hand-built pieces") {
    // diagonal {(q,w): w = q}: (0,w) forces w = 0
    PolyhedralCone diag(2);
    diag.add_eq(V({1, -1}));
    CHECK_FALSE(conic_subderivative({diag}, 1, V({1})).nonzero_point().has_value());
    // {(q,w): w >= 0}: admissible w are the positive reals
    auto s = conic_subderivative({halfspace(V({0, -1}))}, 1, V({1}));
    CHECK(s.contains(V({2})));
    CHECK_FALSE(s.contains(V({-2})));
}

namespace {

// residual of the defining sequence at ratio R: min s with (u, R w') in Q, |u-v|,|w'-w| <= s
Rational sequence_residual(const PolyhedralCone& Q, std::size_t n, const Vec& v, const Vec& w, const Rational& R) {
    HPolyhedron L(2 * n + 1);
    auto lift = [&](const Vec& r) {
        Vec out = zeros(2 * n + 1);
        for (std::size_t i = 0; i < n; ++i) out[i] = r[i];
        for (std::size_t i = 0; i < n; ++i) out[n + i] = r[n + i] * R;
        return out;
    };
    for (auto& r : Q.A) L.add_ineq(lift(r), 0);
    for (auto& r : Q.E) L.add_eq(lift(r), 0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        Rational target = i < n ? v[i] : w[i - n];
        Vec up = unit(2 * n + 1, i), dn = neg(unit(2 * n + 1, i));
        up[2 * n] = -1;
        dn[2 * n] = -1;
        L.add_ineq(up, target);
        L.add_ineq(dn, -target);
    }
    auto r = lp_maximize(L, neg(unit(2 * n + 1, 2 * n)));
    if (r.status != LpResult::Status::Feasible) return Rational(1000);
    return -r.value;
}

}  // namespace

TEST_CASE("subderivative rule matches the defining sequences on 150 random pieces") {
    std::mt19937 rng(23);
    int members = 0, total = 0;
    for (int t = 0; t < 150; ++t) {
        std::size_t n = 1 + t % 2;
        PolyhedralCone Q(2 * n);
        int rows = 2 + t % 3;
        for (int k = 0; k < rows; ++k) Q.add_ineq(rand_vec(rng, 2 * n, -2, 2));
        Vec v = rand_vec(rng, n, -2, 2);
        std::vector<Vec> ws;
        PolyhedralCone sec(n);
        for (auto& r : Q.A) sec.add_ineq(Vec(r.begin() + n, r.end()));
        auto g = enumerate_generators(sec);
        for (auto& r : g.rays) ws.push_back(r);
        for (auto& l : g.lineality) ws.push_back(l);
        ws.push_back(rand_vec(rng, n, -2, 2));
        auto rule = conic_subderivative({Q}, n, v);
        for (auto& w : ws) {
            if (is_zero(w)) continue;
            ++total;
            bool claimed = rule.contains(w);
            Rational res = sequence_residual(Q, n, v, w, Rational(1 << 24));
            bool seq = res < Rational(1, 100000);
            CHECK(claimed == seq);
            if (claimed) ++members;
        }
    }
    CHECK(total >= 150);
    CHECK(members > 20);
}

TEST_CASE("convex polyhedra: directional normal cone equals N(y) cut by v-perp") {
    std::mt19937 rng(3);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 2 + t % 2;
        HPolyhedron P(n);
        Vec y = zeros(n);
        int rows = 2 + t % 3;
        for (int k = 0; k < rows; ++k) P.add_ineq(rand_vec(rng, n, -2, 2), Rational(int(rng() % 2)));
        PolyUnion D(n);
        D.pieces = {P};
        if (!D.contains(y)) continue;
        auto T = tangent_cone(D, y);
        auto N = *regular_normal_cone(D, y);
        auto gens = enumerate_generators(T.pieces[0]);
        std::vector<Vec> dirs = gens.rays;
        for (auto& l : gens.lineality) dirs.push_back(l);
        dirs.push_back(zeros(n));
        for (auto& v : dirs) {
            auto Nd = directional_limiting_normal_cone(D, y, v);
            PolyhedralCone cut = N;
            cut.add_eq(v);
            CHECK(union_equal(Nd, ConeUnion::single(cut)));
            // literal form: limiting normal cone of the tangent union at v
            CHECK(union_equal(Nd, limiting_normal_cone(PolyUnion::from(T), v)));
        }
    }
}

TEST_CASE("derivative of the normal map dominates nothing outside the directional normal cone") {
    std::mt19937 rng(31);
    for (int t = 0; t < 40; ++t) {
        PolyUnion D(2);
        for (int p = 0; p < 2; ++p) {
            HPolyhedron P(2);
            for (int k = 0; k < 2; ++k) P.add_ineq(rand_vec(rng, 2, -2, 2), 0);
            D.pieces.push_back(P);
        }
        Vec o = zeros(2);
        auto T = tangent_cone(D, o);
        auto A = build_arrangement(T);
        for (auto& c : A.cells) {
            auto dn = graphical_derivative_of_normal_map(D, o, zeros(2), c.witness);
            auto nd = directional_limiting_normal_cone(D, o, c.witness);
            CHECK(union_subset(dn, nd));
        }
    }
}
