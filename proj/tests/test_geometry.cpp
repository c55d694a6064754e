#include "doctest.h"
#include "dircq/geometry.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace dircq;

namespace {

Vec V(std::initializer_list<long> xs) {
    Vec v;
    for (long x : xs) v.push_back(Rational(x));
    return v;
}

Vec rand_row(std::mt19937& rng, std::size_t n, int lo = -3, int hi = 3) {
    std::uniform_int_distribution<int> d(lo, hi);
    Vec v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(Rational(d(rng)));
    return v;
}

// Dense double Gaussian solve for the vertex oracle.
bool solve_double(std::vector<std::vector<double>> M, std::vector<double> b, std::vector<double>& x) {
    std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c; r < n; ++r)
            if (std::fabs(M[r][c]) > std::fabs(M[p][c])) p = r;
        if (std::fabs(M[p][c]) < 1e-9) return false;
        std::swap(M[p], M[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = M[r][c] / M[c][c];
            for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
            b[r] -= f * b[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / M[i][i];
    return true;
}

// Independent floating-point oracle: a bounded polyhedron is nonempty iff some
// basic solution (n tight rows) satisfies every row.
bool vertex_oracle_feasible(const HPolyhedron& P) {
    std::size_t n = P.dim, m = P.A.size();
    std::vector<std::size_t> idx(n);
    std::vector<bool> sel(m, false);
    std::fill(sel.begin(), sel.begin() + n, true);
    std::sort(sel.begin(), sel.end(), std::greater<bool>());
    do {
        std::vector<std::vector<double>> M;
        std::vector<double> b;
        for (std::size_t i = 0; i < m; ++i)
            if (sel[i]) {
                M.push_back(to_double(P.A[i]));
                b.push_back(to_double(P.b[i]));
            }
        std::vector<double> x;
        if (!solve_double(M, b, x)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += to_double(P.A[i][j]) * x[j];
            if (s > to_double(P.b[i]) + 1e-7) ok = false;
        }
        if (ok) return true;
    } while (std::prev_permutation(sel.begin(), sel.end()));
    return false;
}

std::size_t brute_force_face_count(const PolyhedralCone& C) {
    std::set<std::vector<std::size_t>> faces;
    std::size_t m = C.A.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
        PolyhedralCone F(C.dim);
        for (std::size_t i = 0; i < m; ++i) {
            if (mask >> i & 1) F.add_eq(C.A[i]);
            else F.add_ineq(C.A[i]);
        }
        for (auto& e : C.E) F.add_eq(e);
        auto w = *relint_point(F);
        std::vector<std::size_t> tight;
        for (std::size_t i = 0; i < m; ++i)
            if (dot(C.A[i], w) == 0) tight.push_back(i);
        faces.insert(tight);
    }
    return faces.size();
}

}  // namespace

TEST_CASE("infeasible interval yields the expected Farkas vector") {
    HPolyhedron P(1);
    P.add_ineq(V({1}), 1);
    P.add_ineq(V({-1}), -2);
    auto r = lp_feasibility(P);
    REQUIRE(r.status == LpResult::Status::Infeasible);
    CHECK(r.farkas_ineq == V({1, 1}));
    CHECK(check_farkas(P, r.farkas_ineq, r.farkas_eq));
    Vec bad = r.farkas_ineq;
    bad[0] += 1;
    CHECK_FALSE(check_farkas(P, bad, r.farkas_eq));
}

TEST_CASE("feasible systems return a witness") {
    HPolyhedron P(2);
    P.add_ineq(V({1, 1}), 1);
    P.add_eq(V({1, -1}), 0);
    auto r = lp_feasibility(P);
    REQUIRE(r.status == LpResult::Status::Feasible);
    CHECK(P.contains(r.x));
    auto m = lp_maximize(P, V({1, 0}));
    CHECK(m.value == Rational(1, 2));
    auto u = lp_maximize(P, V({-1, 0}));
    CHECK(u.status == LpResult::Status::Unbounded);
}

TEST_CASE("exact LP agrees with the vertex oracle on 500 bounded instances") {
    std::mt19937 rng(7);
    int feasible = 0;
    for (int t = 0; t < 500; ++t) {
        std::size_t n = 1 + t % 3;
        HPolyhedron P(n);
        for (std::size_t i = 0; i < n; ++i) {
            P.add_ineq(unit(n, i), 10);
            P.add_ineq(neg(unit(n, i)), 10);
        }
        std::uniform_int_distribution<int> rhs(-6, 3);
        int extra = 1 + t % 4;
        for (int k = 0; k < extra; ++k) P.add_ineq(rand_row(rng, n), Rational(rhs(rng)));
        auto r = lp_feasibility(P);
        bool oracle = vertex_oracle_feasible(P);
        CHECK(r.feasible() == oracle);
        if (r.feasible()) {
            ++feasible;
            CHECK(P.contains(r.x));
        } else {
            CHECK(check_farkas(P, r.farkas_ineq, r.farkas_eq));
        }
    }
    CHECK(feasible > 50);
    CHECK(feasible < 480);
}

TEST_CASE("generators of a half-plane") {
    PolyhedralCone C(2);
    C.add_ineq(V({0, -1}));
    auto g = enumerate_generators(C);
    REQUIRE(g.rays.size() == 1);
    CHECK(g.rays[0] == V({0, 1}));
    REQUIRE(g.lineality.size() == 1);
    CHECK(g.lineality[0] == V({1, 0}));
}

TEST_CASE("generators of an orthant and of a pointed cone in 3D") {
    PolyhedralCone C(3);
    for (int i = 0; i < 3; ++i) C.add_ineq(neg(unit(3, i)));
    auto g = enumerate_generators(C);
    CHECK(g.rays.size() == 3);
    CHECK(g.lineality.empty());
    // square pyramid: |x| <= z, |y| <= z
    PolyhedralCone Q(3);
    Q.add_ineq(V({1, 0, -1}));
    Q.add_ineq(V({-1, 0, -1}));
    Q.add_ineq(V({0, 1, -1}));
    Q.add_ineq(V({0, -1, -1}));
    auto h = enumerate_generators(Q);
    CHECK(h.rays.size() == 4);
    for (auto& r : h.rays) CHECK(Q.contains(r));
}

TEST_CASE("faces of the nonnegative quadrant and of a half-plane") {
    PolyhedralCone C(2);
    C.add_ineq(V({-1, 0}));
    C.add_ineq(V({0, -1}));
    auto f = enumerate_faces(C);
    CHECK(f.size() == 4);
    for (auto& fc : f) CHECK(fc.face.contains(fc.relint_witness));
    PolyhedralCone H(2);
    H.add_ineq(V({0, -1}));
    CHECK(enumerate_faces(H).size() == 2);
}

TEST_CASE("polar of {u <= v}") {
    PolyhedralCone C(2);
    C.add_ineq(V({1, -1}));
    auto P = polar_cone(C);
    auto g = enumerate_generators(P);
    REQUIRE(g.rays.size() == 1);
    CHECK(g.rays[0] == V({1, -1}));
    CHECK(g.lineality.empty());
}

TEST_CASE("random cones: face counts, double polar, relint witnesses") {
    std::mt19937 rng(11);
    for (int t = 0; t < 120; ++t) {
        std::size_t n = 2 + t % 2;
        PolyhedralCone C(n);
        int m = 1 + t % 5;
        for (int k = 0; k < m; ++k) C.add_ineq(rand_row(rng, n, -2, 2));
        if (t % 7 == 0) C.add_eq(rand_row(rng, n, -1, 1));
        auto faces = enumerate_faces(C);
        CHECK(faces.size() == brute_force_face_count(C));
        for (auto& f : faces) {
            CHECK(C.contains(f.relint_witness));
            for (std::size_t i = 0; i < C.A.size(); ++i) {
                bool act = std::binary_search(f.active.begin(), f.active.end(), i);
                CHECK((dot(C.A[i], f.relint_witness) == 0) == act);
            }
        }
        CHECK(cone_equal(C, polar_cone(polar_cone(C))));
        auto g = enumerate_generators(C);
        for (auto& r : g.rays) CHECK(C.contains(r));
        for (auto& l : g.lineality) {
            CHECK(C.contains(l));
            CHECK(C.contains(neg(l)));
        }
    }
}

TEST_CASE("Fourier-Motzkin projection agrees with lifted LP membership") {
    std::mt19937 rng(5);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 3;
        HPolyhedron P(n);
        for (std::size_t i = 0; i < n; ++i) {
            P.add_ineq(unit(n, i), 4);
            P.add_ineq(neg(unit(n, i)), 4);
        }
        for (int k = 0; k < 3; ++k) P.add_ineq(rand_row(rng, n), Rational(int(rng() % 5) - 1));
        if (t % 5 == 0) P.add_eq(rand_row(rng, n, -1, 1), 0);
        auto Q = project_polyhedron(P, {0, 2});
        std::uniform_int_distribution<int> d(-10, 10);
        for (int s = 0; s < 25; ++s) {
            Vec y{Rational(d(rng), 2), Rational(d(rng), 2)};
            HPolyhedron L = P;
            L.add_eq(unit(n, 0), y[0]);
            L.add_eq(unit(n, 2), y[1]);
            CHECK(Q.contains(y) == lp_feasibility(L).feasible());
        }
    }
}

TEST_CASE("linear image and preimage of cones") {
    PolyhedralCone C(2);
    C.add_ineq(V({-1, 0}));
    C.add_ineq(V({0, -1}));
    Mat M{V({1, 1})};
    auto img = linear_image(C, M, 1);
    CHECK(img.contains(V({3})));
    CHECK_FALSE(img.contains(V({-1})));
    auto pre = preimage(img, M, 2);
    CHECK(pre.contains(V({-1, 2})));
    CHECK_FALSE(pre.contains(V({-1, 0})));
}
