#include "doctest.h"
#include "dircq/cqcheck.hpp"
#include "support.hpp"

using namespace dircq;
using namespace testsupport;

namespace {

Vec witness(const Verdict& v, const std::string& cond) {
    for (auto& c : v.conditions)
        if (c.name == cond) {
            Vec w;
            for (auto& s : c.certificate.at("witness")) w.push_back(parse_rational(s.get<std::string>()));
            return w;
        }
    return {};
}

const Condition& cond(const Verdict& v, const std::string& name) {
    for (auto& c : v.conditions)
        if (c.name == name) return c;
    throw std::runtime_error("missing condition " + name);
}

bool verifies(const ConstraintSystem& sys, const Verdict& v, const Polynomial* phi = nullptr) {
    std::string why;
    bool ok = verify_verdict(sys, to_json(v), why, phi);
    if (!ok) MESSAGE(why);
    return ok;
}

CheckOptions targets(std::vector<Vec> ts, LambdaMode mode = LambdaMode::Asym) {
    CheckOptions o;
    o.mode = mode;
    o.targets = std::move(ts);
    return o;
}

}  // namespace

TEST_CASE("cross system: first-order ladder") {
    auto sys = cross_system();
    Vec x = V({0});
    auto mord = mordukhovich(sys, x);
    CHECK(mord.status == Status::Fails);
    auto w = witness(mord, "kernel");
    REQUIRE(w.size() == 2);
    CHECK(primitive(w) == V({0, -1}));

    CHECK(foscms(sys, x, V({1})).status == Status::Holds);
    auto f = foscms(sys, x, V({-1}));
    CHECK(f.status == Status::Fails);
    CHECK(primitive(witness(f, "kernel")) == V({0, -1}));
    CHECK(soscms(sys, x, V({-1})).status == Status::Fails);
    CHECK(soscms(sys, x, V({1})).status == Status::Holds);
    CHECK_THROWS_AS(foscms(sys, x, V({0})), GeometryError);
    CHECK_THROWS_AS(mordukhovich(sys, V({-1})), GeometryError);

    for (auto* v : {&mord, &f}) CHECK(verifies(sys, *v));
}

TEST_CASE("cross system: polyhedral sufficient-condition checks") {
    auto sys = cross_system();
    Vec x = V({0});
    for (long u : {1L, -1L}) {
        auto a = check_thm_polyhedral_I(sys, x, V({u}));
        CHECK(a.status == Status::Holds);
        CHECK(verifies(sys, a));
        auto b = check_thm_polyhedral_II(sys, x, V({u}));
        CHECK(b.status == Status::Holds);
        CHECK(verifies(sys, b));
    }
    // STRONG mode at u = -1: negative multipliers x* have no lambda in N_T(grad g u)
    CheckOptions strong;
    strong.mode = LambdaMode::Strong;
    auto s = check_thm_polyhedral_I(sys, x, V({-1}), strong);
    CHECK(s.status == Status::Undecided);
    CHECK(cond(s, "cond").status == Status::Holds);
    CHECK(cond(s, "lambda").status == Status::Fails);
    CHECK(verifies(sys, s));
    auto st = check_thm_polyhedral_I(sys, x, V({-1}), targets({V({-1}), V({-3})}, LambdaMode::Strong));
    CHECK(cond(st, "lambda").status == Status::Fails);
    auto ok0 = check_thm_polyhedral_I(sys, x, V({-1}), targets({V({0})}, LambdaMode::Strong));
    CHECK(cond(ok0, "lambda").status == Status::Holds);
    auto asym = check_thm_polyhedral_I(sys, x, V({-1}), targets({V({-1}), V({-3})}));
    CHECK(cond(asym, "lambda").status == Status::Holds);
    CHECK(verifies(sys, st));
    CHECK(verifies(sys, asym));

    auto s1 = check_thm_polyhedral_I(sys, x, V({1}), strong);
    CHECK(s1.status == Status::Holds);
}

TEST_CASE("cross system: nonpolyhedral sufficient-condition check") {
    auto sys = cross_system();
    Vec x = V({0});
    auto up = check_thm_nonpolyhedral(sys, x, V({1}));
    CHECK(cond(up, "II").status == Status::Holds);
    CHECK(cond(up, "Ia").status == Status::Fails);
    CHECK(cond(up, "Ib").status == Status::Holds);
    CHECK(up.status == Status::Holds);
    auto down = check_thm_nonpolyhedral(sys, x, V({-1}));
    CHECK(cond(down, "Ia").status == Status::Fails);
    CHECK(cond(down, "Ib").status == Status::Fails);
    CHECK(down.status == Status::Undecided);
    CHECK(verifies(sys, up));
    CHECK(verifies(sys, down));
}

TEST_CASE("M-stationarity multipliers") {
    auto sys = cross_system();
    Vec x = V({0});
    auto phi = parse_polynomial("x", {"x"});
    auto v = mstationarity(sys, phi, x);
    CHECK(v.status == Status::Holds);
    auto& lam = v.conditions[0].certificate["lambda"]["witness"];
    CHECK(lam[0] == "-1");
    CHECK(lam[1] == "0");
    CHECK(verifies(sys, v, &phi));

    auto c = parse_polynomial("5", {"x"});
    auto v0 = mstationarity(sys, c, x);
    CHECK(v0.status == Status::Holds);

    // phi = x^2 - 3x over g(x) = x, D = R_-: grad phi = -3 needs lambda = 3 >= 0
    ConstraintSystem s;
    s.g = PolyMap::parse({"x"}, {"x"});
    s.D = PolyUnion(1);
    HPolyhedron P(1);
    P.add_ineq(V({1}), 0);
    s.D.pieces = {P};
    CHECK(mstationarity(s, parse_polynomial("x^2 - 3*x", {"x"}), V({0})).status == Status::Holds);
    auto bad = mstationarity(s, parse_polynomial("x", {"x"}), V({0}));
    CHECK(bad.status == Status::Fails);
    auto badphi = parse_polynomial("x", {"x"});
    CHECK(verifies(s, bad, &badphi));
}

TEST_CASE("verification rejects tampered certificates") {
    auto sys = cross_system();
    Vec x = V({0});
    auto phi = parse_polynomial("x", {"x"});
    std::string why;

    auto m = to_json(mstationarity(sys, phi, x));
    auto t = m;
    t["conditions"][0]["certificate"]["lambda"]["witness"][0] = "0";
    CHECK_FALSE(verify_verdict(sys, t, why, &phi));

    auto f = to_json(foscms(sys, x, V({1})));
    REQUIRE_FALSE(f["conditions"][0]["certificate"]["feasible"].get<bool>());
    auto tf = f;
    auto& y0 = tf["conditions"][0]["certificate"]["farkas"][0]["y"];
    REQUIRE(y0.size() > 0);
    y0[0] = to_string(parse_rational(y0[0].get<std::string>()) + 1);
    CHECK_FALSE(verify_verdict(sys, tf, why));
    auto ts = f;
    ts["status"] = "FAILS";
    CHECK_FALSE(verify_verdict(sys, ts, why));
    auto td = f;
    td["conditions"] = json::array();
    CHECK_FALSE(verify_verdict(sys, td, why));

    auto lam = to_json(check_thm_polyhedral_I(sys, x, V({-1}), targets({V({-1})})));
    auto tl = lam;
    auto& w = tl["conditions"][1]["certificate"]["entries"][0]["lambda"]["witness"];
    w[0] = to_string(parse_rational(w[0].get<std::string>()) + 1);
    CHECK_FALSE(verify_verdict(sys, tl, why));
    CHECK(verify_verdict(sys, lam, why));
}

TEST_CASE("kernel decisions agree with generator-based cone intersection") {
    std::mt19937 rng(5);
    for (int t = 0; t < 60; ++t) {
        auto I = random_instance(rng);
        const auto& sys = I.sys;
        bool trivial = !kernel_candidates(sys, sys.xbar, zeros(sys.n())).nonzero_point();
        CHECK((mordukhovich(sys, sys.xbar).status == Status::Holds) == trivial);
        bool dtrivial = !kernel_candidates(sys, sys.xbar, I.u).nonzero_point();
        CHECK((foscms(sys, sys.xbar, I.u).status == Status::Holds) == dtrivial);
    }
}

TEST_CASE("linear surjective g with convex D satisfies every sufficient-condition check") {
    ConstraintSystem s;
    s.g = PolyMap::parse({"x1 + x2", "x2"}, {"x1", "x2"});
    s.D = PolyUnion(2);
    HPolyhedron P(2);
    P.add_ineq(V({1, 1}), 0);
    P.add_ineq(V({-1, 2}), 0);
    s.D.pieces = {P};
    for (auto u : {V({1, 0}), V({-1, 1}), V({0, -1})}) {
        CHECK(check_thm_nonpolyhedral(s, V({0, 0}), u).status == Status::Holds);
        CHECK(check_thm_polyhedral_I(s, V({0, 0}), u).status == Status::Holds);
        CHECK(check_thm_polyhedral_II(s, V({0, 0}), u).status == Status::Holds);
    }
}

TEST_CASE("first-order condition with vanishing grad g u reduces to the Mordukhovich criterion") {
    std::mt19937 rng(17);
    int hits = 0;
    for (int t = 0; t < 200 && hits < 15; ++t) {
        auto I = random_instance(rng);
        Mat J = jacobian(I.sys.g, I.sys.xbar);
        auto ker = nullspace(J, I.sys.n());
        if (ker.empty()) continue;
        Vec u = ker[0];
        ++hits;
        CHECK(foscms(I.sys, I.sys.xbar, u).status == mordukhovich(I.sys, I.sys.xbar).status);
        auto th = check_thm_nonpolyhedral(I.sys, I.sys.xbar, u);
        CHECK_FALSE(cond(th, "Ib").applicable);
    }
    CHECK(hits >= 10);
}

TEST_CASE("meta-suites: first- and second-order conditions imply the sufficient-condition assumptions") {
    std::mt19937 rng(2024);
    int fos = 0, sos = 0, verified = 0;
    for (int t = 0; t < 120; ++t) {
        auto I = random_instance(rng);
        const auto& sys = I.sys;
        Vec x = sys.xbar;
        auto mord = mordukhovich(sys, x);
        auto f = foscms(sys, x, I.u);
        auto s = soscms(sys, x, I.u);
        if (mord.status == Status::Holds) CHECK(f.status == Status::Holds);
        if (f.status == Status::Holds) CHECK(s.status == Status::Holds);
        if (f.status == Status::Holds) {
            ++fos;
            for (auto mode : {LambdaMode::Asym, LambdaMode::Strong}) {
                CheckOptions o;
                o.mode = mode;
                auto th = check_thm_nonpolyhedral(sys, x, I.u, o);
                CHECK(th.status == Status::Holds);
            }
        }
        if (s.status == Status::Holds) {
            ++sos;
            for (auto mode : {LambdaMode::Asym, LambdaMode::Strong}) {
                CheckOptions o;
                o.mode = mode;
                auto b = check_thm_polyhedral_II(sys, x, I.u, o);
                CHECK(b.status == Status::Holds);
                o.restrict_nonneg = true;
                auto a = check_thm_polyhedral_I(sys, x, I.u, o);
                CHECK(a.status == Status::Holds);
                if (t % 10 == 0) {
                    CHECK(verifies(sys, a));
                    CHECK(verifies(sys, b));
                    ++verified;
                }
            }
        }
    }
    MESSAGE("FOSCMS instances: " << fos << ", SOSCMS instances: " << sos);
    CHECK(fos >= 30);
    CHECK(sos >= 30);
}
