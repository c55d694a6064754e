#include "dircq/problem.hpp"

#include <fstream>
#include <regex>
#include <sstream>

namespace dircq {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw SchemaError("field '" + where + "': " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) bad(where.empty() ? key : where + "." + key, "missing");
    return j.at(key);
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

Rational scalar(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const std::exception& e) {
            bad(where, std::string("not a rational: ") + e.what());
        }
    }
    bad(where, "expected an integer or a \"p/q\" string");
}

std::vector<std::string> names_from(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of names");
    std::vector<std::string> out;
    static const std::regex ident("[A-Za-z_][A-Za-z0-9_]*");
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string() || !std::regex_match(j[i].get<std::string>(), ident)) bad(at(where, i), "bad name");
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

Polynomial poly(const json& j, const std::vector<std::string>& names, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a polynomial string");
    try {
        return parse_polynomial(j.get<std::string>(), names);
    } catch (const ParseError& e) {
        bad(where, e.what());
    }
}

std::vector<Polynomial> polys(const json& j, const std::vector<std::string>& names, const std::string& where) {
    std::vector<Polynomial> out;
    if (j.is_null()) return out;
    if (!j.is_array()) bad(where, "expected an array of polynomials");
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(poly(j[i], names, at(where, i)));
    return out;
}

HPolyhedron polyhedron(const json& j, std::size_t dim, const std::string& where) {
    if (!j.is_object()) bad(where, "expected {\"A\", \"b\", \"E\", \"d\"}");
    HPolyhedron P(dim);
    auto rows = [&](const char* M, const char* r, bool eq) {
        if (!j.contains(M)) return;
        Mat A = mat_from_json(j.at(M), dim, where + "." + M);
        Vec rhs = zeros(A.size());
        if (j.contains(r)) rhs = vec_from_json(j.at(r), A.size(), where + "." + r);
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (eq) P.add_eq(A[i], rhs[i]);
            else P.add_ineq(A[i], rhs[i]);
        }
    };
    rows("A", "b", false);
    rows("E", "d", true);
    return P;
}

PolyUnion poly_union(const json& j, std::size_t dim, const std::string& where) {
    if (!j.is_array() || j.empty()) bad(where, "expected a nonempty array of pieces");
    PolyUnion U(dim);
    for (std::size_t i = 0; i < j.size(); ++i) U.pieces.push_back(polyhedron(j[i], dim, at(where, i)));
    return U;
}

// "{k}", "{k+1}", "{k-2}" are replaced by the integer value of the index expression
std::string instantiate(const std::string& text, const std::string& index, long k) {
    std::regex re("\\{" + index + "([+-][0-9]+)?\\}");
    std::string out;
    auto it = std::sregex_iterator(text.begin(), text.end(), re);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
        auto& m = *it;
        out += text.substr(last, m.position() - last);
        long v = k;
        if (m[1].matched) v += std::stol(m[1].str());
        if (v <= 0) throw SchemaError("template '" + text + "' gives a non-positive value at " + index + " = " +
                                      std::to_string(k));
        out += std::to_string(v);
        last = m.position() + m.length();
    }
    return out + text.substr(last);
}

PatchMap patch_block(const json& j, const std::vector<std::string>& xnames, const std::string& where,
                     const LoadOptions& opt, long& truncation) {
    PatchMap M;
    auto ynames = names_from(need(j, "outputs", where), where + ".outputs");
    M.nx = xnames.size();
    M.ny = ynames.size();
    M.names = xnames;
    M.names.insert(M.names.end(), ynames.begin(), ynames.end());
    const json& ps = need(j, "patches", where);
    if (!ps.is_array()) bad(where + ".patches", "expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        std::string w = at(where + ".patches", i);
        GraphPatch P;
        P.eq = polys(ps[i].value("eq", json()), M.names, w + ".eq");
        P.ineq = polys(ps[i].value("ineq", json()), M.names, w + ".ineq");
        M.patches.push_back(std::move(P));
    }
    if (j.contains("families")) {
        const json& fs = j.at("families");
        for (std::size_t f = 0; f < fs.size(); ++f) {
            std::string w = at(where + ".families", f);
            std::string index = fs[f].value("index", "k");
            long from = need(fs[f], "from", w).get<long>();
            long to = opt.truncate_K ? *opt.truncate_K : need(fs[f], "to", w).get<long>();
            if (to < from) bad(w, "empty index range");
            truncation = std::max(truncation, to);
            for (long k = from; k <= to; ++k) {
                GraphPatch P;
                for (const char* key : {"eq", "ineq"}) {
                    if (!fs[f].contains(key)) continue;
                    const json& arr = fs[f].at(key);
                    for (std::size_t r = 0; r < arr.size(); ++r) {
                        std::string text = instantiate(arr[r].get<std::string>(), index, k);
                        auto p = poly(json(text), M.names, at(w + "." + key, r));
                        (std::string(key) == "eq" ? P.eq : P.ineq).push_back(p);
                    }
                }
                M.patches.push_back(std::move(P));
            }
        }
    }
    if (M.patches.empty()) bad(where + ".patches", "no patches");
    return M;
}

AnalysisPoint point_from(const json& j, std::size_t nx, std::size_t ny, const std::string& where) {
    AnalysisPoint p;
    if (j.is_array()) {
        p.x = vec_from_json(j, nx, where);
    } else {
        p.x = vec_from_json(need(j, "x", where), nx, where + ".x");
        if (j.contains("y")) p.y = vec_from_json(j.at("y"), ny, where + ".y");
    }
    if (p.y.empty()) p.y = zeros(ny);
    return p;
}

}  // namespace

const char* kind_name(ProblemKind k) {
    switch (k) {
    case ProblemKind::Constraint:
        return "constraint";
    case ProblemKind::Patch:
        return "patch";
    case ProblemKind::Mpec:
        return "mpec";
    }
    return "?";
}

Vec vec_from_json(const json& j, std::size_t dim, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array");
    if (j.size() != dim) bad(where, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(scalar(j[i], at(where, i)));
    return v;
}

Mat mat_from_json(const json& j, std::size_t cols, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of rows");
    Mat m;
    for (std::size_t i = 0; i < j.size(); ++i) m.push_back(vec_from_json(j[i], cols, at(where, i)));
    return m;
}

ConeUnion cone_union_from_json(const json& j, std::size_t dim, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of cones");
    ConeUnion U(dim);
    for (std::size_t i = 0; i < j.size(); ++i) {
        HPolyhedron P = polyhedron(j[i], dim, at(where, i));
        for (auto& b : P.b)
            if (b != 0) bad(at(where, i), "cone rows need zero right-hand sides");
        for (auto& d : P.d)
            if (d != 0) bad(at(where, i), "cone rows need zero right-hand sides");
        U.pieces.push_back(PolyhedralCone::from(P));
    }
    return U;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

Problem load_problem(const json& j, const LoadOptions& opt) {
    if (!j.is_object()) bad("(root)", "expected an object");
    if (j.value("format", "") != "dircq-problem") bad("format", "expected \"dircq-problem\"");
    Problem pr;
    pr.version = need(j, "version", "").get<int>();
    if (pr.version != kProblemVersion) bad("version", "unsupported version " + std::to_string(pr.version));
    pr.name = j.value("name", "");
    int blocks = j.contains("constraint") + j.contains("patch") + j.contains("mpec");
    if (blocks != 1) bad("(root)", "exactly one of constraint, patch, mpec is required");

    if (j.contains("constraint")) {
        pr.kind = ProblemKind::Constraint;
        pr.xnames = names_from(need(j, "variables", ""), "variables");
        const json& c = j.at("constraint");
        pr.sys.g.names = pr.xnames;
        pr.sys.g.comps = polys(need(c, "g", "constraint"), pr.xnames, "constraint.g");
        if (pr.sys.g.comps.empty()) bad("constraint.g", "no components");
        pr.sys.D = poly_union(need(c, "D", "constraint"), pr.sys.m(), "constraint.D");
    } else if (j.contains("patch")) {
        pr.kind = ProblemKind::Patch;
        pr.xnames = names_from(need(j, "variables", ""), "variables");
        pr.map = patch_block(j.at("patch"), pr.xnames, "patch", opt, pr.truncation);
    } else {
        pr.kind = ProblemKind::Mpec;
        const json& m = j.at("mpec");
        const json& s = need(m, "S", "mpec");
        auto inputs = names_from(need(s, "inputs", "mpec.S"), "mpec.S.inputs");
        pr.S = patch_block(s, inputs, "mpec.S", opt, pr.truncation);
        pr.omega = poly_union(need(m, "omega", "mpec"), pr.S.nx, "mpec.omega");
        try {
            pr.map = mpec_assemble(pr.omega, pr.S);
        } catch (const GeometryError& e) {
            bad("mpec", e.what());
        }
        pr.xnames.assign(pr.map.names.begin(), pr.map.names.begin() + static_cast<long>(pr.map.nx));
    }

    if (j.contains("objective")) pr.objective = poly(j.at("objective"), pr.xnames, "objective");
    if (j.contains("points")) {
        const json& ps = j.at("points");
        for (std::size_t i = 0; i < ps.size(); ++i) pr.points.push_back(point_from(ps[i], pr.nx(), pr.ny(), at("points", i)));
    }
    if (pr.points.empty()) pr.points.push_back({zeros(pr.nx()), zeros(pr.ny())});
    if (pr.kind == ProblemKind::Constraint) pr.sys.xbar = pr.points.front().x;
    if (j.contains("directions")) {
        const json& ds = j.at("directions");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            Vec u = vec_from_json(ds[i], pr.nx(), at("directions", i));
            if (is_zero(u)) bad(at("directions", i), "direction must be nonzero");
            pr.directions.push_back(u);
        }
    }
    if (j.contains("basis")) pr.basis = mat_from_json(j.at("basis"), pr.ny(), "basis");
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        if (s.contains("coupling")) {
            std::string c = s.at("coupling").get<std::string>();
            if (c == "power") c += ":" + (s.contains("gamma") ? s.at("gamma").get<std::string>() : std::string("2"));
            try {
                pr.schedule = parse_schedule(c, pr.schedule);
            } catch (const SchemaError& e) {
                bad("schedule.coupling", e.what());
            }
        }
        if (s.contains("kmax")) pr.schedule.kmax = s.at("kmax").get<int>();
        if (pr.schedule.kmax < 2 || pr.schedule.kmax > 1000) bad("schedule.kmax", "out of range");
    }
    if (j.contains("declared")) {
        if (pr.kind == ProblemKind::Constraint) bad("declared", "only patch and mpec problems take declared cones");
        const json& ds = j.at("declared");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            std::string w = at("declared", i);
            DeclaredCones d;
            d.at = point_from(need(ds[i], "point", w), pr.nx(), pr.ny(), w + ".point");
            d.graph_normals = cone_union_from_json(need(ds[i], "graph_normal_cone", w), pr.nx() + pr.ny(),
                                                   w + ".graph_normal_cone");
            pr.declared.push_back(std::move(d));
        }
    }
    if (j.contains("penalty")) {
        const json& cs = need(j.at("penalty"), "C", "penalty");
        for (std::size_t i = 0; i < cs.size(); ++i) pr.penalty_C.push_back(scalar(cs[i], at("penalty.C", i)));
    }
    return pr;
}

Problem load_problem_file(const std::string& path, const LoadOptions& opt) {
    return load_problem(read_json_file(path), opt);
}

Schedule parse_schedule(const std::string& text, Schedule base) {
    if (text == "ratio-to-zero") {
        base.coupling = Coupling::RatioToZero;
    } else if (text == "ratio-to-inf") {
        base.coupling = Coupling::RatioToInf;
    } else if (text.rfind("power:", 0) == 0) {
        base.coupling = Coupling::Power;
        Rational g;
        try {
            g = parse_rational(text.substr(6));
        } catch (const std::exception&) {
            throw SchemaError("bad exponent in schedule '" + text + "'");
        }
        if (g <= 1) throw SchemaError("power schedule needs gamma > 1");
        base.gamma = to_double(g);
    } else {
        throw SchemaError("unknown schedule '" + text + "' (ratio-to-zero, ratio-to-inf, power:<gamma>)");
    }
    return base;
}

json schedule_json(const Schedule& s) {
    const char* c = s.coupling == Coupling::RatioToZero ? "ratio-to-zero"
                    : s.coupling == Coupling::RatioToInf ? "ratio-to-inf"
                                                          : "power";
    json j = {{"kmax", s.kmax},
              {"coupling", c},
              {"membership_tol", s.tol},
              {"residual_tol", s.residual_tol},
              {"window", s.window},
              {"slope", s.slope}};
    if (s.coupling == Coupling::Power) j["gamma"] = s.gamma;
    return j;
}

json cone_json(const PolyhedralCone& C) {
    auto K = canonical(C);
    auto g = enumerate_generators(K);
    json rows = json::array(), eqs = json::array(), rays = json::array(), lin = json::array();
    for (auto& a : K.A) rows.push_back(to_strings(a));
    for (auto& e : K.E) eqs.push_back(to_strings(e));
    for (auto& r : g.rays) rays.push_back(to_strings(r));
    for (auto& l : g.lineality) lin.push_back(to_strings(l));
    return {{"A", rows}, {"E", eqs}, {"rays", rays}, {"lineality", lin}, {"text", describe(K)}};
}

json cone_json(const ConeUnion& U) {
    auto S = simplify(U);
    json pieces = json::array();
    for (auto& p : S.pieces) pieces.push_back(cone_json(p));
    return {{"dim", U.dim}, {"empty", S.is_empty()}, {"pieces", pieces}, {"text", describe(S)}};
}

}  // namespace dircq
