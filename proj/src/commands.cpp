#include "dircq/commands.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace dircq {

namespace {

json vj(const Vec& v) { return to_strings(v); }

json opt_vj(const std::optional<Vec>& v) { return v ? vj(*v) : json(); }

Vec jv(const json& j) { return parse_vec(j.get<std::vector<std::string>>()); }

std::optional<Vec> opt_vec(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return jv(j.at(key));
}

Vec gradient_at(const Polynomial& p, const Vec& x) {
    Vec g;
    for (std::size_t i = 0; i < x.size(); ++i) g.push_back(p.derivative(i).eval(x));
    return g;
}

std::string now_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string vtext(const Vec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
    return s + ")";
}

std::string vtext(const json& j) {
    if (j.is_null()) return "-";
    return vtext(jv(j));
}

struct Context {
    Problem pr;
    RunConfig cfg;
    Schedule schedule;
    std::vector<AnalysisPoint> points;
    std::vector<Vec> directions;
    Mat basis;
};

Context resolve(const json& source, RunConfig cfg) {
    Context c;
    c.pr = load_problem(source, LoadOptions{cfg.truncate_K});
    const Problem& pr = c.pr;
    c.schedule = pr.schedule;
    if (cfg.schedule) c.schedule = parse_schedule(*cfg.schedule, c.schedule);
    if (cfg.kmax) {
        if (*cfg.kmax < 2 || *cfg.kmax > 1000) throw SchemaError("--kmax out of range");
        c.schedule.kmax = *cfg.kmax;
    }
    if (cfg.point) {
        if (cfg.point->size() != pr.nx()) throw SchemaError("--point needs " + std::to_string(pr.nx()) + " entries");
        AnalysisPoint p{*cfg.point, cfg.point_y ? *cfg.point_y : zeros(pr.ny())};
        if (p.y.size() != pr.ny()) throw SchemaError("--point-y needs " + std::to_string(pr.ny()) + " entries");
        c.points = {p};
    } else {
        c.points = pr.points;
    }
    c.directions = cfg.directions.empty() ? pr.directions : cfg.directions;
    for (auto& u : c.directions) {
        if (u.size() != pr.nx()) throw SchemaError("direction " + vtext(u) + " has the wrong length");
        if (is_zero(u)) throw SchemaError("direction must be nonzero");
    }
    if (cfg.targets.empty()) cfg.targets = pr.objective ? "objective" : "full";
    if (cfg.targets != "objective" && cfg.targets != "full") throw SchemaError("--targets is objective or full");
    if (cfg.targets == "objective" && !pr.objective) throw SchemaError("--targets objective needs an objective");
    if (!cfg.basis_matrix) {
        if (cfg.basis == "canonical") {
            cfg.basis_matrix = canonical_basis(pr.ny());
        } else if (cfg.basis == "file") {
            if (!pr.basis) throw SchemaError("--basis file: the problem declares no basis");
            cfg.basis_matrix = *pr.basis;
        } else {
            json b = read_json_file(cfg.basis);
            if (b.is_object() && b.contains("basis")) b = b.at("basis");
            cfg.basis_matrix = mat_from_json(b, pr.ny(), "basis");
        }
    }
    c.basis = *cfg.basis_matrix;
    if (!is_orthonormal(c.basis, pr.ny())) throw SchemaError("basis is not orthonormal");
    c.cfg = cfg;
    return c;
}

json point_json(const AnalysisPoint& p) { return {{"x", vj(p.x)}, {"y", vj(p.y)}}; }

json make_row(const AnalysisPoint& p, const Vec* u, const std::string& check, const std::string& status,
              bool counted) {
    json r;
    r["point"] = point_json(p);
    r["direction"] = u ? vj(*u) : json();
    r["check"] = check;
    r["status"] = status;
    r["counted"] = counted;
    return r;
}

json verdict_row(const AnalysisPoint& p, const Vec* u, const Verdict& v) {
    json r = make_row(p, u, v.check, status_name(v.status), true);
    r["verdict"] = to_json(v);
    return r;
}

Vec graph_point(const AnalysisPoint& p) { return concat(p.x, p.y); }

const DeclaredCones* declared_at(const Problem& pr, const AnalysisPoint& p) {
    for (auto& d : pr.declared)
        if (d.at.x == p.x && d.at.y == p.y) return &d;
    return nullptr;
}

// Limiting graph normals (directional when w is given): exact for linear maps, an upper bound otherwise.
std::pair<ConeUnion, std::string> computed_normals(const PatchMap& M, const Vec& pt, const Vec* w) {
    if (M.is_linear()) {
        PolyUnion D = M.as_polyunion();
        return {w ? directional_limiting_normal_cone(D, pt, *w) : limiting_normal_cone(D, pt), "exact"};
    }
    return {patch_normal_upper(M, pt, w ? *w : zeros(pt.size())), "upper bound"};
}

std::pair<ConeUnion, std::string> graph_normals(const Problem& pr, const AnalysisPoint& p, const Vec* w) {
    if (auto d = declared_at(pr, p)) return {d->graph_normals, w ? "declared (upper bound)" : "declared"};
    return computed_normals(pr.map, graph_point(p), w);
}

bool is_upper(const std::string& source) { return source.find("upper") != std::string::npos; }

// ---- cones

json cones_constraint(const Context& c, const AnalysisPoint& p, const Vec* u) {
    const auto& sys = c.pr.sys;
    Vec gbar = sys.g.eval(p.x);
    json r = make_row(p, u, "CONES", "COMPUTED", false);
    json& res = r["result"];
    res["g(xbar)"] = vj(gbar);
    if (!sys.D.contains(gbar)) {
        r["status"] = "INFEASIBLE";
        res["detail"] = "g(xbar) is not in D";
        return r;
    }
    auto T = tangent_cone(sys.D, gbar);
    if (!u) {
        res["tangent_cone"] = cone_json(T);
        res["regular_normal_cone"] = cone_json(ConeUnion::single(*regular_normal_cone(sys.D, gbar)));
        res["limiting_normal_cone"] = cone_json(limiting_normal_cone(sys.D, gbar));
        json J = json::array();
        for (auto& row : jacobian(sys.g, p.x)) J.push_back(vj(row));
        res["jacobian"] = J;
        return r;
    }
    Vec w = mat_vec(jacobian(sys.g, p.x), *u);
    res["grad_g_u"] = vj(w);
    res["second_order"] = vj(second_order_vector(sys.g, p.x, *u));
    bool tangent = T.contains(w);
    res["in_tangent_cone"] = tangent;
    if (!tangent) return r;
    res["tangent_cone_of_tangent_cone"] = cone_json(tangent_cone(PolyUnion::from(T), w));
    res["normal_cone_of_tangent_cone"] = cone_json(build_arrangement(T).limiting_normal_at(w));
    res["directional_normal_cone"] = cone_json(directional_limiting_normal_cone(sys.D, gbar, w));
    res["kernel_candidates"] = cone_json(kernel_candidates(sys, p.x, *u));
    return r;
}

json cones_patch(const Context& c, const AnalysisPoint& p, const Vec* u) {
    const Problem& pr = c.pr;
    Vec pt = graph_point(p);
    json r = make_row(p, u, "CONES", "COMPUTED", false);
    json& res = r["result"];
    if (!pr.map.contains(pt)) {
        r["status"] = "INFEASIBLE";
        res["detail"] = "point is off the graph";
        return r;
    }
    try {
        if (!u) {
            bool lin = pr.map.is_linear();
            res["source"] = lin ? "exact" : "linearized patches";
            if (lin) {
                PolyUnion D = pr.map.as_polyunion();
                res["tangent_cone"] = cone_json(tangent_cone(D, pt));
                res["regular_normal_cone"] = cone_json(ConeUnion::single(*regular_normal_cone(D, pt)));
            } else {
                res["tangent_cone"] = cone_json(patch_tangent_cone(pr.map, pt));
                res["regular_normal_cone"] = cone_json(ConeUnion::single(*patch_regular_normal_cone(pr.map, pt)));
            }
            auto [N, source] = computed_normals(pr.map, pt, nullptr);
            res["limiting_normal_cone"] = cone_json(N);
            res["limiting_normal_source"] = source;
            res["coderivative_image"] = cone_json(coderivative_image(N, pr.nx(), pr.ny()));
            res["coderivative_kernel"] = cone_json(coderivative_kernel(N, pr.nx(), pr.ny()));
            if (auto d = declared_at(pr, p)) {
                res["declared_normal_cone"] = cone_json(d->graph_normals);
                res["declared_coderivative_image"] = cone_json(coderivative_image(d->graph_normals, pr.nx(), pr.ny()));
            }
            if (pr.kind == ProblemKind::Mpec)
                res["solution_map_tangent_cone"] = cone_json(pr.S.is_linear() ? tangent_cone(pr.S.as_polyunion(), p.x)
                                                                             : patch_tangent_cone(pr.S, p.x));
            return r;
        }
        Vec w = concat(*u, zeros(pr.ny()));
        res["graph_direction"] = vj(w);
        auto [N, source] = computed_normals(pr.map, pt, &w);
        res["directional_normal_cone"] = cone_json(N);
        res["source"] = source;
        res["coderivative_image"] = cone_json(coderivative_image(N, pr.nx(), pr.ny()));
        res["coderivative_kernel"] = cone_json(coderivative_kernel(N, pr.nx(), pr.ny()));
    } catch (const RegularityError& e) {
        r["status"] = "IRREGULAR";
        res["detail"] = e.what();
    }
    return r;
}

// ---- cq

Verdict patch_kernel_verdict(const std::string& name, const Context& c, const AnalysisPoint& p, const Vec* u) {
    const Problem& pr = c.pr;
    Verdict v;
    v.check = name;
    v.inputs = {{"check", name}, {"point", vj(p.x)}, {"y", vj(p.y)}};
    if (u) v.inputs["direction"] = vj(*u);
    if (!pr.map.contains(graph_point(p))) throw GeometryError("point " + vtext(graph_point(p)) + " is off the graph");
    Vec w;
    if (u) w = concat(*u, zeros(pr.ny()));
    auto [N, source] = graph_normals(pr, p, u ? &w : nullptr);
    auto K = coderivative_kernel(N, pr.nx(), pr.ny());
    auto nz = K.nonzero_point();
    Condition k;
    k.name = "kernel";
    k.detail = describe(K);
    k.status = !nz ? Status::Holds : (is_upper(source) ? Status::Undecided : Status::Fails);
    k.certificate = {{"source", source}, {"normals", cone_json(N)}, {"kernel", cone_json(K)}};
    if (nz) k.certificate["witness"] = vj(*nz);
    v.conditions.push_back(k);
    v.status = k.status;
    v.note = !nz ? "only the zero multiplier has a zero coderivative value"
                 : (is_upper(source) ? "a nonzero kernel element exists in an upper bound of the normal cone"
                                     : "nonzero multiplier with zero coderivative value");
    return v;
}

std::vector<std::string> expand_checks(const std::vector<std::string>& req, ProblemKind kind) {
    const std::vector<std::string> all_c = {"MORD", "FOSCMS", "SOSCMS", "THM53", "THM54", "THM55", "PSEUDO", "QUASI"};
    const std::vector<std::string> all_p = {"MORD", "FOSCMS", "PSEUDO", "QUASI"};
    const auto& all = kind == ProblemKind::Constraint ? all_c : all_p;
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (auto& r : req) {
        if (r == "ALL") {
            for (auto& s : all) add(s);
        } else if (r == "NORMALITY") {
            add("PSEUDO");
            add("QUASI");
        } else if (std::find(all_c.begin(), all_c.end(), r) != all_c.end()) {
            if (std::find(all.begin(), all.end(), r) == all.end())
                throw SchemaError("check " + r + " needs a constraint problem");
            add(r);
        } else {
            throw SchemaError("unknown check '" + r + "'");
        }
    }
    // evaluation order follows the ladder, not the order on the command line
    std::vector<std::string> ordered;
    for (auto& s : all)
        if (std::find(out.begin(), out.end(), s) != out.end()) ordered.push_back(s);
    return ordered;
}

json run_cq(const Context& c) {
    const Problem& pr = c.pr;
    auto checks = expand_checks(c.cfg.checks, pr.kind);
    json rows = json::array();
    for (auto& p : c.points) {
        CheckOptions opt;
        opt.mode = c.cfg.mode;
        if (c.cfg.targets == "objective") opt.targets = std::vector<Vec>{neg(gradient_at(*pr.objective, p.x))};
        for (auto& ch : checks) {
            if (ch == "MORD") {
                if (pr.kind == ProblemKind::Constraint) rows.push_back(verdict_row(p, nullptr, mordukhovich(pr.sys, p.x)));
                else rows.push_back(verdict_row(p, nullptr, patch_kernel_verdict("MORD", c, p, nullptr)));
                continue;
            }
            if (c.directions.empty()) throw SchemaError("check " + ch + " needs at least one direction");
            for (auto& u : c.directions) {
                Verdict v;
                if (pr.kind == ProblemKind::Constraint) {
                    if (ch == "FOSCMS") v = foscms(pr.sys, p.x, u);
                    else if (ch == "SOSCMS") v = soscms(pr.sys, p.x, u);
                    else if (ch == "THM53") v = check_thm_nonpolyhedral(pr.sys, p.x, u, opt);
                    else if (ch == "THM54") v = check_thm_polyhedral_I(pr.sys, p.x, u, opt);
                    else if (ch == "THM55") v = check_thm_polyhedral_II(pr.sys, p.x, u, opt);
                    else
                        v = pseudo_quasi_verdict(pr.sys, p.x, u, ch == "PSEUDO" ? NormalityKind::Pseudo : NormalityKind::Quasi,
                                                 c.basis, c.schedule);
                } else if (ch == "FOSCMS") {
                    v = patch_kernel_verdict("FOSCMS", c, p, &u);
                } else {
                    if (!is_zero(p.y)) throw SchemaError("normality checks on patch maps need y = 0");
                    v = pseudo_quasi_verdict(pr.map, p.x, u, ch == "PSEUDO" ? NormalityKind::Pseudo : NormalityKind::Quasi,
                                             c.basis, c.schedule);
                }
                rows.push_back(verdict_row(p, &u, v));
            }
        }
    }
    return rows;
}

// ---- mstat

// lambda with (-grad phi, -lambda) in some piece of N
Family multiplier_family(const ConeUnion& N, const Vec& gphi, std::size_t nx, std::size_t ny) {
    Family f;
    f.name = "multiplier";
    auto split = [&](const Vec& a, Vec& ay) {
        Rational rhs = 0;
        for (std::size_t j = 0; j < nx; ++j) rhs += a[j] * gphi[j];
        for (std::size_t j = 0; j < ny; ++j) ay.push_back(-a[nx + j]);
        return rhs;
    };
    for (std::size_t i = 0; i < N.pieces.size(); ++i) {
        Subsystem s;
        s.label = "piece " + std::to_string(i);
        s.P = HPolyhedron(ny);
        for (auto& a : N.pieces[i].A) {
            Vec ay;
            Rational rhs = split(a, ay);
            s.P.add_ineq(ay, rhs);
        }
        for (auto& e : N.pieces[i].E) {
            Vec ay;
            Rational rhs = split(e, ay);
            s.P.add_eq(ay, rhs);
        }
        f.systems.push_back(std::move(s));
    }
    return f;
}

Family patch_mstat_family(const Context& c, const AnalysisPoint& p, std::string* source = nullptr) {
    auto [N, src] = graph_normals(c.pr, p, nullptr);
    if (source) *source = src;
    return multiplier_family(N, gradient_at(*c.pr.objective, p.x), c.pr.nx(), c.pr.ny());
}

Verdict patch_mstat(const Context& c, const AnalysisPoint& p) {
    const Problem& pr = c.pr;
    Verdict v;
    v.check = "MSTAT";
    v.inputs = {{"check", "MSTAT"}, {"point", vj(p.x)}, {"y", vj(p.y)}};
    if (!pr.map.contains(graph_point(p))) throw GeometryError("point " + vtext(graph_point(p)) + " is off the graph");
    std::string source;
    auto f = patch_mstat_family(c, p, &source);
    json cert = solve_family(f);
    bool feas = family_feasible(cert);
    Condition m;
    m.name = "multiplier";
    m.status = feas ? (is_upper(source) ? Status::Undecided : Status::Holds) : Status::Fails;
    m.detail = "graph normal cone: " + source;
    m.certificate = {{"source", source}, {"grad_phi", vj(gradient_at(*pr.objective, p.x))}, {"lambda", cert}};
    v.conditions.push_back(m);
    v.status = m.status;
    v.note = feas ? "multiplier lambda = " + vtext(cert.at("witness")) : "no multiplier in any normal piece";
    return v;
}

std::vector<Rational> penalty_grid(const Context& c) {
    if (!c.cfg.C.empty()) return c.cfg.C;
    if (!c.pr.penalty_C.empty()) return c.pr.penalty_C;
    return {Rational(1), Rational(10), Rational(100)};
}

json penalty_rows(const Context& c, const AnalysisPoint& p, const Vec& u) {
    const Problem& pr = c.pr;
    if (pr.nx() != 1 || pr.ny() != 1) throw SchemaError("the penalty demo needs one input and one output");
    if (!pr.objective) throw SchemaError("the penalty demo needs an objective");
    json rows = json::array();
    for (auto& row : penalty_failure_demo(pr.map, *pr.objective, p.x, p.y, u, penalty_grid(c))) {
        json r = make_row(p, &u, "PENALTY", row.first_k > 0 ? "REPORTED" : "NOT_REACHED", false);
        r["result"] = {{"C", to_string(row.C)}, {"first_k", row.first_k}, {"value", to_string(row.value)}};
        rows.push_back(r);
    }
    return rows;
}

json run_mstat(const Context& c) {
    const Problem& pr = c.pr;
    if (!pr.objective) throw SchemaError("mstat needs an objective");
    json rows = json::array();
    for (auto& p : c.points) {
        if (pr.kind == ProblemKind::Constraint) {
            json r = verdict_row(p, nullptr, mstationarity(pr.sys, *pr.objective, p.x));
            r["critical_directions"] = cone_json(critical_cells(pr.sys, *pr.objective, p.x));
            rows.push_back(r);
        } else {
            rows.push_back(verdict_row(p, nullptr, patch_mstat(c, p)));
            if (!pr.penalty_C.empty() || !c.cfg.C.empty()) {
                std::vector<Vec> dirs = c.directions.empty() ? std::vector<Vec>{Vec{Rational(1)}} : c.directions;
                for (auto& u : dirs)
                    for (auto& r : penalty_rows(c, p, u)) rows.push_back(r);
            }
        }
    }
    return rows;
}

// ---- oracle

Status witness_status(const WitnessSequence& w) {
    if (w.found) return Status::Fails;
    if (w.trace.is_object() && w.trace.value("exhausted", false)) return Status::HoldsByOracleExhaustion;
    return Status::Undecided;
}

json run_oracle(const Context& c) {
    const Problem& pr = c.pr;
    const std::string& probe = c.cfg.probe;
    bool constraint = pr.kind == ProblemKind::Constraint;
    json rows = json::array();
    if (probe != "asym" && probe != "normality" && probe != "coderivative" && probe != "sample" && probe != "penalty")
        throw SchemaError("unknown probe '" + probe + "'");
    if (c.directions.empty()) throw SchemaError("oracle probes need at least one direction");
    for (auto& p : c.points) {
        for (auto& u : c.directions) {
            if (probe == "asym") {
                if (constraint) throw SchemaError("the asym probe needs a patch or mpec problem");
                auto w = search_asym_reg_violation(pr.map, p.x, p.y, u, c.schedule);
                json r = make_row(p, &u, "ASYM-REG", status_name(w.found ? Status::Fails : Status::Undecided), true);
                r["witness"] = w.to_json();
                rows.push_back(r);
            } else if (probe == "normality") {
                if (!c.cfg.lambda) throw SchemaError("the normality probe needs --lambda");
                if (c.cfg.lambda->size() != pr.ny()) throw SchemaError("--lambda has the wrong length");
                auto kind = c.cfg.kind == "quasi" ? NormalityKind::Quasi : NormalityKind::Pseudo;
                if (c.cfg.kind != "quasi" && c.cfg.kind != "pseudo") throw SchemaError("--kind is pseudo or quasi");
                WitnessSequence w = constraint
                                        ? search_normality_violation(pr.sys, p.x, u, *c.cfg.lambda, kind, c.basis, c.schedule)
                                        : search_normality_violation(pr.map, p.x, u, *c.cfg.lambda, kind, c.basis, c.schedule);
                json r = make_row(p, &u, c.cfg.kind == "quasi" ? "QUASI-WITNESS" : "PSEUDO-WITNESS",
                                  status_name(witness_status(w)), true);
                r["witness"] = w.to_json();
                rows.push_back(r);
            } else if (probe == "coderivative") {
                if (constraint) throw SchemaError("the coderivative probe needs a patch or mpec problem");
                if (!c.cfg.v || !c.cfg.ystar) throw SchemaError("the coderivative probe needs --v and --ystar");
                if (c.cfg.v->size() != pr.ny() || c.cfg.ystar->size() != pr.ny())
                    throw SchemaError("--v and --ystar need " + std::to_string(pr.ny()) + " entries");
                auto e = probe_pseudo_or_super_coderivative(pr.map, p.x, p.y, u, *c.cfg.v, *c.cfg.ystar, c.schedule,
                                                            c.cfg.gfrerer);
                json r = make_row(p, &u, "CODERIVATIVE", e.settled ? "SETTLED" : "UNSETTLED", false);
                r["evidence"] = e.to_json();
                rows.push_back(r);
            } else if (probe == "sample") {
                PolyUnion D;
                Vec base, dir;
                if (constraint) {
                    D = pr.sys.D;
                    base = pr.sys.g.eval(p.x);
                    dir = mat_vec(jacobian(pr.sys.g, p.x), u);
                } else {
                    if (!pr.map.is_linear()) throw SchemaError("normal sampling needs a linear patch map");
                    D = pr.map.as_polyunion();
                    base = graph_point(p);
                    dir = concat(u, zeros(pr.ny()));
                }
                auto ns = sample_directional_normals(D, base, dir, c.schedule);
                bool agree = ns.all_inside && ns.max_gap <= 1e-6;
                json r = make_row(p, &u, "SAMPLE", status_name(agree ? Status::Holds : Status::Fails), true);
                json normals = json::array();
                for (auto& g : ns.normals) normals.push_back(vj(g));
                r["result"] = {{"exact", cone_json(ns.exact)},
                               {"samples", normals},
                               {"all_inside", ns.all_inside},
                               {"max_gap", ns.max_gap},
                               {"diagnostic", ns.diagnostic}};
                rows.push_back(r);
            } else {
                if (constraint) throw SchemaError("the penalty demo needs a patch problem");
                for (auto& r : penalty_rows(c, p, u)) rows.push_back(r);
            }
        }
    }
    return rows;
}

// ---- exact re-checks used by verify

WitnessRecord record_from(const json& j) {
    WitnessRecord r;
    r.k = j.at("k").get<int>();
    r.x = jv(j.at("x"));
    r.y = jv(j.at("y"));
    r.xstar = jv(j.at("xstar"));
    r.lambda = jv(j.at("lambda"));
    r.exact = j.at("exact").get<bool>();
    return r;
}

// Every record of a sign-condition sequence for a constraint system, checked in rational arithmetic.
bool check_constraint_records(const ConstraintSystem& sys, const json& w, bool quasi, const Mat& basis,
                              std::string& why) {
    const json& recs = w.at("records");
    if (recs.empty()) {
        why = "witness has no records";
        return false;
    }
    Vec cand = jv(w.at("limit_ystar"));
    for (auto& rj : recs) {
        auto r = record_from(rj);
        std::string at = "record k = " + std::to_string(r.k) + ": ";
        Vec z = sub(sys.g.eval(r.x), r.y);
        if (!sys.D.contains(z)) {
            why = at + "g(x) - y is not in D";
            return false;
        }
        auto N = regular_normal_cone(sys.D, z);
        if (!N || !N->contains(r.lambda)) {
            why = at + "lambda is not a regular normal";
            return false;
        }
        if (mat_t_vec(jacobian(sys.g, r.x), r.lambda, sys.n()) != r.xstar) {
            why = at + "eta differs from grad g^T lambda";
            return false;
        }
        bool sign = true;
        if (!quasi) {
            sign = dot(cand, r.y) > 0;
        } else {
            for (auto& e : basis) {
                Rational l = dot(cand, e);
                if (l != 0 && l * dot(r.y, e) <= 0) sign = false;
            }
        }
        if (!sign) {
            why = at + "sign condition fails";
            return false;
        }
    }
    return true;
}

void exact_checks(const Context& c, const json& row, const std::string& tag, std::vector<std::string>& fails) {
    const Problem& pr = c.pr;
    std::string check = row.at("check").get<std::string>();
    std::string status = row.at("status").get<std::string>();
    std::string why;
    auto fail = [&](const std::string& what) { fails.push_back(tag + ": " + what); };
    bool constraint = pr.kind == ProblemKind::Constraint;
    AnalysisPoint p{jv(row.at("point").at("x")), jv(row.at("point").at("y"))};
    static const std::vector<std::string> ladder = {"MORD", "FOSCMS", "SOSCMS", "THM53", "THM54", "THM55", "MSTAT"};

    if (row.contains("verdict")) {
        const json& v = row.at("verdict");
        if (v.at("status") != row.at("status")) fail("row status differs from the verdict");
        if (constraint && std::find(ladder.begin(), ladder.end(), check) != ladder.end()) {
            const Polynomial* phi = pr.objective ? &*pr.objective : nullptr;
            if (!verify_verdict(pr.sys, v, why, phi)) fail(why);
            return;
        }
        if (constraint && (check == "PSEUDO" || check == "QUASI")) {
            Mat basis = v.at("inputs").contains("basis") ? mat_from_json(v.at("inputs").at("basis"), pr.ny(), "basis")
                                                         : c.basis;
            for (auto& cond : v.at("conditions")) {
                if (cond.at("name") == "kernel") {
                    if (!verify_verdict(pr.sys, cond.at("certificate"), why)) fail("kernel: " + why);
                } else if (cond.at("status") == "FAILS") {
                    if (!check_constraint_records(pr.sys, cond.at("certificate"), check == "QUASI", basis, why))
                        fail(cond.at("name").get<std::string>() + ": " + why);
                }
            }
            return;
        }
        if (!constraint && (check == "MORD" || check == "FOSCMS") && status == "FAILS") {
            const json& cert = v.at("conditions").at(0).at("certificate");
            Vec wit = jv(cert.at("witness"));
            Vec w;
            Vec* up = nullptr;
            if (!row.at("direction").is_null()) {
                w = concat(jv(row.at("direction")), zeros(pr.ny()));
                up = &w;
            }
            auto K = coderivative_kernel(graph_normals(pr, p, up).first, pr.nx(), pr.ny());
            if (is_zero(wit) || !K.contains(wit)) fail("kernel witness is not a nonzero kernel element");
            return;
        }
        if (!constraint && check == "MSTAT") {
            const json& cert = v.at("conditions").at(0).at("certificate").at("lambda");
            if (!check_family(patch_mstat_family(c, p), cert, why)) fail(why);
            return;
        }
        return;
    }
    if (check == "ASYM-REG" && status == "FAILS") {
        std::vector<WitnessRecord> recs;
        for (auto& r : row.at("witness").at("records")) recs.push_back(record_from(r));
        auto w = replay_asym_reg_witness(pr.map, p.x, p.y, jv(row.at("direction")), recs, c.schedule);
        if (!w.found) fail("witness replay rejected: " + w.conclusion);
        return;
    }
    if (constraint && (check == "PSEUDO-WITNESS" || check == "QUASI-WITNESS") && status == "FAILS") {
        if (!check_constraint_records(pr.sys, row.at("witness"), check == "QUASI-WITNESS", c.basis, why)) fail(why);
    }
}

std::string row_tag(std::size_t i, const json& row) {
    std::ostringstream os;
    os << "row " << i << " (" << row.value("check", "?");
    if (row.contains("point")) os << " at x = " << vtext(row["point"].value("x", json()));
    if (row.contains("direction") && !row["direction"].is_null()) os << ", u = " << vtext(row["direction"]);
    os << ")";
    return os.str();
}

json build_report(const std::string& command, const json& source, const Context& c, json rows) {
    json rep;
    rep["format"] = "dircq-report";
    rep["report_version"] = kReportVersion;
    rep["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    rep["timestamp"] = now_utc();
    rep["command"] = command;
    rep["config"] = c.cfg.to_json();
    rep["schedule"] = schedule_json(c.schedule);
    rep["problem_summary"] = {{"name", c.pr.name},
                              {"kind", kind_name(c.pr.kind)},
                              {"nx", c.pr.nx()},
                              {"ny", c.pr.ny()},
                              {"patches", c.pr.kind == ProblemKind::Constraint ? 0 : c.pr.map.patches.size()},
                              {"truncation", c.pr.truncation}};
    rep["problem"] = source;
    json summary = json::object();
    for (auto& r : rows) {
        std::string s = r.at("status").get<std::string>();
        summary[s] = summary.value(s, 0) + 1;
    }
    rep["rows"] = std::move(rows);
    rep["summary"] = summary;
    rep["exit_code"] = report_exit_code(rep);
    return rep;
}

}  // namespace

json RunConfig::to_json() const {
    json j;
    j["point"] = opt_vj(point);
    j["point_y"] = opt_vj(point_y);
    json ds = json::array();
    for (auto& d : directions) ds.push_back(vj(d));
    j["directions"] = ds;
    j["checks"] = checks;
    j["mode"] = mode == LambdaMode::Asym ? "asym" : "strong";
    j["targets"] = targets;
    j["basis"] = basis;
    if (basis_matrix) {
        json b = json::array();
        for (auto& r : *basis_matrix) b.push_back(vj(r));
        j["basis_matrix"] = b;
    }
    j["schedule"] = schedule ? json(*schedule) : json();
    j["kmax"] = kmax ? json(*kmax) : json();
    j["truncate_K"] = truncate_K ? json(*truncate_K) : json();
    j["probe"] = probe;
    j["kind"] = kind;
    j["lambda"] = opt_vj(lambda);
    j["v"] = opt_vj(v);
    j["ystar"] = opt_vj(ystar);
    j["gfrerer"] = gfrerer;
    json cs = json::array();
    for (auto& x : C) cs.push_back(to_string(x));
    j["C"] = cs;
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    c.point = opt_vec(j, "point");
    c.point_y = opt_vec(j, "point_y");
    for (auto& d : j.at("directions")) c.directions.push_back(jv(d));
    c.checks = j.at("checks").get<std::vector<std::string>>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode != "asym" && mode != "strong") throw SchemaError("config mode must be asym or strong");
    c.mode = mode == "asym" ? LambdaMode::Asym : LambdaMode::Strong;
    c.targets = j.at("targets").get<std::string>();
    c.basis = j.at("basis").get<std::string>();
    if (j.contains("basis_matrix")) {
        Mat b;
        for (auto& r : j.at("basis_matrix")) b.push_back(jv(r));
        c.basis_matrix = b;
    }
    if (!j.at("schedule").is_null()) c.schedule = j.at("schedule").get<std::string>();
    if (!j.at("kmax").is_null()) c.kmax = j.at("kmax").get<int>();
    if (!j.at("truncate_K").is_null()) c.truncate_K = j.at("truncate_K").get<long>();
    c.probe = j.at("probe").get<std::string>();
    c.kind = j.at("kind").get<std::string>();
    c.lambda = opt_vec(j, "lambda");
    c.v = opt_vec(j, "v");
    c.ystar = opt_vec(j, "ystar");
    c.gfrerer = j.at("gfrerer").get<bool>();
    for (auto& x : j.at("C")) c.C.push_back(parse_rational(x.get<std::string>()));
    return c;
}

json run_command(const std::string& command, const json& problem_source, RunConfig cfg) {
    Context c = resolve(problem_source, std::move(cfg));
    json rows = json::array();
    if (command == "cones") {
        for (auto& p : c.points) {
            auto one = [&](const Vec* u) {
                return c.pr.kind == ProblemKind::Constraint ? cones_constraint(c, p, u) : cones_patch(c, p, u);
            };
            rows.push_back(one(nullptr));
            for (auto& u : c.directions) rows.push_back(one(&u));
        }
    } else if (command == "cq") {
        rows = run_cq(c);
    } else if (command == "mstat") {
        rows = run_mstat(c);
    } else if (command == "oracle") {
        rows = run_oracle(c);
    } else {
        throw SchemaError("unknown command '" + command + "'");
    }
    return build_report(command, problem_source, c, std::move(rows));
}

int report_exit_code(const json& report) {
    bool fails = false, undecided = false;
    for (auto& r : report.at("rows")) {
        if (!r.value("counted", false)) continue;
        std::string s = r.at("status").get<std::string>();
        if (s == "FAILS") fails = true;
        else if (s != "HOLDS" && s != "HOLDS_BY_ORACLE_EXHAUSTION") undecided = true;
    }
    return fails ? 1 : (undecided ? 2 : 0);
}

VerifyResult verify_report(const json& report) {
    VerifyResult res;
    auto fail = [&](const std::string& s) {
        res.ok = false;
        res.failures.push_back(s);
    };
    if (!report.is_object() || report.value("format", "") != "dircq-report") {
        fail("not a dircq report");
        return res;
    }
    if (report.value("report_version", 0) != kReportVersion) {
        fail("unsupported report version");
        return res;
    }
    json fresh;
    Context c;
    try {
        RunConfig cfg = RunConfig::from_json(report.at("config"));
        fresh = run_command(report.at("command").get<std::string>(), report.at("problem"), cfg);
        c = resolve(report.at("problem"), cfg);
    } catch (const std::exception& e) {
        fail(std::string("rerun failed: ") + e.what());
        return res;
    }
    const json& rows = report.at("rows");
    const json frows = json::parse(fresh.at("rows").dump());
    if (rows.size() != frows.size()) {
        fail("report has " + std::to_string(rows.size()) + " rows, the rerun has " + std::to_string(frows.size()));
        return res;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string tag = row_tag(i, rows[i]);
        try {
            exact_checks(c, rows[i], tag, res.failures);
        } catch (const std::exception& e) {
            res.failures.push_back(tag + ": certificate check threw: " + e.what());
        }
        if (rows[i] != frows[i]) {
            json d = json::diff(rows[i], frows[i]);
            std::string path = d.empty() ? "" : d[0].value("path", "");
            std::string got = "(absent)", want = "(absent)";
            json::json_pointer ptr(path);
            if (rows[i].contains(ptr)) got = rows[i].at(ptr).dump();
            if (frows[i].contains(ptr)) want = frows[i].at(ptr).dump();
            auto clip = [](std::string s) { return s.size() > 200 ? s.substr(0, 200) + "..." : s; };
            res.failures.push_back(tag + ": differs from the rerun at " + path + ": reported " + clip(got) +
                                   ", recomputed " + clip(want));
        }
    }
    for (const char* key : {"schedule", "problem_summary", "summary", "exit_code"}) {
        if (!report.contains(key) || report.at(key) != json::parse(fresh.at(key).dump()))
            res.failures.push_back(std::string("field '") + key + "' differs from the rerun");
    }
    if (report.value("exit_code", -1) != report_exit_code(report))
        res.failures.push_back("exit_code does not match the row statuses");
    res.ok = res.failures.empty();
    return res;
}

std::string render_text(const json& report) {
    std::ostringstream os;
    const json& ps = report.at("problem_summary");
    os << kToolName << " " << report.at("command").get<std::string>() << ": " << ps.value("name", "")
       << " (" << ps.value("kind", "") << ", n = " << ps.value("nx", 0) << ", m = " << ps.value("ny", 0);
    if (ps.value("truncation", -1L) > 0) os << ", K = " << ps.value("truncation", -1L);
    os << ")\n";
    for (auto& r : report.at("rows")) {
        std::string where = "x = " + vtext(r.at("point").at("x"));
        if (!r.at("point").at("y").empty() && ps.value("kind", "") != "constraint")
            where += " y = " + vtext(r.at("point").at("y"));
        os << "  " << std::left << std::setw(24) << where << std::setw(14) << "u = " + vtext(r.at("direction"))
           << std::setw(15) << r.at("check").get<std::string>() << r.at("status").get<std::string>();
        if (r.contains("verdict") && r["verdict"].contains("note")) os << "  " << r["verdict"]["note"].get<std::string>();
        os << "\n";
        if (r.contains("result")) {
            for (auto& [k, v] : r["result"].items()) {
                if (v.is_object() && v.contains("text")) os << "      " << k << ": " << v["text"].get<std::string>() << "\n";
                else if (!v.is_object()) os << "      " << k << ": " << v.dump() << "\n";
            }
        }
        if (r.contains("witness")) {
            const json& w = r["witness"];
            os << "      " << w.value("kind", "") << ": " << w.value("conclusion", "") << " ("
               << w.at("records").size() << " records)\n";
        }
        if (r.contains("evidence")) os << "      limit: " << vtext(r["evidence"]["limit"]) << "\n";
        if (r.contains("critical_directions"))
            os << "      critical directions: " << r["critical_directions"]["text"].get<std::string>() << "\n";
    }
    os << "  summary: " << report.at("summary").dump() << "  exit " << report.at("exit_code").get<int>() << "\n";
    return os.str();
}

}  // namespace dircq
