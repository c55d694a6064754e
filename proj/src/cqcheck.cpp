#include "dircq/cqcheck.hpp"

#include <algorithm>
#include <set>

namespace dircq {

const char* status_name(Status s) {
    switch (s) {
        case Status::Holds: return "HOLDS";
        case Status::Fails: return "FAILS";
        case Status::Undecided: return "UNDECIDED";
        case Status::HoldsByOracleExhaustion: return "HOLDS_BY_ORACLE_EXHAUSTION";
    }
    return "UNDECIDED";
}

Status parse_status(const std::string& s) {
    if (s == "HOLDS") return Status::Holds;
    if (s == "FAILS") return Status::Fails;
    if (s == "HOLDS_BY_ORACLE_EXHAUSTION") return Status::HoldsByOracleExhaustion;
    return Status::Undecided;
}

namespace {

json vec_json(const Vec& v) { return to_strings(v); }

Vec json_vec(const json& j) {
    Vec v;
    for (auto& s : j) v.push_back(parse_rational(s.get<std::string>()));
    return v;
}

}  // namespace

json solve_family(const Family& f) {
    json out;
    out["family"] = f.name;
    out["systems"] = f.systems.size();
    json farkas = json::array();
    for (std::size_t i = 0; i < f.systems.size(); ++i) {
        auto r = lp_feasibility(f.systems[i].P);
        if (r.feasible()) {
            out["feasible"] = true;
            out["index"] = i;
            out["label"] = f.systems[i].label;
            out["witness"] = vec_json(r.x);
            return out;
        }
        farkas.push_back({{"label", f.systems[i].label}, {"y", vec_json(r.farkas_ineq)}, {"z", vec_json(r.farkas_eq)}});
    }
    out["feasible"] = false;
    out["farkas"] = farkas;
    return out;
}

bool family_feasible(const json& cert) { return cert.at("feasible").get<bool>(); }

bool check_family(const Family& f, const json& cert, std::string& why) {
    try {
        if (cert.at("family").get<std::string>() != f.name) {
            why = "family name mismatch: " + f.name;
            return false;
        }
        if (cert.at("systems").get<std::size_t>() != f.systems.size()) {
            why = f.name + ": number of subsystems differs from the regenerated family";
            return false;
        }
        if (family_feasible(cert)) {
            std::size_t i = cert.at("index").get<std::size_t>();
            if (i >= f.systems.size()) {
                why = f.name + ": witness index out of range";
                return false;
            }
            Vec w = json_vec(cert.at("witness"));
            if (w.size() != f.systems[i].P.dim || !f.systems[i].P.contains(w)) {
                why = f.name + ": witness violates subsystem " + f.systems[i].label;
                return false;
            }
            return true;
        }
        auto& fk = cert.at("farkas");
        if (fk.size() != f.systems.size()) {
            why = f.name + ": missing Farkas certificates";
            return false;
        }
        for (std::size_t i = 0; i < f.systems.size(); ++i) {
            const auto& P = f.systems[i].P;
            Vec y = json_vec(fk[i].at("y")), z = json_vec(fk[i].at("z"));
            if (y.size() != P.A.size() || z.size() != P.E.size() || !check_farkas(P, y, z)) {
                why = f.name + ": Farkas certificate rejected for subsystem " + f.systems[i].label;
                return false;
            }
        }
        return true;
    } catch (const std::exception& e) {
        why = f.name + ": malformed certificate (" + e.what() + ")";
        return false;
    }
}

json to_json(const Verdict& v) {
    json j;
    j["check"] = v.check;
    j["status"] = status_name(v.status);
    j["inputs"] = v.inputs;
    if (!v.note.empty()) j["note"] = v.note;
    json conds = json::array();
    for (auto& c : v.conditions) {
        json cj;
        cj["name"] = c.name;
        cj["applicable"] = c.applicable;
        cj["status"] = status_name(c.status);
        if (!c.detail.empty()) cj["detail"] = c.detail;
        cj["certificate"] = c.certificate;
        conds.push_back(cj);
    }
    j["conditions"] = conds;
    return j;
}

namespace {

Vec embed(const Vec& a, std::size_t offset, std::size_t dim) {
    Vec r = zeros(dim);
    for (std::size_t i = 0; i < a.size(); ++i) r[offset + i] = a[i];
    return r;
}

void add_cone(HPolyhedron& P, const PolyhedralCone& C, std::size_t off) {
    for (auto& a : C.A) P.add_ineq(embed(a, off, P.dim), 0);
    for (auto& e : C.E) P.add_eq(embed(e, off, P.dim), 0);
}

void add_face(HPolyhedron& P, const PolyhedralCone& C, const Face& F, std::size_t off, bool relint) {
    std::set<std::size_t> act(F.active.begin(), F.active.end());
    for (std::size_t r = 0; r < C.A.size(); ++r) {
        if (act.count(r))
            P.add_eq(embed(C.A[r], off, P.dim), 0);
        else
            P.add_ineq(embed(C.A[r], off, P.dim), relint ? Rational(-1) : Rational(0));
    }
    for (auto& e : C.E) P.add_eq(embed(e, off, P.dim), 0);
}

// z in T_C(y) for y in the relative interior of F
void add_face_tangent(HPolyhedron& P, const PolyhedralCone& C, const Face& F, std::size_t off) {
    for (auto r : F.active) P.add_ineq(embed(C.A[r], off, P.dim), 0);
    for (auto& e : C.E) P.add_eq(embed(e, off, P.dim), 0);
}

bool has_strict(const PolyhedralCone& C, const Face& F) { return F.active.size() < C.A.size(); }

std::vector<Subsystem> nonzero_split(const Subsystem& base, std::size_t off, std::size_t len) {
    std::vector<Subsystem> out;
    for (std::size_t i = 0; i < len; ++i) {
        for (int s : {1, -1}) {
            Subsystem c = base;
            Vec row = zeros(base.P.dim);
            row[off + i] = -s;
            c.P.add_ineq(row, -1);
            c.label += s > 0 ? " +" : " -";
            c.label += std::to_string(off + i);
            out.push_back(std::move(c));
        }
    }
    return out;
}

Vec json_vec_or_empty(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return {};
    return json_vec(j[key]);
}

struct Engine {
    std::string check;
    const ConstraintSystem& sys;
    Vec xbar, u;
    CheckOptions opt;
    std::size_t n = 0, m = 0;
    Vec gbar, q, g2;
    Mat J, Hu;
    ConeUnion T, N, Nq;
    NormalGraphModel G;
    std::vector<std::pair<std::string, PolyhedralCone>> coupled_cones, range_cones;

    Engine(std::string c, const ConstraintSystem& s, Vec x, Vec dir, CheckOptions o)
        : check(std::move(c)), sys(s), xbar(std::move(x)), u(std::move(dir)), opt(std::move(o)) {
        n = sys.n();
        m = sys.m();
        if (xbar.size() != n) throw GeometryError("point has wrong dimension");
        gbar = sys.g.eval(xbar);
        if (!sys.D.contains(gbar)) throw GeometryError("infeasible point: g(x) is not in D");
        J = jacobian(sys.g, xbar);
        T = tangent_cone(sys.D, gbar);
        N = limiting_normal_cone(sys.D, gbar);
        if (!u.empty()) {
            if (u.size() != n) throw GeometryError("direction has wrong dimension");
            if (is_zero(u)) throw GeometryError("direction must be nonzero");
            q = mat_vec(J, u);
            g2 = second_order_vector(sys.g, xbar, u);
            Hu.assign(n, zeros(m));
            for (std::size_t j = 0; j < m; ++j) {
                Vec col = mat_vec(hessian_scalarized(sys.g, xbar, unit(m, j)), u);
                for (std::size_t i = 0; i < n; ++i) Hu[i][j] = col[i];
            }
            Nq = directional_limiting_normal_cone(sys.D, gbar, q);
        }
        if (check == "THM53") {
            G = normal_graph(sys.D, gbar);
            for (std::size_t i = 0; i < G.cells.size(); ++i)
                if (G.cells[i].primal.contains(q))
                    coupled_cones.push_back({"cell " + std::to_string(i), G.cells[i].dual});
            range_cones = coupled_cones;
        } else if (check == "THM54") {
            for (std::size_t j = 0; j < Nq.pieces.size(); ++j)
                coupled_cones.push_back({"piece " + std::to_string(j), Nq.pieces[j]});
            range_cones = coupled_cones;
        } else if (check == "THM55") {
            setup_second_order();
        }
    }

    void add_ker(HPolyhedron& P, std::size_t off) const {
        for (std::size_t i = 0; i < n; ++i) {
            Vec row = zeros(P.dim);
            for (std::size_t j = 0; j < m; ++j) row[off + j] = J[j][i];
            P.add_eq(row, 0);
        }
    }

    // Hu y + J^T z = t on the (y, z) block
    void add_coupling(HPolyhedron& P, const Vec& t) const {
        for (std::size_t i = 0; i < n; ++i) {
            Vec row = zeros(P.dim);
            for (std::size_t j = 0; j < m; ++j) {
                row[j] = Hu[i][j];
                row[m + j] = J[j][i];
            }
            P.add_eq(row, t[i]);
        }
    }

    Mat range_map() const {
        Mat M(n, zeros(2 * m));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                M[i][j] = Hu[i][j];
                M[i][m + j] = J[j][i];
            }
        return M;
    }

    void setup_second_order() {
        ConeUnion TT = tangent_cone(PolyUnion::from(T), q);
        Arrangement A = build_arrangement(TT);
        std::vector<bool> reach(A.cells.size(), false);
        for (std::size_t f = 0; f < A.cells.size(); ++f) {
            // exists s, r > 0 with J s + r g2 / 2 in the relative interior of cell f
            StrictCone sc(n + 1);
            for (std::size_t h = 0; h < A.hyperplanes.size(); ++h) {
                const Vec& a = A.hyperplanes[h];
                Vec row = zeros(n + 1);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < m; ++j) row[i] += a[j] * J[j][i];
                row[n] = dot(a, g2) / 2;
                int s = A.cells[f].sign[h];
                if (s == 0)
                    sc.E.push_back(row);
                else
                    sc.S.push_back(s < 0 ? row : neg(row));
            }
            sc.S.push_back(neg(unit(n + 1, n)));
            reach[f] = lp_feasibility(sc.relaxed()).feasible();
        }
        auto push_unique = [](std::vector<std::pair<std::string, PolyhedralCone>>& v, std::string label,
                              const PolyhedralCone& K) {
            for (auto& [l, C] : v)
                if (C.A == K.A && C.E == K.E) return;
            v.push_back({std::move(label), K});
        };
        for (std::size_t b = 0; b < A.cells.size(); ++b) {
            bool above_reachable = false;
            for (std::size_t f = 0; f < A.cells.size() && !above_reachable; ++f)
                if (reach[f] && A.below(f, b)) above_reachable = true;
            if (above_reachable) push_unique(coupled_cones, "cell " + std::to_string(b), A.cells[b].dual);
            push_unique(range_cones, "cell " + std::to_string(b), A.cells[b].dual);
        }
    }

    Family kernel_family(const ConeUnion& C, bool second_order, const std::string& name) const {
        Family f{name, {}};
        for (std::size_t j = 0; j < C.pieces.size(); ++j) {
            Subsystem s{"piece " + std::to_string(j), HPolyhedron(m)};
            add_cone(s.P, C.pieces[j], 0);
            add_ker(s.P, 0);
            if (second_order) s.P.add_ineq(neg(g2), 0);
            for (auto& t : nonzero_split(s, 0, m)) f.systems.push_back(std::move(t));
        }
        return f;
    }

    // nonzero y: J^T y = 0, Hu y + J^T z = 0, y in relint F, z in T_K(F), F a face of K
    Family coupled_family(const std::string& name) const {
        Family f{name, {}};
        for (auto& [label, K] : coupled_cones) {
            auto faces = enumerate_faces(K);
            for (std::size_t k = 0; k < faces.size(); ++k) {
                Subsystem s{label + " face " + std::to_string(k), HPolyhedron(2 * m)};
                add_face(s.P, K, faces[k], 0, true);
                add_face_tangent(s.P, K, faces[k], m);
                add_ker(s.P, 0);
                add_coupling(s.P, zeros(n));
                if (has_strict(K, faces[k]))
                    f.systems.push_back(std::move(s));
                else
                    for (auto& t : nonzero_split(s, 0, m)) f.systems.push_back(std::move(t));
            }
        }
        return f;
    }

    // nonzero z in ker J^T with z in T_K(F), y in relint F (and in a piece of Nq when all_cells)
    Family hat_family(const std::string& name, bool all_cells) const {
        Family f{name, {}};
        for (std::size_t i = 0; i < G.cells.size(); ++i) {
            const auto& K = G.cells[i].dual;
            if (!all_cells && !G.cells[i].primal.contains(q)) continue;
            auto faces = enumerate_faces(K);
            std::size_t npieces = all_cells ? Nq.pieces.size() : 1;
            for (std::size_t j = 0; j < npieces; ++j) {
                for (std::size_t k = 0; k < faces.size(); ++k) {
                    std::string label = "cell " + std::to_string(i) + " face " + std::to_string(k);
                    if (all_cells) label += " piece " + std::to_string(j);
                    Subsystem s{label, HPolyhedron(2 * m)};
                    add_face(s.P, K, faces[k], 0, true);
                    if (all_cells) add_cone(s.P, Nq.pieces[j], 0);
                    add_face_tangent(s.P, K, faces[k], m);
                    add_ker(s.P, 0);
                    add_ker(s.P, m);
                    for (auto& t : nonzero_split(s, m, m)) f.systems.push_back(std::move(t));
                }
            }
        }
        return f;
    }

    struct RangePiece {
        std::string label;
        HPolyhedron P;  // closed system on (y, z)
    };

    std::vector<RangePiece> range_pieces() const {
        std::vector<RangePiece> out;
        for (auto& [label, K] : range_cones) {
            auto faces = enumerate_faces(K);
            for (std::size_t k = 0; k < faces.size(); ++k) {
                HPolyhedron gate(2 * m), closed(2 * m);
                for (int pass = 0; pass < 2; ++pass) {
                    HPolyhedron& P = pass == 0 ? gate : closed;
                    add_face(P, K, faces[k], 0, pass == 0);
                    add_face_tangent(P, K, faces[k], m);
                    add_ker(P, 0);
                    if (check == "THM55") P.add_ineq(embed(neg(g2), 0, 2 * m), 0);
                    if (opt.restrict_nonneg) {
                        Mat M = range_map();
                        Vec row = zeros(2 * m);
                        for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t c = 0; c < 2 * m; ++c) row[c] -= u[i] * M[i][c];
                        P.add_ineq(row, 0);
                    }
                }
                if (!lp_feasibility(gate).feasible()) continue;
                out.push_back({label + " face " + std::to_string(k), closed});
            }
        }
        return out;
    }

    Family range_family(const Vec& target) const {
        Family f{"range", {}};
        for (auto& rp : range_pieces()) {
            Subsystem s{rp.label, rp.P};
            add_coupling(s.P, target);
            f.systems.push_back(std::move(s));
        }
        return f;
    }

    ConeUnion range_union() const {
        ConeUnion U(n);
        Mat M = range_map();
        for (auto& rp : range_pieces()) U.pieces.push_back(linear_image(PolyhedralCone::from(rp.P), M, n));
        if (opt.restrict_nonneg) {
            PolyhedralCone h(n);
            h.add_ineq(neg(u));
            U = intersect(U, h);
        }
        return simplify(U);
    }

    const ConeUnion& lambda_cones() const {
        if (check == "MSTAT" || opt.mode == LambdaMode::Asym) return N;
        return Nq;
    }

    Family lambda_family(const Vec& target) const {
        Family f{"multiplier", {}};
        const auto& L = lambda_cones();
        for (std::size_t j = 0; j < L.pieces.size(); ++j) {
            Subsystem s{"piece " + std::to_string(j), HPolyhedron(m)};
            add_cone(s.P, L.pieces[j], 0);
            for (std::size_t i = 0; i < n; ++i) {
                Vec row = zeros(m);
                for (std::size_t k = 0; k < m; ++k) row[k] = J[k][i];
                s.P.add_eq(row, target[i]);
            }
            f.systems.push_back(std::move(s));
        }
        return f;
    }

    ConeUnion lambda_union() const {
        ConeUnion U(n);
        Mat Jt = transpose(J, n);
        for (auto& p : lambda_cones().pieces) U.pieces.push_back(linear_image(p, Jt, n));
        return simplify(U);
    }

    Family condition_family(const std::string& name) const {
        if (name == "kernel") {
            if (check == "MORD") return kernel_family(N, false, "kernel");
            return kernel_family(Nq, check == "SOSCMS", "kernel");
        }
        if (name == "II" || name == "cond") return coupled_family(name);
        if (name == "Ia") return hat_family(name, true);
        if (name == "Ib") return hat_family(name, false);
        throw GeometryError("unknown condition " + name);
    }

    bool target_in_halfspace(const Vec& t) const { return !opt.restrict_nonneg || dot(t, u) >= 0; }

    // lambda-hypothesis for one target: HOLDS when the target is outside the range or has a multiplier
    json target_entry(const Vec& t, Status& st) const {
        json e;
        e["target"] = vec_json(t);
        if (!target_in_halfspace(t)) {
            e["outside_halfspace"] = true;
            st = Status::Holds;
            return e;
        }
        e["range"] = solve_family(range_family(t));
        if (!family_feasible(e["range"])) {
            st = Status::Holds;
            return e;
        }
        e["lambda"] = solve_family(lambda_family(t));
        st = family_feasible(e["lambda"]) ? Status::Holds : Status::Fails;
        return e;
    }

    bool check_target_entry(const json& e, Status& st, std::string& why) const {
        Vec t = json_vec(e.at("target"));
        if (t.size() != n) {
            why = "target has wrong dimension";
            return false;
        }
        if (e.value("outside_halfspace", false)) {
            if (target_in_halfspace(t)) {
                why = "target claimed outside the halfspace but <x*,u> >= 0";
                return false;
            }
            st = Status::Holds;
            return true;
        }
        if (!check_family(range_family(t), e.at("range"), why)) return false;
        if (!family_feasible(e["range"])) {
            st = Status::Holds;
            return true;
        }
        if (!check_family(lambda_family(t), e.at("lambda"), why)) return false;
        st = family_feasible(e["lambda"]) ? Status::Holds : Status::Fails;
        return true;
    }

    Condition lambda_condition() const {
        Condition c;
        c.name = "lambda";
        if (opt.targets) {
            json entries = json::array();
            c.status = Status::Holds;
            for (auto& t : *opt.targets) {
                if (t.size() != n) throw GeometryError("target has wrong dimension");
                Status st;
                entries.push_back(target_entry(t, st));
                if (st == Status::Fails) c.status = Status::Fails;
            }
            c.certificate = {{"kind", "targets"}, {"entries", entries}};
            return c;
        }
        Vec cex;
        ConeUnion X1 = range_union(), X2 = lambda_union();
        if (union_subset(X1, X2, &cex)) {
            c.status = Status::Holds;
            c.detail = "range " + describe(X1) + " is covered by multiplier images " + describe(X2);
            c.certificate = {{"kind", "inclusion"}};
            return c;
        }
        cex = primitive(cex);
        Status st;
        json e = target_entry(cex, st);
        c.status = st;
        c.detail = "x* = (" + [&] {
            std::string s;
            for (auto& r : cex) s += (s.empty() ? "" : ", ") + to_string(r);
            return s;
        }() + ") has no multiplier";
        c.certificate = {{"kind", "inclusion"}, {"counterexample", e}};
        return c;
    }

    Condition family_condition(const std::string& name, const std::string& fname) const {
        Condition c;
        c.name = name;
        c.certificate = solve_family(condition_family(fname));
        c.status = family_feasible(c.certificate) ? Status::Fails : Status::Holds;
        if (family_feasible(c.certificate))
            c.detail = "nonzero solution in " + c.certificate["label"].get<std::string>();
        return c;
    }

    json inputs() const {
        json j;
        j["check"] = check;
        j["point"] = vec_json(xbar);
        if (!u.empty()) j["direction"] = vec_json(u);
        j["mode"] = opt.mode == LambdaMode::Asym ? "asym" : "strong";
        j["restrict_nonneg"] = opt.restrict_nonneg;
        if (opt.targets) {
            json t = json::array();
            for (auto& v : *opt.targets) t.push_back(vec_json(v));
            j["targets"] = t;
        } else {
            j["targets"] = nullptr;
        }
        return j;
    }
};

Status assumptions_status(const std::string& check, const std::vector<Condition>& cs) {
    auto get = [&](const std::string& name) -> const Condition* {
        for (auto& c : cs)
            if (c.name == name) return &c;
        return nullptr;
    };
    auto holds = [&](const std::string& name) {
        auto c = get(name);
        return c && c->applicable && c->status == Status::Holds;
    };
    if (check == "MORD" || check == "FOSCMS" || check == "SOSCMS") return get("kernel")->status;
    if (check == "MSTAT") return get("multiplier")->status;
    if (check == "THM53")
        return holds("II") && (holds("Ia") || holds("Ib")) && holds("lambda") ? Status::Holds : Status::Undecided;
    return holds("cond") && holds("lambda") ? Status::Holds : Status::Undecided;
}

Verdict run(Engine& E) {
    Verdict v;
    v.check = E.check;
    v.inputs = E.inputs();
    const std::string& c = E.check;
    if (c == "MORD" || c == "FOSCMS" || c == "SOSCMS") {
        v.conditions.push_back(E.family_condition("kernel", "kernel"));
    } else if (c == "THM53") {
        v.conditions.push_back(E.family_condition("II", "II"));
        v.conditions.push_back(E.family_condition("Ia", "Ia"));
        if (!is_zero(E.q)) {
            v.conditions.push_back(E.family_condition("Ib", "Ib"));
        } else {
            Condition ib;
            ib.name = "Ib";
            ib.applicable = false;
            ib.detail = "grad g(x) u = 0: only (Ia) applies";
            v.conditions.push_back(ib);
        }
        v.conditions.push_back(E.lambda_condition());
    } else if (c == "THM54" || c == "THM55") {
        v.conditions.push_back(E.family_condition("cond", "cond"));
        v.conditions.push_back(E.lambda_condition());
    }
    v.status = assumptions_status(c, v.conditions);
    if (v.status == Status::Undecided) v.note = "sufficient condition not met; no conclusion";
    return v;
}

}  // namespace

Verdict mordukhovich(const ConstraintSystem& sys, const Vec& xbar) {
    Engine E("MORD", sys, xbar, {}, {});
    return run(E);
}

Verdict foscms(const ConstraintSystem& sys, const Vec& xbar, const Vec& u) {
    Engine E("FOSCMS", sys, xbar, u, {});
    return run(E);
}

Verdict soscms(const ConstraintSystem& sys, const Vec& xbar, const Vec& u) {
    Engine E("SOSCMS", sys, xbar, u, {});
    return run(E);
}

Verdict check_thm_nonpolyhedral(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                const CheckOptions& opt) {
    Engine E("THM53", sys, xbar, u, opt);
    return run(E);
}

Verdict check_thm_polyhedral_I(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                               const CheckOptions& opt) {
    Engine E("THM54", sys, xbar, u, opt);
    return run(E);
}

Verdict check_thm_polyhedral_II(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                const CheckOptions& opt) {
    Engine E("THM55", sys, xbar, u, opt);
    return run(E);
}

namespace {

Vec gradient_at(const Polynomial& phi, const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = phi.derivative(i).eval(x);
    return g;
}

}  // namespace

Verdict mstationarity(const ConstraintSystem& sys, const Polynomial& phi, const Vec& xbar) {
    Engine E("MSTAT", sys, xbar, {}, {});
    Verdict v;
    v.check = "MSTAT";
    v.inputs = E.inputs();
    Vec target = neg(gradient_at(phi, xbar));
    Condition c;
    c.name = "multiplier";
    c.certificate = {{"target", vec_json(target)}, {"lambda", solve_family(E.lambda_family(target))}};
    c.status = family_feasible(c.certificate["lambda"]) ? Status::Holds : Status::Fails;
    if (c.status == Status::Holds) c.detail = "multiplier in " + c.certificate["lambda"]["label"].get<std::string>();
    v.conditions.push_back(c);
    v.status = c.status;
    return v;
}

ConeUnion kernel_candidates(const ConstraintSystem& sys, const Vec& xbar, const Vec& u) {
    Vec gbar = sys.g.eval(xbar);
    Mat J = jacobian(sys.g, xbar);
    ConeUnion C = is_zero(u) ? limiting_normal_cone(sys.D, gbar)
                             : directional_limiting_normal_cone(sys.D, gbar, mat_vec(J, u));
    PolyhedralCone ker(sys.m());
    for (std::size_t i = 0; i < sys.n(); ++i) {
        Vec row(sys.m());
        for (std::size_t j = 0; j < sys.m(); ++j) row[j] = J[j][i];
        ker.add_eq(row);
    }
    return simplify(intersect(C, ker));
}

bool verify_verdict(const ConstraintSystem& sys, const json& verdict, std::string& why, const Polynomial* phi) {
    try {
        const json& in = verdict.at("inputs");
        std::string check = in.at("check").get<std::string>();
        CheckOptions opt;
        opt.mode = in.value("mode", std::string("asym")) == "strong" ? LambdaMode::Strong : LambdaMode::Asym;
        opt.restrict_nonneg = in.value("restrict_nonneg", false);
        if (in.contains("targets") && !in["targets"].is_null()) {
            std::vector<Vec> ts;
            for (auto& t : in["targets"]) ts.push_back(json_vec(t));
            opt.targets = ts;
        }
        Engine E(check, sys, json_vec(in.at("point")), json_vec_or_empty(in, "direction"), opt);
        std::vector<std::string> expected;
        if (check == "MORD" || check == "FOSCMS" || check == "SOSCMS")
            expected = {"kernel"};
        else if (check == "MSTAT")
            expected = {"multiplier"};
        else if (check == "THM53")
            expected = {"II", "Ia", "Ib", "lambda"};
        else if (check == "THM54" || check == "THM55")
            expected = {"cond", "lambda"};
        else
            throw GeometryError("unknown check " + check);
        std::vector<std::string> names;
        for (auto& cj : verdict.at("conditions")) names.push_back(cj.at("name").get<std::string>());
        if (names != expected) {
            why = "condition list does not match the check";
            return false;
        }
        std::vector<Condition> cs;
        for (auto& cj : verdict.at("conditions")) {
            Condition c;
            c.name = cj.at("name").get<std::string>();
            c.applicable = cj.value("applicable", true);
            Status claimed = parse_status(cj.at("status").get<std::string>());
            const json& cert = cj.at("certificate");
            Status st = Status::Undecided;
            if (!c.applicable) {
                if (!(c.name == "Ib" && is_zero(E.q))) {
                    why = "condition " + c.name + " was skipped without reason";
                    return false;
                }
                c.status = claimed;
                cs.push_back(c);
                continue;
            }
            if (c.name == "multiplier") {
                if (!phi) {
                    why = "objective needed to verify the multiplier";
                    return false;
                }
                Vec target = neg(gradient_at(*phi, E.xbar));
                if (json_vec(cert.at("target")) != target) {
                    why = "multiplier target differs from -grad phi";
                    return false;
                }
                if (!check_family(E.lambda_family(target), cert.at("lambda"), why)) return false;
                st = family_feasible(cert["lambda"]) ? Status::Holds : Status::Fails;
            } else if (c.name == "lambda") {
                std::string kind = cert.at("kind").get<std::string>();
                if (kind == "targets") {
                    if (!opt.targets || cert.at("entries").size() != opt.targets->size()) {
                        why = "target list does not match the inputs";
                        return false;
                    }
                    st = Status::Holds;
                    for (std::size_t i = 0; i < opt.targets->size(); ++i) {
                        const json& e = cert["entries"][i];
                        if (json_vec(e.at("target")) != (*opt.targets)[i]) {
                            why = "target entry out of order";
                            return false;
                        }
                        Status s;
                        if (!E.check_target_entry(e, s, why)) return false;
                        if (s == Status::Fails) st = Status::Fails;
                    }
                } else {
                    if (cert.contains("counterexample")) {
                        Status s;
                        if (!E.check_target_entry(cert["counterexample"], s, why)) return false;
                        if (s != Status::Fails) {
                            why = "counterexample target has a multiplier";
                            return false;
                        }
                        st = Status::Fails;
                    } else {
                        Vec cex;
                        if (!union_subset(E.range_union(), E.lambda_union(), &cex)) {
                            why = "recomputed inclusion fails";
                            return false;
                        }
                        st = Status::Holds;
                    }
                }
            } else {
                if (!check_family(E.condition_family(c.name == "kernel" ? "kernel" : c.name), cert, why))
                    return false;
                st = family_feasible(cert) ? Status::Fails : Status::Holds;
            }
            if (st != claimed) {
                why = "condition " + c.name + " claims " + status_name(claimed) + " but the certificate shows " +
                      status_name(st);
                return false;
            }
            c.status = st;
            cs.push_back(c);
        }
        Status overall = assumptions_status(check, cs);
        if (overall != parse_status(verdict.at("status").get<std::string>())) {
            why = "overall status does not follow from the conditions";
            return false;
        }
        return true;
    } catch (const std::exception& e) {
        why = std::string("verification error: ") + e.what();
        return false;
    }
}

}  // namespace dircq
