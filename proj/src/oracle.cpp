#include "dircq/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace dircq {

namespace {

Rational dyadic(int e) {
    Integer d = 1;
    d <<= e;
    return Rational(Integer(1), d);
}

double norm2(const std::vector<double>& v) {
    long double s = 0;
    for (double x : v) s += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(s));
}

double norm2(const Vec& v) { return norm2(to_double(v)); }

Rational norm_inf(const Vec& v) {
    Rational m = 0;
    for (auto& x : v) m = std::max(m, x < 0 ? Rational(-x) : x);
    return m;
}

std::vector<double> dsub(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

std::vector<double> dscale(const std::vector<double>& a, double s) {
    std::vector<double> r(a);
    for (auto& x : r) x *= s;
    return r;
}

json vec_json(const Vec& v) { return to_strings(v); }

Vec gradient(const Polynomial& f, const Vec& p) {
    Vec g(f.nvars());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = f.derivative(i).eval(p);
    return g;
}

// a.y + c for a polynomial of degree <= 1 in n variables
void linear_part(const Polynomial& f, std::size_t n, Vec& a, Rational& c) {
    a = zeros(n);
    c = 0;
    for (auto& [e, coef] : f.terms()) {
        std::size_t deg = 0, at = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (e[i]) deg += e[i], at = i;
        if (deg == 0) c += coef;
        else a[at] += coef;
    }
}

// The patch restricted to a fixed x, as polynomials in y.
struct Slice {
    std::vector<Polynomial> eq, ineq;
    bool linear = true;
};

Slice slice(const PatchMap& M, const GraphPatch& P, const Vec& x) {
    std::vector<Polynomial> subs;
    for (std::size_t i = 0; i < M.nx; ++i) subs.push_back(Polynomial::constant(M.ny, x[i]));
    for (std::size_t j = 0; j < M.ny; ++j) subs.push_back(Polynomial::variable(M.ny, j));
    Slice s;
    for (auto& e : P.eq) s.eq.push_back(e.compose(subs));
    for (auto& q : P.ineq) s.ineq.push_back(q.compose(subs));
    for (auto* v : {&s.eq, &s.ineq})
        for (auto& p : *v)
            if (p.degree() > 1) s.linear = false;
    return s;
}

std::vector<std::vector<std::size_t>> subsets_upto(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(i);
        if (s.size() <= k) out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.size() < b.size(); });
    return out;
}

// argmin ||y - seed|| subject to A y = b
std::optional<Vec> nearest_on_rows(const Mat& A, const Vec& b, const Vec& seed) {
    if (A.empty()) return seed;
    std::size_t r = A.size();
    Mat G(r, zeros(r));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) G[i][j] = dot(A[i], A[j]);
    Vec rhs = sub(mat_vec(A, seed), b);
    Vec mu;
    if (!solve(G, rhs, r, mu)) return std::nullopt;
    Vec y = sub(seed, mat_t_vec(A, mu, seed.size()));
    if (mat_vec(A, y) != b) return std::nullopt;
    return y;
}

// Gauss-Newton on F(y) = 0 from seed; minimum-norm steps
std::optional<std::vector<double>> newton(const std::vector<const Polynomial*>& F, std::vector<double> y,
                                          double tol) {
    std::size_t n = y.size(), r = F.size();
    if (r == 0) return y;
    std::vector<std::vector<Polynomial>> J(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < n; ++j) J[i].push_back(F[i]->derivative(j));
    for (int it = 0; it < 80; ++it) {
        Eigen::VectorXd f(r);
        Eigen::MatrixXd Jm(r, n);
        double fmax = 0;
        for (std::size_t i = 0; i < r; ++i) {
            f(i) = F[i]->eval(y);
            fmax = std::max(fmax, std::abs(f(i)));
            for (std::size_t j = 0; j < n; ++j) Jm(i, j) = J[i][j].eval(y);
        }
        if (fmax <= tol * 1e-6) return y;
        Eigen::VectorXd step = Jm.completeOrthogonalDecomposition().solve(f);
        if (!step.allFinite()) return std::nullopt;
        for (std::size_t j = 0; j < n; ++j) y[j] -= step(j);
        if (step.lpNorm<Eigen::Infinity>() < 1e-300) break;
    }
    for (std::size_t i = 0; i < r; ++i)
        if (std::abs(F[i]->eval(y)) > tol) return std::nullopt;
    return y;
}

std::vector<Vec> cone_generators(const PolyhedralCone& C) {
    auto g = enumerate_generators(C);
    std::vector<Vec> out = g.rays;
    for (auto& l : g.lineality) {
        out.push_back(l);
        out.push_back(neg(l));
    }
    return out;
}

double angle(const std::vector<double>& a, const std::vector<double>& b) {
    double na = norm2(a), nb = norm2(b);
    if (na == 0 || nb == 0) return M_PI;
    long double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<long double>(a[i]) * b[i];
    c /= static_cast<long double>(na) * nb;
    c = std::clamp<long double>(c, -1, 1);
    return static_cast<double>(std::sqrt(std::max<long double>(0, 2 * (1 - c))));
}

json record_json(const WitnessRecord& r) {
    return {{"k", r.k},
            {"x", vec_json(r.x)},
            {"y", vec_json(r.y)},
            {"xstar", vec_json(r.xstar)},
            {"lambda", vec_json(r.lambda)},
            {"exact", r.exact}};
}

Vec unit_direction_check(const Vec& u) {
    if (is_zero(u)) throw GeometryError("direction must be nonzero");
    return u;
}

bool sign_ok(const Vec& lambda, const Vec& y, NormalityKind kind, const Mat& basis) {
    if (kind == NormalityKind::Pseudo) return dot(lambda, y) > 0;
    for (auto& e : basis) {
        Rational l = dot(lambda, e);
        if (l != 0 && l * dot(y, e) <= 0) return false;
    }
    return true;
}

}  // namespace

Rational Schedule::t(int k) const { return dyadic(k); }

Rational Schedule::tau(int k) const {
    switch (coupling) {
    case Coupling::RatioToZero:
        return dyadic(2 * k);
    case Coupling::RatioToInf:
        return dyadic((k + 1) / 2);
    case Coupling::Power: {
        double e = gamma * k;
        if (std::abs(e - std::round(e)) < 1e-12) return dyadic(static_cast<int>(std::round(e)));
        return rationalize(std::pow(2.0, -e), 1e-15);
    }
    }
    return dyadic(2 * k);
}

bool Residual::converged(const Schedule& s) const {
    if (values.empty()) return false;
    if (std::abs(values.back()) < s.residual_tol) return true;
    std::size_t w = std::min<std::size_t>(values.size(), static_cast<std::size_t>(std::max(2, s.window)));
    if (values.size() < w || w < 2) return false;
    // least-squares slope of log2 |r_k| over the last w points
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = values.size() - w; i < values.size(); ++i) {
        double v = std::abs(values[i]);
        if (v == 0) continue;
        if (!std::isfinite(v)) return false;
        double x = static_cast<double>(i), yv = std::log2(v);
        sx += x, sy += yv, sxx += x * x, sxy += x * yv, n += 1;
    }
    if (n < 2) return false;
    double den = n * sxx - sx * sx;
    if (den == 0) return false;
    double slope = (n * sxy - sx * sy) / den;
    return slope <= s.slope;
}

json WitnessSequence::to_json() const {
    json j;
    j["kind"] = kind;
    j["found"] = found;
    j["conclusion"] = conclusion;
    j["records"] = json::array();
    for (auto& r : records) j["records"].push_back(record_json(r));
    j["residuals"] = json::array();
    for (auto& r : residuals) j["residuals"].push_back({{"name", r.name}, {"values", r.values}});
    if (!limit_xstar.empty()) j["limit_xstar"] = vec_json(limit_xstar);
    if (!limit_ystar.empty()) j["limit_ystar"] = vec_json(limit_ystar);
    if (!trace.is_null()) j["trace"] = trace;
    return j;
}

json CoderivativeEvidence::to_json() const {
    json j;
    j["variant"] = variant;
    j["settled"] = settled;
    j["limit"] = vec_json(limit);
    j["records"] = json::array();
    for (auto& r : records) j["records"].push_back(record_json(r));
    return j;
}

Rational rationalize(double v, double tol, long long maxden) {
    if (!std::isfinite(v)) throw GeometryError("cannot rationalize a non-finite value");
    if (v == 0) return 0;
    bool negv = v < 0;
    long double x = std::abs(static_cast<long double>(v));
    long double target = x;
    // continued fraction convergents h/k
    Integer h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    Rational best = Rational(static_cast<long long>(std::llround(static_cast<double>(x))));
    for (int it = 0; it < 80; ++it) {
        long double a = std::floor(x);
        Integer ai(static_cast<unsigned long long>(a));
        Integer h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > Integer(maxden)) break;
        h0 = h1, h1 = h2, k0 = k1, k1 = k2;
        best = Rational(h1, k1);
        long double approx = static_cast<long double>(to_double(best));
        if (std::abs(approx - target) <= tol * std::max<long double>(1, target)) break;
        long double frac = x - a;
        if (frac <= 0) break;
        x = 1 / frac;
        if (!std::isfinite(static_cast<double>(x)) || x > 1e18L) break;
    }
    return negv ? Rational(-best) : best;
}

Vec project_onto(const HPolyhedron& P, const Vec& p) {
    if (P.contains(p)) return p;
    std::size_t m = P.A.size();
    if (m > 16) throw GeometryError("projection: too many inequality rows");
    for (auto& S : subsets_upto(m, P.dim)) {
        Mat A = P.E;
        Vec b = P.d;
        for (auto i : S) A.push_back(P.A[i]), b.push_back(P.b[i]);
        if (!A.empty() && rank(A, P.dim) != A.size()) continue;
        auto y = nearest_on_rows(A, b, p);
        if (!y || !P.contains(*y)) continue;
        // KKT: p - y = A_S^T mu with mu >= 0 on the inequality rows
        if (S.empty()) {
            if (P.E.empty()) continue;
            return *y;
        }
        Mat At = transpose(A, P.dim);
        Vec mu;
        if (!solve(At, sub(p, *y), A.size(), mu)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < S.size(); ++i)
            if (mu[P.E.size() + i] < 0) ok = false;
        if (ok) return *y;
    }
    throw GeometryError("projection onto an empty polyhedron");
}

Vec project_onto(const PolyUnion& D, const Vec& p) {
    std::optional<Vec> best;
    Rational bd = 0;
    for (auto& P : D.pieces) {
        if (!lp_feasibility(P).feasible()) continue;
        Vec z = project_onto(P, p);
        Vec d = sub(z, p);
        Rational dd = dot(d, d);
        if (!best || dd < bd) best = z, bd = dd;
    }
    if (!best) throw GeometryError("projection onto an empty union");
    return *best;
}

NormalSample sample_directional_normals(const PolyUnion& D, const Vec& base, const Vec& direction,
                                        const Schedule& s) {
    NormalSample out;
    std::size_t n = D.dim;
    out.exact = directional_limiting_normal_cone(D, base, direction);
    if (!D.contains(base)) {
        out.diagnostic = "base point is not in the set";
        return out;
    }
    int kend = std::min(s.kmax, 30), kbeg = std::max(1, kend - 3);
    // perturbations: 0, +-e_i, +-e_i +-e_j
    std::vector<Vec> pert = {zeros(n)};
    for (std::size_t i = 0; i < n; ++i)
        for (int si : {1, -1}) {
            pert.push_back(scale(unit(n, i), si));
            for (std::size_t j = i + 1; j < n; ++j)
                for (int sj : {1, -1}) pert.push_back(add(scale(unit(n, i), si), scale(unit(n, j), sj)));
        }
    std::vector<Vec> exact_samples;
    for (int k = kbeg; k <= kend; ++k) {
        Rational t = s.t(k), rho = dyadic((k + 1) / 2);
        for (auto& d : pert) {
            Vec q = add(base, scale(add(direction, scale(d, rho)), t));
            Vec z = project_onto(D, q);
            // keep only points that approach from the requested direction
            Vec w = scale(sub(z, base), 1 / t);
            if (norm_inf(sub(w, direction)) > 2 * rho * (1 + norm_inf(direction))) continue;
            auto N = regular_normal_cone(D, z);
            if (!N) continue;
            for (auto& g : cone_generators(*N))
                if (std::find(exact_samples.begin(), exact_samples.end(), g) == exact_samples.end())
                    exact_samples.push_back(g);
        }
    }
    if (exact_samples.empty() && !is_zero(direction)) {
        out.diagnostic = "no nearby points from the requested direction";
    }
    std::vector<std::vector<double>> dsamples;
    for (auto& g : exact_samples) {
        dsamples.push_back(dscale(to_double(g), 1 / norm2(g)));
        out.normals.push_back(g);
        if (!out.exact.contains(g)) out.all_inside = false;
    }
    for (auto& piece : out.exact.pieces)
        for (auto& r : cone_generators(piece)) {
            double best = M_PI;
            auto rd = to_double(r);
            for (auto& sd : dsamples) best = std::min(best, angle(rd, sd));
            out.max_gap = std::max(out.max_gap, best);
        }
    if (out.diagnostic.empty())
        out.diagnostic = std::to_string(out.normals.size()) + " sampled generators over scales 2^-" +
                         std::to_string(kbeg) + "..2^-" + std::to_string(kend);
    return out;
}

std::vector<GraphPoint> graph_points_at(const PatchMap& M, const Vec& x, const std::vector<Vec>& seeds,
                                        double tol) {
    std::vector<GraphPoint> out;
    auto push = [&](GraphPoint gp) {
        for (auto& o : out)
            if (o.p == gp.p) return;
        out.push_back(std::move(gp));
    };
    for (std::size_t pi = 0; pi < M.patches.size(); ++pi) {
        const auto& P = M.patches[pi];
        Slice sl = slice(M, P, x);
        // rows that do not involve y decide the patch outright
        bool dead = false;
        for (auto& e : sl.eq)
            if (e.degree() == 0 && e.eval(zeros(M.ny)) != 0) dead = true;
        for (auto& q : sl.ineq)
            if (q.degree() == 0 && q.eval(zeros(M.ny)) > 0) dead = true;
        if (dead) continue;
        auto subs = subsets_upto(sl.ineq.size(), M.ny);
        for (auto& seed : seeds) {
            for (auto& S : subs) {
                if (sl.linear) {
                    Mat A;
                    Vec b;
                    Vec a;
                    Rational c;
                    for (auto& e : sl.eq) {
                        linear_part(e, M.ny, a, c);
                        if (!is_zero(a)) A.push_back(a), b.push_back(-c);
                    }
                    for (auto i : S) {
                        linear_part(sl.ineq[i], M.ny, a, c);
                        if (!is_zero(a)) A.push_back(a), b.push_back(-c);
                    }
                    auto y = nearest_on_rows(A, b, seed);
                    if (!y) continue;
                    Vec p = concat(x, *y);
                    if (!P.contains(p)) continue;
                    GraphPoint gp;
                    gp.p = p;
                    gp.patch = pi;
                    for (std::size_t j = 0; j < P.ineq.size(); ++j)
                        if (P.ineq[j].eval(p) == 0) gp.active.push_back(j);
                    gp.exact = true;
                    push(std::move(gp));
                } else {
                    std::vector<const Polynomial*> F;
                    for (auto& e : sl.eq) F.push_back(&e);
                    for (auto i : S) F.push_back(&sl.ineq[i]);
                    auto y = newton(F, to_double(seed), tol);
                    if (!y) continue;
                    bool ok = true;
                    for (auto& q : sl.ineq)
                        if (q.eval(*y) > tol) ok = false;
                    if (!ok) continue;
                    Vec yq;
                    for (double v : *y) yq.push_back(rationalize(v, 1e-15, 1LL << 62));
                    GraphPoint gp;
                    gp.p = concat(x, yq);
                    gp.patch = pi;
                    gp.exact = P.contains(gp.p);
                    if (gp.exact) {
                        for (std::size_t j = 0; j < P.ineq.size(); ++j)
                            if (P.ineq[j].eval(gp.p) == 0) gp.active.push_back(j);
                    } else {
                        gp.active = S;
                    }
                    push(std::move(gp));
                }
            }
        }
    }
    return out;
}

std::optional<PolyhedralCone> normal_cone_at(const PatchMap& M, const GraphPoint& gp) {
    try {
        if (gp.exact) return patch_regular_normal_cone(M, gp.p);
        const auto& P = M.patches[gp.patch];
        ActiveGradients G;
        for (auto& e : P.eq) G.eq.push_back(gradient(e, gp.p));
        for (auto j : gp.active) G.ineq.push_back(gradient(P.ineq[j], gp.p)), G.ineq_index.push_back(j);
        Mat all = G.eq;
        all.insert(all.end(), G.ineq.begin(), G.ineq.end());
        if (rank(all, M.dim()) != all.size()) return std::nullopt;
        return canonical(polar_cone(linearized_tangent(G, M.dim())));
    } catch (const RegularityError&) {
        return std::nullopt;
    }
}

WitnessSequence replay_asym_reg_witness(const PatchMap& M, const Vec& xbar, const Vec& ybar, const Vec& u,
                                        const std::vector<WitnessRecord>& records, const Schedule& s) {
    unit_direction_check(u);
    WitnessSequence w;
    w.kind = "asymptotic-regularity-violation";
    w.records = records;
    w.trace = json::array();
    if (records.size() < 2) {
        w.conclusion = "too few records";
        return w;
    }
    bool exact_ok = true, off_all = true;
    std::vector<std::string> problems;
    Residual rx{"|x_k - xbar|", {}}, ry{"|y_k - ybar|", {}}, rxs{"|x*_k - x*_(k-1)|", {}},
        rdir{"|(x_k - xbar)/|x_k - xbar| - u|", {}}, ryx{"|y_k - ybar| / |x_k - xbar|", {}},
        rlam{"1/|lambda_k|", {}}, ral{"|(y_k - ybar)/|y_k - ybar| - lambda_k/|lambda_k||", {}},
        rys{"|y*_k - y*_(k-1)|", {}};
    auto ud = to_double(u);
    ud = dscale(ud, 1 / norm2(ud));
    std::vector<double> prev_xs, prev_ys;
    for (auto& r : records) {
        Vec p = concat(r.x, r.y);
        json step = {{"k", r.k}};
        bool in = M.contains(p);
        bool off_level = !M.contains(concat(r.x, ybar));
        bool moved = r.y != ybar && r.x != xbar;
        bool normal = false;
        if (in) {
            try {
                auto N = patch_regular_normal_cone(M, p);
                normal = N && N->contains(concat(r.xstar, neg(r.lambda)));
            } catch (const RegularityError&) {
                problems.push_back("k=" + std::to_string(r.k) + ": dependent active gradients");
            }
        }
        step["on_graph"] = in;
        step["x_not_in_preimage"] = off_level;
        step["regular_normal"] = normal;
        w.trace.push_back(step);
        off_all = off_all && off_level;
        if (!(in && moved && normal)) {
            exact_ok = false;
            problems.push_back("k=" + std::to_string(r.k) + " fails the exact membership checks");
        }
        auto dx = dsub(to_double(r.x), to_double(xbar));
        auto dy = dsub(to_double(r.y), to_double(ybar));
        double nx = norm2(dx), ny = norm2(dy), nl = norm2(r.lambda);
        auto xs = to_double(r.xstar);
        std::vector<double> ys = dscale(to_double(r.lambda), nx == 0 ? 0 : ny / nx);
        rx.values.push_back(nx);
        ry.values.push_back(ny);
        rdir.values.push_back(nx == 0 ? 1 : norm2(dsub(dscale(dx, 1 / nx), ud)));
        ryx.values.push_back(nx == 0 ? 1 : ny / nx);
        rlam.values.push_back(nl == 0 ? 1 : 1 / nl);
        ral.values.push_back(ny == 0 || nl == 0 ? 2
                                                : norm2(dsub(dscale(dy, 1 / ny), dscale(to_double(r.lambda), 1 / nl))));
        if (!prev_xs.empty()) {
            rxs.values.push_back(norm2(dsub(xs, prev_xs)));
            rys.values.push_back(norm2(dsub(ys, prev_ys)));
        }
        prev_xs = xs;
        prev_ys = ys;
    }
    w.residuals = {rx, ry, rxs, rdir, ryx, rlam, ral, rys};
    bool conv = true;
    for (auto& r : w.residuals)
        if (!r.converged(s)) {
            conv = false;
            problems.push_back("residual '" + r.name + "' does not converge");
        }
    const auto& last = records.back();
    w.limit_xstar = last.xstar;
    {
        double nx = norm2(dsub(to_double(last.x), to_double(xbar)));
        double ny = norm2(dsub(to_double(last.y), to_double(ybar)));
        Vec ys;
        for (auto& l : last.lambda) ys.push_back(rationalize(to_double(l) * ny / nx, 1e-12, 1LL << 40));
        w.limit_ystar = ys;
    }
    Vec base = concat(xbar, ybar);
    auto directional = coderivative_image(patch_normal_upper(M, base, concat(u, zeros(M.ny))), M.nx, M.ny);
    auto plain = coderivative_image(patch_normal_upper(M, base, zeros(M.dim())), M.nx, M.ny);
    bool outside_dir = !directional.contains(w.limit_xstar);
    bool outside_plain = !plain.contains(w.limit_xstar);
    json lim = {{"directional_image", describe(directional)},
                {"image", describe(plain)},
                {"outside_directional_image", outside_dir},
                {"outside_image", outside_plain}};
    // which notions the sequence violates: the plain notion has no side condition on x_k,
    // the directional ones need x_k outside the preimage of ybar
    json violated = json::array();
    if (exact_ok && conv) {
        if (outside_plain) violated.push_back("asymptotic regularity");
        if (off_all && outside_plain) violated.push_back("asymptotic regularity in direction u");
        if (off_all && outside_dir) violated.push_back("strong asymptotic regularity in direction u");
    }
    if (!off_all) problems.push_back("some x_k lie in the preimage of ybar");
    w.trace = {{"steps", w.trace},
               {"limit", lim},
               {"x_off_preimage", off_all},
               {"violated", violated},
               {"problems", problems}};
    w.found = !violated.empty();
    std::ostringstream os;
    if (w.found) {
        os << "x* = (";
        for (std::size_t i = 0; i < w.limit_xstar.size(); ++i) os << (i ? ", " : "") << to_string(w.limit_xstar[i]);
        os << ") violates";
        for (std::size_t i = 0; i < violated.size(); ++i) os << (i ? ";" : "") << " " << violated[i].get<std::string>();
    } else {
        os << "NOT_FOUND";
    }
    w.conclusion = os.str();
    return w;
}

WitnessSequence search_asym_reg_violation(const PatchMap& M, const Vec& xbar, const Vec& ybar, const Vec& u,
                                          const Schedule& s) {
    unit_direction_check(u);
    std::size_t nx = M.nx, ny = M.ny;
    // candidate tracks: x* normalized by sigma x*_i = 1, |x*|_inf <= 1
    std::map<std::pair<std::size_t, int>, std::vector<WitnessRecord>> tracks;
    json levels = json::array();
    for (int k = 1; k <= s.kmax; ++k) {
        Rational t = s.t(k);
        Vec x = add(xbar, scale(u, t));
        std::vector<Vec> seeds = {ybar};
        for (int e : {2, 3})
            for (std::size_t j = 0; j < ny; ++j)
                for (int sg : {1, -1}) seeds.push_back(add(ybar, scale(unit(ny, j), Rational(sg) * dyadic(e * k))));
        auto pts = graph_points_at(M, x, seeds, s.tol);
        bool in_preimage = M.contains(concat(x, ybar));
        int used = 0;
        for (auto& gp : pts) {
            if (!gp.exact) continue;
            Vec y(gp.p.begin() + nx, gp.p.end());
            if (y == ybar) continue;
            auto N = normal_cone_at(M, gp);
            if (!N) continue;
            ++used;
            Vec d = sub(y, ybar);
            for (std::size_t i = 0; i < nx; ++i)
                for (int sg : {1, -1}) {
                    // variables (w, c): (w, -c d) in N, sg w_i = 1, |w| <= 1, c >= 0; minimize c
                    HPolyhedron P(nx + 1);
                    auto embed = [&](const Vec& a) {
                        Vec r(a.begin(), a.begin() + nx);
                        Vec ay(a.begin() + nx, a.end());
                        r.push_back(-dot(ay, d));
                        return r;
                    };
                    for (auto& a : N->A) P.add_ineq(embed(a), 0);
                    for (auto& e : N->E) P.add_eq(embed(e), 0);
                    P.add_eq(scale(unit(nx + 1, i), sg), 1);
                    for (std::size_t j = 0; j < nx; ++j) {
                        P.add_ineq(unit(nx + 1, j), 1);
                        P.add_ineq(neg(unit(nx + 1, j)), 1);
                    }
                    P.add_ineq(neg(unit(nx + 1, nx)), 0);
                    auto res = lp_maximize(P, neg(unit(nx + 1, nx)));
                    if (res.status != LpResult::Status::Feasible) continue;
                    Rational c = res.x[nx];
                    if (c <= 0) continue;
                    WitnessRecord r;
                    r.k = k;
                    r.x = x;
                    r.y = y;
                    r.xstar = Vec(res.x.begin(), res.x.begin() + nx);
                    r.lambda = scale(d, c);
                    auto& tr = tracks[{i, sg}];
                    if (!tr.empty() && tr.back().k == k) {
                        // keep the smaller multiplier at this level
                        if (norm_inf(r.lambda) < norm_inf(tr.back().lambda)) tr.back() = r;
                    } else {
                        tr.push_back(r);
                    }
                }
        }
        levels.push_back({{"k", k}, {"graph_points", pts.size()}, {"used", used}, {"x_in_preimage", in_preimage}});
    }
    WitnessSequence best;
    best.kind = "asymptotic-regularity-violation";
    best.conclusion = "NOT_FOUND";
    for (auto& [key, tr] : tracks) {
        // the tail that reaches the last level without gaps
        std::size_t b = tr.size();
        while (b > 0 && tr[b - 1].k == s.kmax - static_cast<int>(tr.size() - b)) --b;
        std::vector<WitnessRecord> tail(tr.begin() + b, tr.end());
        if (static_cast<int>(tail.size()) < s.window + 1) continue;
        auto w = replay_asym_reg_witness(M, xbar, ybar, u, tail, s);
        if (w.found) {
            w.trace["levels"] = levels;
            return w;
        }
    }
    best.trace = {{"levels", levels}, {"tracks", tracks.size()}};
    return best;
}

WitnessSequence search_normality_violation(const ConstraintSystem& sys, const Vec& xbar, const Vec& u,
                                           const Vec& lambda, NormalityKind kind, const Mat& basis,
                                           const Schedule& s) {
    unit_direction_check(u);
    if (is_zero(lambda)) throw GeometryError("multiplier candidate must be nonzero");
    WitnessSequence best;
    best.kind = kind == NormalityKind::Pseudo ? "pseudo-normality-violation" : "quasi-normality-violation";
    best.conclusion = "NOT_FOUND";
    json tracks_log = json::array();
    for (std::size_t piece = 0; piece < sys.D.pieces.size(); ++piece) {
        const auto& P = sys.D.pieces[piece];
        if (!lp_feasibility(P).feasible()) continue;
        std::vector<WitnessRecord> recs;
        json steps = json::array();
        int first_bad = 0;
        for (int k = 1; k <= s.kmax; ++k) {
            Vec x = add(xbar, scale(u, s.t(k)));
            Vec gx = sys.g.eval(x);
            Vec z = project_onto(P, gx);
            Vec y = sub(gx, z);
            auto N = regular_normal_cone(sys.D, z);
            if (!N) {
                first_bad = k;
                continue;
            }
            Vec lk = project_onto(static_cast<const HPolyhedron&>(*N), lambda);
            Vec eta = mat_t_vec(jacobian(sys.g, x), lk, sys.n());
            bool sign = sign_ok(lambda, y, kind, basis);
            if (!sign) first_bad = k;
            WitnessRecord r;
            r.k = k;
            r.x = x;
            r.y = y;
            r.xstar = eta;
            r.lambda = lk;
            recs.push_back(r);
            steps.push_back({{"k", k}, {"z", vec_json(z)}, {"sign", sign}});
        }
        // keep the tail on which every sign condition holds
        std::vector<WitnessRecord> tail;
        for (auto& r : recs)
            if (r.k > first_bad) tail.push_back(r);
        json log = {{"piece", piece}, {"tail_from", first_bad + 1}};
        if (static_cast<int>(tail.size()) < s.window + 1) {
            log["result"] = "sign conditions fail along the schedule";
            tracks_log.push_back(log);
            continue;
        }
        Residual rx{"|x_k - xbar|", {}}, rdir{"|(x_k - xbar)/|x_k - xbar| - u|", {}},
            ryx{"|y_k| / |x_k - xbar|", {}}, rl{"|lambda_k - lambda|", {}}, re{"|eta_k|", {}};
        auto ud = to_double(u);
        ud = dscale(ud, 1 / norm2(ud));
        for (auto& r : tail) {
            auto dx = dsub(to_double(r.x), to_double(xbar));
            double nx = norm2(dx);
            rx.values.push_back(nx);
            rdir.values.push_back(norm2(dsub(dscale(dx, 1 / nx), ud)));
            ryx.values.push_back(norm2(r.y) / nx);
            rl.values.push_back(norm2(sub(r.lambda, lambda)));
            re.values.push_back(norm2(r.xstar));
        }
        WitnessSequence w;
        w.kind = best.kind;
        w.records = tail;
        w.residuals = {rx, rdir, ryx, rl, re};
        bool conv = true;
        for (auto& r : w.residuals) conv = conv && r.converged(s);
        log["result"] = conv ? "witness" : "residuals do not converge";
        tracks_log.push_back(log);
        if (conv) {
            w.found = true;
            w.limit_ystar = lambda;
            w.trace = {{"piece", piece}, {"steps", steps}, {"tracks", tracks_log}};
            w.conclusion = "sign conditions hold for every k >= " + std::to_string(first_bad + 1) +
                           "; lambda_k -> lambda, eta_k -> 0";
            return w;
        }
    }
    best.trace = {{"tracks", tracks_log}};
    return best;
}

WitnessSequence search_normality_violation(const PatchMap& M, const Vec& xbar, const Vec& u, const Vec& lambda,
                                           NormalityKind kind, const Mat& basis, const Schedule& s) {
    unit_direction_check(u);
    if (is_zero(lambda)) throw GeometryError("multiplier candidate must be nonzero");
    std::size_t nx = M.nx, ny = M.ny;
    Vec ybar = zeros(ny);
    Rational lnorm = norm_inf(lambda);
    Vec lhat = scale(lambda, 1 / lnorm);
    WitnessSequence w;
    w.kind = kind == NormalityKind::Pseudo ? "pseudo-normality-violation" : "quasi-normality-violation";
    int K = std::min(s.kmax, 30);
    // grids: x = xbar + t u + sigma d, y seeds ybar + sigma e, with sigma = 2^-ceil(3k/2)
    auto grid = [](std::size_t n) {
        std::vector<Vec> g = {Vec()};
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Vec> h;
            for (auto& v : g)
                for (long c : {0L, 1L, -1L}) {
                    Vec e = v;
                    e.push_back(Rational(c));
                    h.push_back(e);
                }
            g = h;
        }
        return g;
    };
    auto xgrid = grid(nx), ygrid = grid(ny);
    json trace = json::array();
    std::vector<double> rho_series;
    std::vector<WitnessRecord> best_records;
    bool unbounded_any = false;
    for (int k = 1; k <= K; ++k) {
        Rational t = s.t(k), sigma = dyadic((3 * k + 1) / 2), eps = dyadic((k + 1) / 2);
        std::size_t checked = 0, with_sign = 0, skipped = 0;
        std::optional<Rational> rho;
        json arg;
        WitnessRecord rec;
        for (auto& dx : xgrid) {
            Vec x = add(add(xbar, scale(u, t)), scale(dx, sigma));
            if (x == xbar) continue;
            std::vector<Vec> seeds;
            for (auto& e : ygrid) seeds.push_back(add(ybar, scale(e, sigma)));
            for (auto& gp : graph_points_at(M, x, seeds, s.tol)) {
                // only exactly verified graph points enter the decision
                if (!gp.exact) {
                    ++skipped;
                    continue;
                }
                ++checked;
                Vec y(gp.p.begin() + nx, gp.p.end());
                if (!sign_ok(lambda, sub(y, ybar), kind, basis)) continue;
                auto N = normal_cone_at(M, gp);
                if (!N) continue;
                ++with_sign;
                // variables (eta, xi, s): (eta, -(s lhat + xi)) in N, |eta|, |xi| <= eps, s >= 0
                std::size_t V = nx + ny + 1;
                HPolyhedron P(V);
                auto embed = [&](const Vec& a) {
                    Vec r(V, 0);
                    for (std::size_t i = 0; i < nx; ++i) r[i] = a[i];
                    for (std::size_t j = 0; j < ny; ++j) r[nx + j] = -a[nx + j];
                    Rational al = 0;
                    for (std::size_t j = 0; j < ny; ++j) al += a[nx + j] * lhat[j];
                    r[V - 1] = -al;
                    return r;
                };
                for (auto& a : N->A) P.add_ineq(embed(a), 0);
                for (auto& e : N->E) P.add_eq(embed(e), 0);
                for (std::size_t i = 0; i + 1 < V; ++i) {
                    P.add_ineq(unit(V, i), eps);
                    P.add_ineq(neg(unit(V, i)), eps);
                }
                P.add_ineq(neg(unit(V, V - 1)), 0);
                auto res = lp_maximize(P, unit(V, V - 1));
                if (res.status == LpResult::Status::Infeasible) continue;
                if (res.status == LpResult::Status::Unbounded) {
                    unbounded_any = true;
                    rho = Rational(-1);
                    arg = {{"point", vec_json(gp.p)}, {"rho", "unbounded"}};
                    break;
                }
                if (!rho || (*rho >= 0 && res.value > *rho)) {
                    rho = res.value;
                    Vec eta(res.x.begin(), res.x.begin() + nx);
                    Vec xi(res.x.begin() + nx, res.x.begin() + nx + ny);
                    arg = {{"point", vec_json(gp.p)},
                           {"exact", gp.exact},
                           {"eta", vec_json(eta)},
                           {"xi", vec_json(xi)},
                           {"s", to_string(res.value)}};
                    rec = WitnessRecord{k, x, y, eta, add(scale(lhat, res.value), xi), gp.exact};
                }
            }
            if (rho && *rho < 0) break;
        }
        double r = !rho ? 0.0 : (*rho < 0 ? std::numeric_limits<double>::infinity() : to_double(*rho));
        rho_series.push_back(r);
        json step = {{"k", k},
                     {"eps", to_string(eps)},
                     {"graph_points", checked},
                     {"float_points_skipped", skipped},
                     {"sign_points", with_sign},
                     {"rho", rho ? (*rho < 0 ? std::string("unbounded") : to_string(*rho)) : std::string("none")}};
        if (!arg.is_null()) step["argmax"] = arg;
        trace.push_back(step);
        if (rho) best_records.push_back(rec);
    }
    Residual rr{"rho_k / |lambda|", {}};
    for (double r : rho_series) rr.values.push_back(r / to_double(lnorm));
    w.residuals = {rr};
    int win = std::max(2, s.window);
    bool tail_large = static_cast<int>(rho_series.size()) >= win;
    bool tail_small = tail_large;
    for (int i = static_cast<int>(rho_series.size()) - win; i >= 0 && i < static_cast<int>(rho_series.size()); ++i) {
        if (rho_series[i] < to_double(lnorm)) tail_large = false;
        if (i > 0 && rho_series[i] > rho_series[i - 1]) tail_small = false;
    }
    tail_small = tail_small && !rho_series.empty() && rho_series.back() <= 1e-3 * to_double(lnorm);
    w.trace = {{"levels", trace},
               {"lambda", vec_json(lambda)},
               {"criterion", "rho_k >= |lambda| on the last " + std::to_string(win) +
                                 " levels gives a witness; rho_k nonincreasing there with rho_K <= 1e-3 |lambda| "
                                 "exhausts the candidate"}};
    if (tail_large || unbounded_any) {
        w.found = true;
        w.records = best_records;
        w.conclusion = "multipliers lambda_k -> lambda with eta_k -> 0 exist at the searched points";
    } else if (tail_small) {
        w.found = false;
        w.conclusion = "NOT_FOUND: rho_k -> 0, so any multipliers at the searched points with eta_k -> 0 force "
                       "lambda_k -> 0, contradicting lambda != 0";
        w.trace["exhausted"] = true;
    } else {
        w.conclusion = "NOT_FOUND";
        w.trace["exhausted"] = false;
    }
    return w;
}

bool is_orthonormal(const Mat& basis, std::size_t m) {
    if (basis.size() != m) return false;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i].size() != m) return false;
        for (std::size_t j = 0; j < m; ++j)
            if (dot(basis[i], basis[j]) != (i == j ? 1 : 0)) return false;
    }
    return true;
}

Mat canonical_basis(std::size_t m) {
    Mat B;
    for (std::size_t i = 0; i < m; ++i) B.push_back(unit(m, i));
    return B;
}

namespace {

std::vector<Vec> kernel_grid(const ConeUnion& K) {
    std::vector<Vec> out;
    for (auto& piece : K.pieces)
        for (auto& g : cone_generators(piece))
            for (Rational f : {Rational(1, 2), Rational(1), Rational(2)}) {
                Vec v = scale(g, f);
                if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
            }
    return out;
}

Verdict normality_frame(NormalityKind kind, const Vec& xbar, const Vec& u, const Mat& basis) {
    Verdict v;
    v.check = kind == NormalityKind::Pseudo ? "PSEUDO" : "QUASI";
    v.inputs = {{"check", v.check}, {"point", vec_json(xbar)}, {"direction", vec_json(u)}};
    json b = json::array();
    for (auto& e : basis) b.push_back(vec_json(e));
    v.inputs["basis"] = b;
    return v;
}

}  // namespace

Verdict pseudo_quasi_verdict(const ConstraintSystem& sys, const Vec& xbar, const Vec& u, NormalityKind kind,
                             const Mat& basis, const Schedule& s) {
    if (!is_orthonormal(basis, sys.m())) throw GeometryError("basis is not orthonormal");
    auto v = normality_frame(kind, xbar, u, basis);
    auto K = kernel_candidates(sys, xbar, u);
    Condition kc;
    kc.name = "kernel";
    kc.detail = describe(K);
    bool trivial = !K.nonzero_point();
    kc.status = trivial ? Status::Holds : Status::Fails;
    auto fos = foscms(sys, xbar, u);
    kc.certificate = to_json(fos);
    v.conditions.push_back(kc);
    if (trivial) {
        v.status = Status::Holds;
        v.note = "no nonzero kernel candidates; the first-order condition holds";
        return v;
    }
    bool found = false;
    json surviving = json::array();
    for (auto& lam : kernel_grid(K)) {
        auto w = search_normality_violation(sys, xbar, u, lam, kind, basis, s);
        Condition c;
        std::ostringstream nm;
        nm << "candidate (";
        for (std::size_t i = 0; i < lam.size(); ++i) nm << (i ? ", " : "") << to_string(lam[i]);
        nm << ")";
        c.name = nm.str();
        c.status = w.found ? Status::Fails : Status::Undecided;
        c.detail = w.conclusion;
        c.certificate = w.to_json();
        v.conditions.push_back(c);
        if (w.found) {
            found = true;
            break;
        }
        surviving.push_back(vec_json(lam));
    }
    v.status = found ? Status::Fails : Status::Undecided;
    v.note = found ? "a replayable sign-condition sequence exists for a kernel candidate"
                   : "kernel candidates survive: " + surviving.dump();
    return v;
}

Verdict pseudo_quasi_verdict(const PatchMap& M, const Vec& xbar, const Vec& u, NormalityKind kind,
                             const Mat& basis, const Schedule& s) {
    if (!is_orthonormal(basis, M.ny)) throw GeometryError("basis is not orthonormal");
    auto v = normality_frame(kind, xbar, u, basis);
    Vec ybar = zeros(M.ny);
    auto up = patch_normal_upper(M, concat(xbar, ybar), concat(u, zeros(M.ny)));
    auto K = coderivative_kernel(up, M.nx, M.ny);
    Condition kc;
    kc.name = "kernel";
    kc.detail = describe(K);
    bool trivial = !K.nonzero_point();
    kc.status = trivial ? Status::Holds : Status::Fails;
    kc.certificate = {{"normals", describe(up)}, {"kernel", describe(K)}};
    v.conditions.push_back(kc);
    if (trivial) {
        v.status = Status::Holds;
        v.note = "no nonzero kernel candidates in this direction";
        return v;
    }
    bool found = false, all_exhausted = true;
    std::map<Vec, WitnessSequence> cache;  // the search depends on lambda only through its direction
    for (auto& lam : kernel_grid(K)) {
        Vec key = primitive(lam);
        if (!cache.count(key)) cache[key] = search_normality_violation(M, xbar, u, key, kind, basis, s);
        auto w = cache[key];
        Rational ln = norm_inf(lam), kn = norm_inf(key);
        std::ostringstream nm;
        nm << "candidate (";
        for (std::size_t i = 0; i < lam.size(); ++i) nm << (i ? ", " : "") << to_string(lam[i]);
        nm << ")";
        Condition c;
        c.name = nm.str();
        bool exhausted = w.trace.value("exhausted", false);
        c.status = w.found ? Status::Fails : (exhausted ? Status::HoldsByOracleExhaustion : Status::Undecided);
        c.detail = w.conclusion + " (rho scaled by " + to_string(ln / kn) + ")";
        c.certificate = w.to_json();
        v.conditions.push_back(c);
        if (w.found) found = true;
        if (!exhausted) all_exhausted = false;
    }
    v.status = found ? Status::Fails : (all_exhausted ? Status::HoldsByOracleExhaustion : Status::Undecided);
    v.note = found ? "a candidate admits multipliers with vanishing eta along the searched points"
                   : (all_exhausted ? "every kernel candidate is contradicted along the searched points"
                                    : "some kernel candidates survive the search");
    return v;
}

CoderivativeEvidence probe_pseudo_or_super_coderivative(const PatchMap& M, const Vec& xbar, const Vec& ybar,
                                                        const Vec& u, const Vec& v, const Vec& ystar,
                                                        const Schedule& s, bool gfrerer) {
    unit_direction_check(u);
    CoderivativeEvidence ev;
    std::size_t nx = M.nx, ny = M.ny;
    if (gfrerer) ev.variant = "gfrerer-pseudo-order-" + std::to_string(s.gamma);
    else if (s.coupling == Coupling::Power) ev.variant = "pseudo-order-" + std::to_string(s.gamma);
    else if (s.coupling == Coupling::RatioToZero) ev.variant = "super";
    else throw GeometryError("coderivative probes need POWER or RATIO_TO_ZERO coupling");
    int K = std::min(s.kmax, 40);
    Residual cauchy{"|x*_k - x*_(k-1)|", {}}, yerr{"|y*_k - y*|", {}};
    for (int k = 1; k <= K; ++k) {
        Rational t = s.t(k);
        Rational tau = gfrerer ? t : s.tau(k);
        Vec x = add(xbar, scale(u, t));
        Vec target = add(ybar, scale(v, tau));
        auto pts = graph_points_at(M, x, {target}, s.tol);
        if (pts.empty()) continue;
        // nearest graph point to the target offset
        std::size_t bi = 0;
        Rational bd = -1;
        bool any_exact = std::any_of(pts.begin(), pts.end(), [](auto& g) { return g.exact; });
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (any_exact && !pts[i].exact) continue;
            Vec d = sub(Vec(pts[i].p.begin() + nx, pts[i].p.end()), target);
            Rational dd = dot(d, d);
            if (bd < 0 || dd < bd) bd = dd, bi = i;
        }
        auto& gp = pts[bi];
        auto N = normal_cone_at(M, gp);
        if (!N) continue;
        // scaling c with (c x*, -y*_k) in N: c = t^(gamma-1) (pseudo), tau/t (super)
        Rational c = 1;
        double e = s.gamma - 1;
        if (s.coupling == Coupling::RatioToZero && !gfrerer) c = tau / t;
        else if (std::abs(e - std::round(e)) < 1e-12)
            for (long i = 0; i < std::lround(e); ++i) c *= t;
        else
            c = rationalize(std::pow(to_double(t), e), 1e-15);
        // variables (w, yk, e): (w, -yk) in N, |yk - y*| <= e; minimize e; x* = w / c
        std::size_t V = nx + ny + 1;
        HPolyhedron P(V);
        auto embed = [&](const Vec& a) {
            Vec r(V, 0);
            for (std::size_t i = 0; i < nx; ++i) r[i] = a[i];
            for (std::size_t j = 0; j < ny; ++j) r[nx + j] = -a[nx + j];
            return r;
        };
        for (auto& a : N->A) P.add_ineq(embed(a), 0);
        for (auto& e : N->E) P.add_eq(embed(e), 0);
        for (std::size_t j = 0; j < ny; ++j) {
            Vec r = unit(V, nx + j);
            r[V - 1] = -1;
            P.add_ineq(r, ystar[j]);
            Vec q = neg(unit(V, nx + j));
            q[V - 1] = -1;
            P.add_ineq(q, -ystar[j]);
        }
        // keep x* bounded so the LP stays finite
        for (std::size_t i = 0; i < nx; ++i) {
            P.add_ineq(unit(V, i), c * 1000);
            P.add_ineq(neg(unit(V, i)), c * 1000);
        }
        auto res = lp_maximize(P, neg(unit(V, V - 1)));
        if (res.status != LpResult::Status::Feasible) continue;
        WitnessRecord r;
        r.k = k;
        r.x = x;
        r.y = Vec(gp.p.begin() + nx, gp.p.end());
        r.xstar = scale(Vec(res.x.begin(), res.x.begin() + nx), 1 / c);
        r.lambda = Vec(res.x.begin() + nx, res.x.begin() + nx + ny);
        r.exact = gp.exact;
        if (!ev.records.empty()) cauchy.values.push_back(norm2(sub(r.xstar, ev.records.back().xstar)));
        yerr.values.push_back(to_double(res.x[V - 1]));
        ev.records.push_back(r);
    }
    if (!ev.records.empty()) {
        ev.limit = ev.records.back().xstar;
        ev.settled = cauchy.converged(s) && yerr.converged(s);
    }
    return ev;
}

std::optional<Rational> distance_to_image(const PatchMap& M, const Vec& x, const Vec& ybar) {
    std::optional<Rational> best;
    std::size_t ny = M.ny;
    for (auto& P : M.patches) {
        Slice sl = slice(M, P, x);
        bool dead = false;
        for (auto& e : sl.eq)
            if (e.degree() == 0 && e.eval(zeros(ny)) != 0) dead = true;
        for (auto& q : sl.ineq)
            if (q.degree() == 0 && q.eval(zeros(ny)) > 0) dead = true;
        if (dead) continue;
        if (!sl.linear) throw GeometryError("distance needs patches linear in y once x is fixed");
        // variables (y, e): y in the slice, |y - ybar|_inf <= e; minimize e
        HPolyhedron H(ny + 1);
        Vec a;
        Rational c;
        auto ext = [&](const Vec& r) {
            Vec o = r;
            o.push_back(0);
            return o;
        };
        for (auto& e : sl.eq) {
            linear_part(e, ny, a, c);
            H.add_eq(ext(a), -c);
        }
        for (auto& q : sl.ineq) {
            linear_part(q, ny, a, c);
            H.add_ineq(ext(a), -c);
        }
        for (std::size_t j = 0; j < ny; ++j) {
            Vec r = unit(ny + 1, j);
            r[ny] = -1;
            H.add_ineq(r, ybar[j]);
            Vec q = neg(unit(ny + 1, j));
            q[ny] = -1;
            H.add_ineq(q, -ybar[j]);
        }
        auto res = lp_maximize(H, neg(unit(ny + 1, ny)));
        if (res.status != LpResult::Status::Feasible) continue;
        Rational d = res.x[ny];
        if (!best || d < *best) best = d;
    }
    return best;
}

std::vector<PenaltyRow> penalty_failure_demo(const PatchMap& M, const Polynomial& phi, const Vec& xbar,
                                             const Vec& ybar, const Vec& u, const std::vector<Rational>& Cs,
                                             long kmax) {
    std::vector<PenaltyRow> rows;
    for (auto& C : Cs) rows.push_back({C, -1, 0});
    Rational base = phi.eval(xbar);
    std::size_t open = rows.size();
    for (long k = 1; k <= kmax && open > 0; ++k) {
        Vec x = add(xbar, scale(u, Rational(1, k)));
        auto d = distance_to_image(M, x, ybar);
        if (!d) continue;
        Rational f = phi.eval(x);
        for (auto& r : rows) {
            if (r.first_k >= 0) continue;
            Rational val = f + r.C * *d;
            if (val < base) {
                r.first_k = k;
                r.value = val;
                --open;
            }
        }
    }
    return rows;
}

}  // namespace dircq
