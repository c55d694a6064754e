#include "dircq/polymap.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace dircq {

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Exponents(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t i) {
    Polynomial p(nvars);
    Exponents e(nvars, 0);
    e[i] = 1;
    p.add_term(e, 1);
    return p;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (auto& [e, c] : o.terms_) r.add_term(e, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o.scaled(-1); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r(n_);
    for (auto& [e1, c1] : terms_)
        for (auto& [e2, c2] : o.terms_) {
            Exponents e(n_);
            for (std::size_t i = 0; i < n_; ++i) e[i] = e1[i] + e2[i];
            r.add_term(e, c1 * c2);
        }
    return r;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial r(n_);
    for (auto& [e, k] : terms_) r.add_term(e, k * c);
    return r;
}

Polynomial Polynomial::pow(unsigned k) const {
    Polynomial r = constant(n_, 1);
    for (unsigned i = 0; i < k; ++i) r = r * *this;
    return r;
}

Polynomial Polynomial::derivative(std::size_t i) const {
    Polynomial r(n_);
    for (auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exponents f = e;
        f[i] -= 1;
        r.add_term(f, c * e[i]);
    }
    return r;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& subs) const {
    std::size_t nn = subs.empty() ? 0 : subs[0].nvars();
    Polynomial r(nn);
    for (auto& [e, c] : terms_) {
        Polynomial t = constant(nn, c);
        for (std::size_t i = 0; i < n_; ++i)
            if (e[i]) t = t * subs[i].pow(e[i]);
        r = r + t;
    }
    return r;
}

Rational Polynomial::eval(const Vec& x) const {
    Rational s = 0;
    for (auto& [e, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < n_; ++i)
            for (unsigned k = 0; k < e[i]; ++k) t *= x[i];
        s += t;
    }
    return s;
}

double Polynomial::eval(const std::vector<double>& x) const {
    double s = 0;
    for (auto& [e, c] : terms_) {
        double t = c.convert_to<double>();
        for (std::size_t i = 0; i < n_; ++i)
            if (e[i]) t *= std::pow(x[i], static_cast<double>(e[i]));
        s += t;
    }
    return s;
}

unsigned Polynomial::degree() const {
    unsigned d = 0;
    for (auto& [e, c] : terms_) {
        unsigned s = 0;
        for (auto k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

std::string Polynomial::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // highest total degree first for readability
    std::vector<std::pair<Exponents, Rational>> ts(terms_.rbegin(), terms_.rend());
    for (auto& [e, c] : ts) {
        Rational a = c;
        if (first) {
            if (a < 0) os << "-";
        } else {
            os << (a < 0 ? " - " : " + ");
        }
        a = abs(a);
        bool mono = false;
        for (auto k : e) mono = mono || k > 0;
        bool wrote = false;
        if (!mono || a != 1) {
            os << to_string(a);
            wrote = true;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (!e[i]) continue;
            if (wrote) os << "*";
            os << names[i];
            if (e[i] > 1) os << "^" << e[i];
            wrote = true;
        }
        first = false;
    }
    return os.str();
}

namespace {

struct Parser {
    const std::string& s;
    const std::vector<std::string>& names;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("polynomial '" + s + "' at column " + std::to_string(pos + 1) + ": " + what);
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    Rational number() {
        skip();
        std::size_t st = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (st == pos) fail("expected number");
        return Rational(Integer(s.substr(st, pos - st)));
    }
    Polynomial primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        if (eat('(')) {
            Polynomial p = expr();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(s[pos]))) {
            Rational r = number();
            skip();
            // a/b directly following a literal is a rational constant
            if (pos < s.size() && s[pos] == '/') {
                ++pos;
                Rational d = number();
                if (d == 0) fail("zero denominator");
                r /= d;
            }
            return Polynomial::constant(names.size(), r);
        }
        if (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_') {
            std::size_t st = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
            std::string id = s.substr(st, pos - st);
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == id) return Polynomial::variable(names.size(), i);
            pos = st;
            fail("unknown variable '" + id + "'");
        }
        fail("unexpected character");
    }
    Polynomial factor() {
        if (eat('-')) return factor().scaled(-1);
        if (eat('+')) return factor();
        Polynomial p = primary();
        if (eat('^')) {
            Rational k = number();
            p = p.pow(static_cast<unsigned>(numerator(k).convert_to<unsigned long>()));
        }
        return p;
    }
    Polynomial term() {
        Polynomial p = factor();
        for (;;) {
            if (eat('*')) {
                p = p * factor();
            } else if (eat('/')) {
                Rational d = number();
                if (d == 0) fail("division by zero");
                p = p.scaled(1 / d);
            } else {
                return p;
            }
        }
    }
    Polynomial expr() {
        Polynomial p = term();
        for (;;) {
            if (eat('+')) p = p + term();
            else if (eat('-')) p = p - term();
            else return p;
        }
    }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& names) {
    Parser ps{text, names};
    Polynomial p = ps.expr();
    ps.skip();
    if (ps.pos != text.size()) ps.fail("trailing input");
    if (p.nvars() != names.size()) p = Polynomial(names.size()) + p;
    return p;
}

Vec PolyMap::eval(const Vec& x) const {
    Vec r;
    for (auto& c : comps) r.push_back(c.eval(x));
    return r;
}

std::vector<double> PolyMap::eval(const std::vector<double>& x) const {
    std::vector<double> r;
    for (auto& c : comps) r.push_back(c.eval(x));
    return r;
}

PolyMap PolyMap::parse(const std::vector<std::string>& comps, const std::vector<std::string>& names) {
    PolyMap g;
    g.names = names;
    for (auto& c : comps) g.comps.push_back(parse_polynomial(c, names));
    return g;
}

Mat jacobian(const PolyMap& g, const Vec& x) {
    Mat J(g.m(), zeros(g.n()));
    for (std::size_t i = 0; i < g.m(); ++i)
        for (std::size_t j = 0; j < g.n(); ++j) J[i][j] = g.comps[i].derivative(j).eval(x);
    return J;
}

std::vector<std::vector<double>> jacobian(const PolyMap& g, const std::vector<double>& x) {
    std::vector<std::vector<double>> J(g.m(), std::vector<double>(g.n()));
    for (std::size_t i = 0; i < g.m(); ++i)
        for (std::size_t j = 0; j < g.n(); ++j) J[i][j] = g.comps[i].derivative(j).eval(x);
    return J;
}

Mat hessian_scalarized(const PolyMap& g, const Vec& x, const Vec& ystar) {
    Mat H(g.n(), zeros(g.n()));
    for (std::size_t k = 0; k < g.m(); ++k) {
        if (ystar[k].is_zero()) continue;
        for (std::size_t i = 0; i < g.n(); ++i) {
            Polynomial di = g.comps[k].derivative(i);
            for (std::size_t j = 0; j < g.n(); ++j) H[i][j] += ystar[k] * di.derivative(j).eval(x);
        }
    }
    return H;
}

Vec second_order_vector(const PolyMap& g, const Vec& x, const Vec& u) {
    Vec out;
    for (std::size_t k = 0; k < g.m(); ++k) {
        Rational s = 0;
        for (std::size_t i = 0; i < g.n(); ++i) {
            if (u[i].is_zero()) continue;
            Polynomial di = g.comps[k].derivative(i);
            for (std::size_t j = 0; j < g.n(); ++j)
                if (!u[j].is_zero()) s += u[i] * u[j] * di.derivative(j).eval(x);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace dircq
