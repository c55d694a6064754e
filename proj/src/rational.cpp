#include "dircq/rational.hpp"

#include <stdexcept>

namespace dircq {

Rational parse_rational(const std::string& s0) {
    std::string s;
    for (char c : s0)
        if (c != ' ') s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto check = [&](const std::string& t) {
        std::size_t i = (t.size() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
        if (i >= t.size()) throw std::invalid_argument("bad rational literal '" + s0 + "'");
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') throw std::invalid_argument("bad rational literal '" + s0 + "'");
    };
    auto slash = s.find('/');
    std::string num = s.substr(0, slash);
    if (num.size() && num[0] == '+') num = num.substr(1);
    check(num);
    if (slash == std::string::npos) return Rational(Integer(num));
    std::string den = s.substr(slash + 1);
    check(den);
    Integer d(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + s0 + "'");
    return Rational(Integer(num), d);
}

std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

std::vector<std::string> to_strings(const Vec& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (auto& x : v) out.push_back(to_string(x));
    return out;
}

Vec parse_vec(const std::vector<std::string>& s) {
    Vec v;
    v.reserve(s.size());
    for (auto& x : s) v.push_back(parse_rational(x));
    return v;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::vector<double> to_double(const Vec& v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = to_double(v[i]);
    return d;
}

Vec zeros(std::size_t n) { return Vec(n, Rational(0)); }

Vec unit(std::size_t n, std::size_t i) {
    Vec v = zeros(n);
    v[i] = 1;
    return v;
}

Rational dot(const Vec& a, const Vec& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_zero() && !b[i].is_zero()) s += a[i] * b[i];
    return s;
}

Vec add(const Vec& a, const Vec& b) {
    Vec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += b[i];
    return r;
}

Vec sub(const Vec& a, const Vec& b) {
    Vec r(a);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] -= b[i];
    return r;
}

Vec scale(const Vec& a, const Rational& s) {
    Vec r(a);
    for (auto& x : r) x *= s;
    return r;
}

Vec neg(const Vec& a) { return scale(a, Rational(-1)); }

bool is_zero(const Vec& a) {
    for (auto& x : a)
        if (!x.is_zero()) return false;
    return true;
}

Vec concat(const Vec& a, const Vec& b) {
    Vec r(a);
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

Mat transpose(const Mat& m, std::size_t cols) {
    Mat t(cols, zeros(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) t[j][i] = m[i][j];
    return t;
}

Vec mat_vec(const Mat& m, const Vec& v) {
    Vec r;
    r.reserve(m.size());
    for (auto& row : m) r.push_back(dot(row, v));
    return r;
}

Vec mat_t_vec(const Mat& m, const Vec& v, std::size_t cols) {
    Vec r = zeros(cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (v[i].is_zero()) continue;
        for (std::size_t j = 0; j < cols; ++j) r[j] += m[i][j] * v[i];
    }
    return r;
}

Vec primitive(const Vec& v) {
    Integer l = 1;
    for (auto& x : v)
        if (!x.is_zero()) l = lcm(l, Integer(denominator(x)));
    std::vector<Integer> z;
    Integer g = 0;
    for (auto& x : v) {
        Integer n = Integer(numerator(x)) * (l / Integer(denominator(x)));
        z.push_back(n);
        g = gcd(g, abs(n));
    }
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = g == 0 ? Rational(0) : Rational(z[i] / g);
    return out;
}

Vec primitive_signed(const Vec& v) {
    Vec p = primitive(v);
    for (auto& x : p) {
        if (x.is_zero()) continue;
        if (x < 0) p = neg(p);
        break;
    }
    return p;
}

std::vector<std::size_t> rref(Mat& m, std::size_t cols) {
    std::vector<std::size_t> piv;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
        std::size_t p = r;
        while (p < m.size() && m[p][c].is_zero()) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[r]);
        Rational inv = 1 / m[r][c];
        for (auto& x : m[r]) x *= inv;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        piv.push_back(c);
        ++r;
    }
    m.resize(r);
    return piv;
}

std::size_t rank(Mat m, std::size_t cols) { return rref(m, cols).size(); }

Mat nullspace(Mat m, std::size_t cols) {
    auto piv = rref(m, cols);
    std::vector<bool> is_piv(cols, false);
    for (auto p : piv) is_piv[p] = true;
    Mat basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        Vec v = zeros(cols);
        v[f] = 1;
        for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = -m[i][f];
        basis.push_back(primitive_signed(v));
    }
    return basis;
}

Mat rowspace_basis(Mat m, std::size_t cols) {
    rref(m, cols);
    for (auto& row : m) row = primitive_signed(row);
    return m;
}

bool solve(const Mat& m, const Vec& b, std::size_t cols, Vec& out) {
    Mat aug;
    for (std::size_t i = 0; i < m.size(); ++i) {
        Vec row = m[i];
        row.push_back(b[i]);
        aug.push_back(row);
    }
    auto piv = rref(aug, cols + 1);
    if (!piv.empty() && piv.back() == cols) return false;
    out = zeros(cols);
    for (std::size_t i = 0; i < piv.size(); ++i) out[piv[i]] = aug[i][cols];
    return true;
}

}  // namespace dircq
