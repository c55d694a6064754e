#pragma once

#include "dircq/rational.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dircq {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sparse multivariate polynomial with rational coefficients.
class Polynomial {
public:
    using Exponents = std::vector<unsigned>;

    Polynomial() = default;
    explicit Polynomial(std::size_t nvars) : n_(nvars) {}
    static Polynomial constant(std::size_t nvars, const Rational& c);
    static Polynomial variable(std::size_t nvars, std::size_t i);

    std::size_t nvars() const { return n_; }
    const std::map<Exponents, Rational>& terms() const { return terms_; }
    void add_term(const Exponents& e, const Rational& c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(const Rational& c) const;
    Polynomial pow(unsigned k) const;
    Polynomial derivative(std::size_t i) const;
    /// substitute x_i -> polynomial (each of size nvars of the result)
    Polynomial compose(const std::vector<Polynomial>& subs) const;

    Rational eval(const Vec& x) const;
    double eval(const std::vector<double>& x) const;
    bool is_zero() const { return terms_.empty(); }
    unsigned degree() const;
    std::string str(const std::vector<std::string>& names) const;

private:
    std::size_t n_ = 0;
    std::map<Exponents, Rational> terms_;
};

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& names);

/// Polynomial map Q^n -> Q^m.
struct PolyMap {
    std::vector<std::string> names;  // variable names, size n
    std::vector<Polynomial> comps;   // size m

    std::size_t n() const { return names.size(); }
    std::size_t m() const { return comps.size(); }
    Vec eval(const Vec& x) const;
    std::vector<double> eval(const std::vector<double>& x) const;
    static PolyMap parse(const std::vector<std::string>& comps, const std::vector<std::string>& names);
};

/// m x n matrix of partial derivatives.
Mat jacobian(const PolyMap& g, const Vec& x);
std::vector<std::vector<double>> jacobian(const PolyMap& g, const std::vector<double>& x);
/// Hessian of <ystar, g> at x.
Mat hessian_scalarized(const PolyMap& g, const Vec& x, const Vec& ystar);
/// (u^T H_j u)_j, H_j the Hessian of g_j at x.
Vec second_order_vector(const PolyMap& g, const Vec& x, const Vec& u);

}  // namespace dircq
