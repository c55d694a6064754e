#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <vector>

namespace dircq {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>;  // row-major, rows may be empty when cols == 0

Rational parse_rational(const std::string& s);
std::string to_string(const Rational& r);
std::vector<std::string> to_strings(const Vec& v);
Vec parse_vec(const std::vector<std::string>& s);
double to_double(const Rational& r);
std::vector<double> to_double(const Vec& v);

Vec zeros(std::size_t n);
Vec unit(std::size_t n, std::size_t i);
Rational dot(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, const Rational& s);
Vec neg(const Vec& a);
bool is_zero(const Vec& a);
Vec concat(const Vec& a, const Vec& b);

Mat transpose(const Mat& m, std::size_t cols);
Vec mat_vec(const Mat& m, const Vec& v);
// m^T v where m has `cols` columns
Vec mat_t_vec(const Mat& m, const Vec& v, std::size_t cols);

/// Positive rescaling to a primitive integer vector (gcd of entries 1).
Vec primitive(const Vec& v);
/// Primitive integer vector with first nonzero entry positive.
Vec primitive_signed(const Vec& v);

/// Reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(Mat& m, std::size_t cols);
std::size_t rank(Mat m, std::size_t cols);
/// Basis of {x : m x = 0}, in the canonical rref-derived form.
Mat nullspace(Mat m, std::size_t cols);
/// Canonical basis of the row space (rref rows, primitive_signed).
Mat rowspace_basis(Mat m, std::size_t cols);
/// One solution of m x = b or empty optional.
bool solve(const Mat& m, const Vec& b, std::size_t cols, Vec& out);

}  // namespace dircq
