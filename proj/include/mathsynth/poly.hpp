#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mathsynth/expr.hpp"
#include "mathsynth/rational.hpp"

namespace mathsynth {

// Sorted (variable, exponent) pairs with positive exponents.
using Monomial = std::vector<std::pair<std::string, int>>;

// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
public:
    Poly() = default;
    Poly(Rational constant);  // NOLINT
    static Poly variable(const std::string& name);

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    // Coefficient of the term printed first; zero for the zero polynomial.
    Rational leading_coefficient() const;
    int total_degree() const;
    int degree_in(const std::string& var) const;
    std::vector<std::string> variables() const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly pow(int exponent) const;

    Poly derivative(const std::string& var) const;
    Poly substitute(const std::string& var, const Poly& value) const;

    friend bool operator==(const Poly&, const Poly&) = default;

private:
    void add_term(const Monomial& m, const Rational& c);
    std::map<Monomial, Rational> terms_;
};

// Expands an expression into a polynomial; fails on calls, non-constant
// denominators and non-natural exponents.
std::optional<Poly> to_poly(const Expr& e);

// Canonical rendering: terms in decreasing total degree, ties broken by
// larger exponent of the alphabetically first variable.
Expr to_expr(const Poly& p);

// Dense univariate coefficient vector, lowest degree first. Requires at most one variable.
std::vector<Rational> coefficients(const Poly& p, const std::string& var);
Poly from_coefficients(const std::vector<Rational>& coeffs, const std::string& var);

// Distinct rational roots of a univariate polynomial, ascending, with multiplicities.
std::vector<std::pair<Rational, int>> rational_roots(const std::vector<Rational>& coeffs);

// Factorisation over the rationals: content times primitive integer factors
// with positive leading coefficients, each with its multiplicity. Linear factors
// come from rational roots; whatever remains is kept as one primitive factor.
struct Factorization {
    Rational content;
    std::vector<std::pair<std::vector<Rational>, int>> factors;
};
Factorization factor_univariate(const std::vector<Rational>& coeffs);
Expr factorization_to_expr(const Factorization& f, const std::string& var);

// Univariate division and gcd over Q (dense, lowest degree first).
std::pair<std::vector<Rational>, std::vector<Rational>> poly_divmod(const std::vector<Rational>& num,
                                                                    const std::vector<Rational>& den);
std::vector<Rational> poly_gcd(std::vector<Rational> a, std::vector<Rational> b);

}  // namespace mathsynth
