#include "mathsynth/poly.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>

namespace mathsynth {

namespace {

Monomial multiply(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.push_back(b[j++]);
        } else {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return out;
}

int degree(const Monomial& m) {
    int d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
}

// True when `a` should be printed before `b`.
bool print_before(const Monomial& a, const Monomial& b) {
    const int da = degree(a), db = degree(b);
    if (da != db) return da > db;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size()) return true;
        if (i == a.size()) return false;
        if (a[i].first != b[j].first) return a[i].first < b[j].first;
        if (a[i].second != b[j].second) return a[i].second > b[j].second;
        ++i;
        ++j;
    }
    return false;
}

void trim(std::vector<Rational>& c) {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
}

}  // namespace

Poly::Poly(Rational constant) {
    if (!constant.is_zero()) terms_[{}] = constant;
}

Poly Poly::variable(const std::string& name) {
    Poly p;
    p.terms_[{{name, 1}}] = Rational(1);
    return p;
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Rational Poly::constant_term() const {
    auto it = terms_.find({});
    return it == terms_.end() ? Rational(0) : it->second;
}

Rational Poly::leading_coefficient() const {
    const Monomial* best = nullptr;
    Rational c(0);
    for (const auto& [m, k] : terms_)
        if (!best || print_before(m, *best)) {
            best = &m;
            c = k;
        }
    return c;
}

int Poly::total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
    return d;
}

int Poly::degree_in(const std::string& var) const {
    int d = 0;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m)
            if (v == var) d = std::max(d, e);
    return d;
}

std::vector<std::string> Poly::variables() const {
    std::set<std::string> vars;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m) vars.insert(v);
    return {vars.begin(), vars.end()};
}

void Poly::add_term(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Poly Poly::operator-() const {
    Poly r;
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) r.add_term(multiply(ma, mb), ca * cb);
    return r;
}

Poly Poly::pow(int exponent) const {
    Poly result(Rational(1));
    for (int i = 0; i < exponent; ++i) result = result * *this;
    return result;
}

Poly Poly::derivative(const std::string& var) const {
    Poly r;
    for (const auto& [m, c] : terms_) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].first != var) continue;
            Monomial dm = m;
            const int e = dm[i].second;
            if (e == 1)
                dm.erase(dm.begin() + static_cast<std::ptrdiff_t>(i));
            else
                dm[i].second = e - 1;
            r.add_term(dm, c * Rational(e));
        }
    }
    return r;
}

Poly Poly::substitute(const std::string& var, const Poly& value) const {
    Poly r;
    for (const auto& [m, c] : terms_) {
        Poly term(c);
        for (const auto& [v, e] : m) term = term * (v == var ? value.pow(e) : Poly::variable(v).pow(e));
        r = r + term;
    }
    return r;
}

std::optional<Poly> to_poly(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return Poly(e.value());
        case ExprKind::Symbol:
            return Poly::variable(e.name());
        case ExprKind::Add: {
            Poly acc;
            for (const auto& t : e.args()) {
                auto p = to_poly(t);
                if (!p) return std::nullopt;
                acc = acc + *p;
            }
            return acc;
        }
        case ExprKind::Mul: {
            Poly acc(Rational(1));
            for (const auto& f : e.args()) {
                auto p = to_poly(f);
                if (!p) return std::nullopt;
                acc = acc * *p;
            }
            return acc;
        }
        case ExprKind::Div: {
            auto n = to_poly(e.arg(0));
            auto d = to_poly(e.arg(1));
            if (!n || !d || !d->is_constant() || d->is_zero()) return std::nullopt;
            return *n * Poly(Rational(1) / d->constant_term());
        }
        case ExprKind::Pow: {
            auto b = to_poly(e.arg(0));
            auto x = to_poly(e.arg(1));
            if (!b || !x || !x->is_constant()) return std::nullopt;
            const Rational k = x->constant_term();
            if (!k.is_integer() || k.sign() < 0 || k.num() > 64) return std::nullopt;
            return b->pow(static_cast<int>(k.num()));
        }
        case ExprKind::Call:
            return std::nullopt;
    }
    return std::nullopt;
}

Expr to_expr(const Poly& p) {
    if (p.is_zero()) return Expr::number(0);
    std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return print_before(a.first, b.first); });
    std::vector<Expr> out;
    for (const auto& [m, c] : terms) {
        if (m.empty()) {
            out.push_back(Expr::number(c));
            continue;
        }
        std::vector<Expr> factors;
        for (const auto& [v, e] : m)
            factors.push_back(e == 1 ? Expr::symbol(v) : Expr::pow(Expr::symbol(v), Expr::number(e)));
        Expr numerator = Expr::mul(factors);
        if (c.num() == -1) {
            numerator = negate(numerator);
        } else if (c.num() != 1) {
            factors.insert(factors.begin(), Expr::number(c.num()));
            numerator = Expr::mul(factors);
        }
        out.push_back(c.is_integer() ? numerator : Expr::div(numerator, Expr::number(c.den())));
    }
    return Expr::add(std::move(out));
}

std::vector<Rational> coefficients(const Poly& p, const std::string& var) {
    std::vector<Rational> c(static_cast<std::size_t>(p.degree_in(var)) + 1, Rational(0));
    for (const auto& [m, k] : p.terms()) {
        if (m.empty()) {
            c[0] = k;
        } else {
            if (m.size() != 1 || m[0].first != var) throw std::invalid_argument("polynomial is not univariate in " + var);
            c[static_cast<std::size_t>(m[0].second)] = k;
        }
    }
    trim(c);
    return c;
}

Poly from_coefficients(const std::vector<Rational>& coeffs, const std::string& var) {
    Poly p;
    const Poly x = Poly::variable(var);
    for (std::size_t i = 0; i < coeffs.size(); ++i) p = p + Poly(coeffs[i]) * x.pow(static_cast<int>(i));
    return p;
}

namespace {

std::vector<std::int64_t> to_primitive_integers(const std::vector<Rational>& coeffs, Rational* content) {
    std::int64_t den_lcm = 1;
    for (const auto& c : coeffs) den_lcm = checked::mul(den_lcm / std::gcd(den_lcm, c.den()), c.den());
    std::vector<std::int64_t> ints;
    std::int64_t g = 0;
    for (const auto& c : coeffs) {
        const std::int64_t v = checked::mul(c.num(), den_lcm / c.den());
        ints.push_back(v);
        g = std::gcd(g, v);
    }
    if (g == 0) g = 1;
    if (!ints.empty() && ints.back() < 0) g = -g;
    for (auto& v : ints) v /= g;
    if (content) *content = Rational(g, den_lcm);
    return ints;
}

std::vector<std::int64_t> divisors(std::int64_t n) {
    n = std::llabs(n);
    std::vector<std::int64_t> small, large;
    for (std::int64_t d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        small.push_back(d);
        if (d != n / d) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

// Divides the integer polynomial (lowest degree first) by (q*x - p); succeeds only
// when the quotient is integral and the remainder is zero.
std::optional<std::vector<std::int64_t>> divide_linear(const std::vector<std::int64_t>& a, std::int64_t p,
                                                      std::int64_t q) {
    const std::size_t n = a.size() - 1;
    std::vector<std::int64_t> c(n);
    try {
        std::int64_t carry = a[n];
        for (std::size_t k = n; k >= 1; --k) {
            if (carry % q) return std::nullopt;
            c[k - 1] = carry / q;
            carry = checked::add(a[k - 1], checked::mul(p, c[k - 1]));
        }
        if (carry != 0) return std::nullopt;
    } catch (const ArithmeticOverflow&) {
        return std::nullopt;
    }
    return c;
}

struct LinearFactorSplit {
    int zero_multiplicity = 0;
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, int>> roots;  // ((p, q), multiplicity)
    std::vector<std::int64_t> rest;
};

LinearFactorSplit split_linear_factors(std::vector<std::int64_t> a) {
    LinearFactorSplit out;
    std::size_t lead_zero = 0;
    while (lead_zero + 1 < a.size() && a[lead_zero] == 0) ++lead_zero;
    out.zero_multiplicity = static_cast<int>(lead_zero);
    a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(lead_zero));
    if (a.size() >= 2) {
        const auto ps = divisors(a.front());
        const auto qs = divisors(a.back());
        std::set<std::pair<std::int64_t, std::int64_t>> tried;
        for (std::int64_t q : qs) {
            for (std::int64_t p0 : ps) {
                for (std::int64_t p : {-p0, p0}) {
                    const std::int64_t g = std::gcd(p, q);
                    if (!tried.insert({p / g, q / g}).second) continue;
                    int mult = 0;
                    while (a.size() >= 2) {
                        auto quotient = divide_linear(a, p / g, q / g);
                        if (!quotient) break;
                        a = std::move(*quotient);
                        ++mult;
                    }
                    if (mult) out.roots.push_back({{p / g, q / g}, mult});
                }
            }
        }
    }
    out.rest = std::move(a);
    return out;
}

}  // namespace

std::vector<std::pair<Rational, int>> rational_roots(const std::vector<Rational>& coeffs) {
    std::vector<Rational> c = coeffs;
    trim(c);
    if (c.size() < 2) return {};
    const auto split = split_linear_factors(to_primitive_integers(c, nullptr));
    std::vector<std::pair<Rational, int>> roots;
    if (split.zero_multiplicity) roots.emplace_back(Rational(0), split.zero_multiplicity);
    for (const auto& [pq, m] : split.roots) roots.emplace_back(Rational(pq.first, pq.second), m);
    std::sort(roots.begin(), roots.end());
    return roots;
}

Factorization factor_univariate(const std::vector<Rational>& coeffs) {
    std::vector<Rational> c = coeffs;
    trim(c);
    Factorization f;
    if (c.empty()) {
        f.content = Rational(0);
        return f;
    }
    if (c.size() == 1) {
        f.content = c[0];
        return f;
    }
    const auto ints = to_primitive_integers(c, &f.content);
    const auto split = split_linear_factors(ints);
    if (split.zero_multiplicity) f.factors.push_back({{Rational(0), Rational(1)}, split.zero_multiplicity});
    for (const auto& [pq, m] : split.roots) f.factors.push_back({{Rational(-pq.first), Rational(pq.second)}, m});
    if (split.rest.size() >= 2) {
        std::vector<Rational> rest(split.rest.begin(), split.rest.end());
        f.factors.push_back({rest, 1});
    } else if (!split.rest.empty()) {
        // leftover unit; primitive integer polynomials leave +-1 here
        f.content *= Rational(split.rest[0]);
    }
    std::sort(f.factors.begin(), f.factors.end(), [](const auto& a, const auto& b) {
        const bool ax = a.first.size() == 2 && a.first[0].is_zero();
        const bool bx = b.first.size() == 2 && b.first[0].is_zero();
        if (ax != bx) return ax;
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        return a.first < b.first;
    });
    return f;
}

Expr factorization_to_expr(const Factorization& f, const std::string& var) {
    std::vector<Expr> factors;
    for (const auto& [coeffs, mult] : f.factors) {
        Expr base = to_expr(from_coefficients(coeffs, var));
        factors.push_back(mult == 1 ? base : Expr::pow(base, Expr::number(mult)));
    }
    if (factors.empty()) return Expr::number(f.content);
    if (f.content == Rational(1)) return Expr::mul(std::move(factors));
    if (f.content == Rational(-1)) return negate(Expr::mul(std::move(factors)));
    factors.insert(factors.begin(), Expr::number(f.content));
    return Expr::mul(std::move(factors));
}

std::pair<std::vector<Rational>, std::vector<Rational>> poly_divmod(const std::vector<Rational>& num,
                                                                    const std::vector<Rational>& den) {
    std::vector<Rational> r = num, d = den;
    trim(r);
    trim(d);
    if (d.empty()) throw std::domain_error("polynomial division by zero");
    if (r.size() < d.size()) return {{}, r};
    std::vector<Rational> q(r.size() - d.size() + 1, Rational(0));
    while (r.size() >= d.size() && !r.empty()) {
        const std::size_t shift = r.size() - d.size();
        const Rational k = r.back() / d.back();
        q[shift] = k;
        for (std::size_t i = 0; i < d.size(); ++i) r[shift + i] -= k * d[i];
        r.pop_back();
        trim(r);
    }
    trim(q);
    return {q, r};
}

std::vector<Rational> poly_gcd(std::vector<Rational> a, std::vector<Rational> b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        auto r = poly_divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (a.empty()) return a;
    const Rational lead = a.back();
    for (auto& c : a) c /= lead;
    return a;
}

}  // namespace mathsynth
