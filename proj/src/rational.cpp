#include "mathsynth/rational.hpp"

#include <limits>
#include <numeric>

namespace mathsynth {

namespace checked {

std::int64_t add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in addition");
    return r;
}

std::int64_t sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in subtraction");
    return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in multiplication");
    return r;
}

}  // namespace checked

namespace {
constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("zero denominator");
    if (n == kMin || d == kMin) throw ArithmeticOverflow("rational component out of range");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const std::int64_t g = std::gcd(n, d);
    num_ = n / g;
    den_ = d / g;
}

Rational Rational::operator-() const {
    if (num_ == kMin) throw ArithmeticOverflow("negation overflow");
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rational& Rational::operator+=(const Rational& o) {
    const std::int64_t g = std::gcd(den_, o.den_);
    const std::int64_t lhs = checked::mul(num_, o.den_ / g);
    const std::int64_t rhs = checked::mul(o.num_, den_ / g);
    *this = Rational(checked::add(lhs, rhs), checked::mul(den_ / g, o.den_));
    return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
    // cross-reduce first so intermediate products stay small
    const std::int64_t g1 = std::gcd(num_, o.den_);
    const std::int64_t g2 = std::gcd(o.num_, den_);
    const std::int64_t n = checked::mul(num_ / (g1 ? g1 : 1), o.num_ / (g2 ? g2 : 1));
    const std::int64_t d = checked::mul(den_ / (g2 ? g2 : 1), o.den_ / (g1 ? g1 : 1));
    *this = Rational(n, d);
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.num_ == 0) throw std::domain_error("division by zero");
    Rational inv;
    inv.num_ = o.num_ < 0 ? -o.den_ : o.den_;
    inv.den_ = o.num_ < 0 ? -o.num_ : o.num_;
    return *this *= inv;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
}

Rational Rational::pow(int exponent) const {
    if (exponent < 0) return Rational(1) / pow(-exponent);
    Rational result(1);
    Rational base = *this;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        exponent >>= 1;
        if (exponent) base *= base;
    }
    return result;
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace mathsynth
