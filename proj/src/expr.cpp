#include "mathsynth/expr.hpp"

#include <algorithm>
#include <cctype>

namespace mathsynth {

namespace {

std::shared_ptr<ExprNode> make_node(ExprKind kind) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    return n;
}

}  // namespace

Expr Expr::number(Rational value) {
    auto n = make_node(ExprKind::Number);
    n->number = value;
    return Expr(std::move(n));
}

Expr Expr::symbol(std::string name) {
    auto n = make_node(ExprKind::Symbol);
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    for (auto& t : terms) {
        if (t.kind() == ExprKind::Add)
            flat.insert(flat.end(), t.args().begin(), t.args().end());
        else
            flat.push_back(std::move(t));
    }
    if (flat.empty()) return number(0);
    if (flat.size() == 1) return flat.front();
    auto n = make_node(ExprKind::Add);
    n->args = std::move(flat);
    return Expr(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    for (auto& f : factors) {
        if (f.kind() == ExprKind::Mul)
            flat.insert(flat.end(), f.args().begin(), f.args().end());
        else
            flat.push_back(std::move(f));
    }
    if (flat.empty()) return number(1);
    if (flat.size() == 1) return flat.front();
    auto n = make_node(ExprKind::Mul);
    n->args = std::move(flat);
    return Expr(std::move(n));
}

Expr Expr::div(Expr numerator, Expr denominator) {
    auto n = make_node(ExprKind::Div);
    n->args = {std::move(numerator), std::move(denominator)};
    return Expr(std::move(n));
}

Expr Expr::pow(Expr base, Expr exponent) {
    auto n = make_node(ExprKind::Pow);
    n->args = {std::move(base), std::move(exponent)};
    return Expr(std::move(n));
}

Expr Expr::call(std::string name, std::vector<Expr> args) {
    auto n = make_node(ExprKind::Call);
    n->name = std::move(name);
    n->args = std::move(args);
    return Expr(std::move(n));
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Number:
            return a.value() == b.value();
        case ExprKind::Symbol:
            return a.name() == b.name();
        case ExprKind::Call:
            if (a.name() != b.name()) return false;
            [[fallthrough]];
        default:
            return a.args() == b.args();
    }
}

Expr negate(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return Expr::number(-e.value());
        case ExprKind::Mul: {
            const auto& f = e.args();
            if (f.front().is_number()) {
                const Rational c = -f.front().value();
                std::vector<Expr> rest(f.begin() + 1, f.end());
                if (c == Rational(1)) return Expr::mul(std::move(rest));
                rest.insert(rest.begin(), Expr::number(c));
                return Expr::mul(std::move(rest));
            }
            std::vector<Expr> out{Expr::number(-1)};
            out.insert(out.end(), f.begin(), f.end());
            return Expr::mul(std::move(out));
        }
        case ExprKind::Div:
            return Expr::div(negate(e.arg(0)), e.arg(1));
        default:
            return Expr::mul({Expr::number(-1), e});
    }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse() {
        Expr e = sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek(std::string_view tok) {
        skip_ws();
        return s_.substr(pos_, tok.size()) == tok;
    }

    bool accept(std::string_view tok) {
        if (!peek(tok)) return false;
        pos_ += tok.size();
        return true;
    }

    Expr sum() {
        std::vector<Expr> terms{product()};
        for (;;) {
            if (accept("+"))
                terms.push_back(product());
            else if (accept("-"))
                terms.push_back(negate(product()));
            else
                break;
        }
        return Expr::add(std::move(terms));
    }

    Expr product() {
        Expr acc = unary();
        for (;;) {
            if (peek("**")) break;
            if (accept("*")) {
                acc = Expr::mul({acc, unary()});
            } else if (accept("/")) {
                const std::size_t at = pos_;
                Expr rhs = unary();
                if (acc.is_number() && rhs.is_number()) {
                    if (rhs.value().is_zero()) throw ParseError("division by zero", at);
                    acc = Expr::number(acc.value() / rhs.value());
                } else {
                    acc = Expr::div(acc, rhs);
                }
            } else {
                break;
            }
        }
        return acc;
    }

    Expr unary() {
        if (accept("-")) return negate(unary());
        if (accept("+")) return unary();
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (accept("**")) return Expr::pow(base, unary());
        return base;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = sum();
            if (!accept(")")) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number_literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            if (pos_ < s_.size() && s_[pos_] == '(') {
                ++pos_;
                std::vector<Expr> args{sum()};
                while (accept(",")) args.push_back(sum());
                if (!accept(")")) fail("expected ')' after call arguments");
                return Expr::call(std::move(name), std::move(args));
            }
            return Expr::symbol(std::move(name));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expr number_literal() {
        std::int64_t whole = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            whole = checked::add(checked::mul(whole, 10), s_[pos_] - '0');
            ++pos_;
        }
        if (pos_ + 1 < s_.size() && s_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            ++pos_;
            std::int64_t frac = 0, scale = 1;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                frac = checked::add(checked::mul(frac, 10), s_[pos_] - '0');
                scale = checked::mul(scale, 10);
                ++pos_;
            }
            return Expr::number(Rational(whole) + Rational(frac, scale));
        }
        return Expr::number(Rational(whole));
    }
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

bool is_plain_integer(const Expr& e) { return e.is_number() && e.value().is_integer() && e.value().sign() >= 0; }

// Kinds that may directly follow a unary minus without changing the parse.
bool negatable_atom(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Symbol:
        case ExprKind::Pow:
        case ExprKind::Call:
        case ExprKind::Add:
            return true;
        default:
            return false;
    }
}

bool minus_shortcut(const Expr& mul) {
    const auto& f = mul.args();
    return f[0].is_number() && f[0].value() == Rational(-1) && negatable_atom(f[1]);
}

bool is_negative_term(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return e.value().sign() < 0;
        case ExprKind::Mul: {
            const auto& f = e.args();
            if (!f[0].is_number() || f[0].value().sign() >= 0) return false;
            return f[0].value() != Rational(-1) || negatable_atom(f[1]);
        }
        case ExprKind::Div:
            return is_negative_term(e.arg(0));
        default:
            return false;
    }
}

Expr negated_term(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return Expr::number(-e.value());
        case ExprKind::Mul: {
            const auto& f = e.args();
            std::vector<Expr> rest(f.begin() + 1, f.end());
            if (f[0].value() == Rational(-1)) return Expr::mul(std::move(rest));
            rest.insert(rest.begin(), Expr::number(-f[0].value()));
            return Expr::mul(std::move(rest));
        }
        case ExprKind::Div:
            return Expr::div(negated_term(e.arg(0)), e.arg(1));
        default:
            return e;
    }
}

void print(const Expr& e, std::string& out);

void print_parens(const Expr& e, std::string& out) {
    out += '(';
    print(e, out);
    out += ')';
}

// A factor that is not the first one in a product.
void print_later_factor(const Expr& f, std::string& out) {
    const bool parens = f.kind() == ExprKind::Add || f.kind() == ExprKind::Div ||
                        (f.is_number() && !is_plain_integer(f));
    parens ? print_parens(f, out) : print(f, out);
}

void print_atom_operand(const Expr& e, std::string& out) {
    const bool atomic = e.is_symbol() || e.kind() == ExprKind::Call || is_plain_integer(e);
    atomic ? print(e, out) : print_parens(e, out);
}

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case ExprKind::Number:
            out += e.value().str();
            return;
        case ExprKind::Symbol:
            out += e.name();
            return;
        case ExprKind::Call:
            out += e.name();
            out += '(';
            for (std::size_t i = 0; i < e.args().size(); ++i) {
                if (i) out += ", ";
                print(e.args()[i], out);
            }
            out += ')';
            return;
        case ExprKind::Add: {
            const auto& t = e.args();
            print(t[0], out);
            for (std::size_t i = 1; i < t.size(); ++i) {
                Expr term = t[i];
                if (is_negative_term(term)) {
                    out += " - ";
                    term = negated_term(term);
                } else {
                    out += " + ";
                }
                term.kind() == ExprKind::Add ? print_parens(term, out) : print(term, out);
            }
            return;
        }
        case ExprKind::Mul: {
            const auto& f = e.args();
            std::size_t i = 0;
            if (minus_shortcut(e)) {
                out += '-';
                i = 1;
                f[1].kind() == ExprKind::Add ? print_parens(f[1], out) : print(f[1], out);
                ++i;
            } else {
                f[0].kind() == ExprKind::Add ? print_parens(f[0], out) : print(f[0], out);
                i = 1;
            }
            for (; i < f.size(); ++i) {
                out += '*';
                print_later_factor(f[i], out);
            }
            return;
        }
        case ExprKind::Div: {
            const Expr& n = e.arg(0);
            n.kind() == ExprKind::Add ? print_parens(n, out) : print(n, out);
            out += '/';
            const Expr& d = e.arg(1);
            (d.kind() == ExprKind::Pow) ? print(d, out) : print_atom_operand(d, out);
            return;
        }
        case ExprKind::Pow:
            print_atom_operand(e.arg(0), out);
            out += "**";
            print_atom_operand(e.arg(1), out);
            return;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Syntactic helpers

bool contains_call(const Expr& e) {
    if (e.kind() == ExprKind::Call) return true;
    return std::any_of(e.args().begin(), e.args().end(), [](const Expr& a) { return contains_call(a); });
}

void collect_symbols(const Expr& e, std::vector<std::string>& out) {
    if (e.is_symbol()) {
        if (std::find(out.begin(), out.end(), e.name()) == out.end()) out.push_back(e.name());
        return;
    }
    for (const auto& a : e.args()) collect_symbols(a, out);
}

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> args) {
    switch (e.kind()) {
        case ExprKind::Add:
            return Expr::add(std::move(args));
        case ExprKind::Mul:
            return Expr::mul(std::move(args));
        case ExprKind::Div:
            return Expr::div(args[0], args[1]);
        case ExprKind::Pow:
            return Expr::pow(args[0], args[1]);
        case ExprKind::Call:
            return Expr::call(e.name(), std::move(args));
        default:
            return e;
    }
}

}  // namespace

Expr replace_subtree(const Expr& e, const Expr& pattern, const Expr& replacement) {
    if (e == pattern) return replacement;
    if (e.args().empty()) return e;
    std::vector<Expr> args;
    args.reserve(e.args().size());
    for (const auto& a : e.args()) args.push_back(replace_subtree(a, pattern, replacement));
    return rebuild(e, std::move(args));
}

Expr rename_symbol(const Expr& e, const std::string& from, const std::string& to) {
    return replace_subtree(e, Expr::symbol(from), Expr::symbol(to));
}

}  // namespace mathsynth
