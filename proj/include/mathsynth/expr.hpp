#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsynth/rational.hpp"

namespace mathsynth {

// Raised for malformed mathematical text; `position` is a byte offset into the input.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), detail(what), position(position) {}
    std::string detail;
    std::size_t position;
};

enum class ExprKind { Number, Symbol, Add, Mul, Div, Pow, Call };

class Expr;

struct ExprNode {
    ExprKind kind;
    Rational number;         // Number
    std::string name;        // Symbol, Call
    std::vector<Expr> args;  // Add/Mul terms, Div/Pow (lhs, rhs), Call arguments
};

// Immutable handle to a symbolic expression tree.
//
// Trees are kept in the shape the parser produces, so that printing and
// re-parsing reproduces the same tree:
//   - Add and Mul are n-ary and flattened;
//   - subtraction is addition of a negated term;
//   - a numeric literal divided by a numeric literal folds to one Number.
class Expr {
public:
    Expr() : Expr(number(0)) {}

    static Expr number(Rational value);
    static Expr symbol(std::string name);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr div(Expr numerator, Expr denominator);
    static Expr pow(Expr base, Expr exponent);
    static Expr call(std::string name, std::vector<Expr> args);

    ExprKind kind() const { return node_->kind; }
    const Rational& value() const { return node_->number; }
    const std::string& name() const { return node_->name; }
    const std::vector<Expr>& args() const { return node_->args; }
    const Expr& arg(std::size_t i) const { return node_->args.at(i); }

    bool is_number() const { return kind() == ExprKind::Number; }
    bool is_symbol() const { return kind() == ExprKind::Symbol; }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const ExprNode> node_;
};

// Arithmetic negation in the parser's normal form.
Expr negate(const Expr& e);

// Recursive-descent parser for the canonical text grammar:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := atom ('**' unary)?
//   atom    := number | identifier | identifier '(' sum (',' sum)* ')' | '(' sum ')'
Expr parse_expr(std::string_view text);

std::string to_string(const Expr& e);

// Syntactic helpers.
bool contains_call(const Expr& e);
void collect_symbols(const Expr& e, std::vector<std::string>& out);
Expr replace_subtree(const Expr& e, const Expr& pattern, const Expr& replacement);
Expr rename_symbol(const Expr& e, const std::string& from, const std::string& to);

}  // namespace mathsynth
