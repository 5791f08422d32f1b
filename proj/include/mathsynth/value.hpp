#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mathsynth/expr.hpp"
#include "mathsynth/rational.hpp"

namespace mathsynth {

enum class TypeTag {
    Object,
    Equation,
    Function,
    Expression,
    Value,
    Variable,
    Rational,
    ListOfEquation,
    MapVariableToValue,
    Boolean,
    SetOfValue,
    Absent,
};

inline constexpr TypeTag kAllTypeTags[] = {
    TypeTag::Object,         TypeTag::Equation,           TypeTag::Function, TypeTag::Expression,
    TypeTag::Value,          TypeTag::Variable,           TypeTag::Rational, TypeTag::ListOfEquation,
    TypeTag::MapVariableToValue, TypeTag::Boolean,        TypeTag::SetOfValue, TypeTag::Absent,
};

std::string_view type_name(TypeTag t);
std::optional<TypeTag> type_from_name(std::string_view name);

// Parent in the type hierarchy; nullopt for the root (Object).
std::optional<TypeTag> parent_type(TypeTag t);

// True iff `candidate` equals `required` or `required` is an ancestor of it.
bool is_subtype(TypeTag candidate, TypeTag required);

// Raised when a value does not fit the expected type.
struct TypingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Equation {
    Expr lhs, rhs;
    friend bool operator==(const Equation&, const Equation&) = default;
};

// Single-argument named function, e.g. f(x) = 2*x + 1.
struct Function {
    std::string name;
    std::string parameter;
    Expr body;
    friend bool operator==(const Function&, const Function&) = default;
};

// A variable is bound either to one value or to a set of roots.
using Binding = std::variant<Rational, std::vector<Rational>>;
using VariableMap = std::map<std::string, Binding>;

// Immutable runtime value tagged with its place in the type hierarchy.
class TypedValue {
public:
    using Payload = std::variant<std::monostate, Expr, Rational, std::string, Equation, Function,
                                 std::vector<Equation>, VariableMap, bool, std::vector<Rational>>;

    TypedValue() : TypedValue(TypeTag::Absent, std::monostate{}) {}

    static TypedValue absent() { return {}; }
    static TypedValue expression(Expr e);
    static TypedValue value(Rational r);
    static TypedValue rational(Rational r);
    static TypedValue variable(std::string name);
    static TypedValue equation(Equation eq);
    static TypedValue function(Function f);
    static TypedValue equations(std::vector<Equation> list);
    static TypedValue mapping(VariableMap m);
    static TypedValue boolean(bool b);
    static TypedValue set_of_values(std::vector<Rational> values);  // sorted and deduplicated

    TypeTag kind() const { return kind_; }
    bool is_absent() const { return kind_ == TypeTag::Absent; }

    const Expr& as_expression_payload() const { return std::get<Expr>(*payload_); }
    const Rational& as_rational() const { return std::get<Rational>(*payload_); }
    const std::string& as_variable() const { return std::get<std::string>(*payload_); }
    const Equation& as_equation() const { return std::get<Equation>(*payload_); }
    const Function& as_function() const { return std::get<Function>(*payload_); }
    const std::vector<Equation>& as_equations() const { return std::get<std::vector<Equation>>(*payload_); }
    const VariableMap& as_mapping() const { return std::get<VariableMap>(*payload_); }
    bool as_boolean() const { return std::get<bool>(*payload_); }
    const std::vector<Rational>& as_set() const { return std::get<std::vector<Rational>>(*payload_); }

    // Any Expression-or-below value viewed as a symbolic tree.
    std::optional<Expr> to_expr() const;

    // Same payload, re-tagged; valid only along the Expression/Value/Rational chain.
    TypedValue retag(TypeTag kind) const;

    friend bool operator==(const TypedValue& a, const TypedValue& b);

private:
    TypedValue(TypeTag kind, Payload payload)
        : kind_(kind), payload_(std::make_shared<const Payload>(std::move(payload))) {}

    TypeTag kind_;
    std::shared_ptr<const Payload> payload_;
};

// Canonical dataset-style text.
std::string render(const TypedValue& v);

// Inverse of render. Without a hint the kind is inferred from the text:
// "name(var) = body" is a Function, any other '=' an Equation, a lone
// identifier a Variable, an integer or decimal literal a Value, a/b a Rational,
// anything else an Expression. A hint must be a supertype of the inferred kind
// and the result carries the hinted kind.
TypedValue parse_value(std::string_view text, std::optional<TypeTag> expected = std::nullopt);

}  // namespace mathsynth
