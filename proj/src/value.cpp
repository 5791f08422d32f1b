#include "mathsynth/value.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace mathsynth {

std::string_view type_name(TypeTag t) {
    switch (t) {
        case TypeTag::Object: return "Object";
        case TypeTag::Equation: return "Equation";
        case TypeTag::Function: return "Function";
        case TypeTag::Expression: return "Expression";
        case TypeTag::Value: return "Value";
        case TypeTag::Variable: return "Variable";
        case TypeTag::Rational: return "Rational";
        case TypeTag::ListOfEquation: return "ListOfEquation";
        case TypeTag::MapVariableToValue: return "MapVariableToValue";
        case TypeTag::Boolean: return "Boolean";
        case TypeTag::SetOfValue: return "SetOfValue";
        case TypeTag::Absent: return "Absent";
    }
    throw std::logic_error("unknown type tag");
}

std::optional<TypeTag> type_from_name(std::string_view name) {
    for (TypeTag t : kAllTypeTags)
        if (type_name(t) == name) return t;
    return std::nullopt;
}

std::optional<TypeTag> parent_type(TypeTag t) {
    switch (t) {
        case TypeTag::Object:
            return std::nullopt;
        case TypeTag::Value:
        case TypeTag::Variable:
            return TypeTag::Expression;
        case TypeTag::Rational:
            return TypeTag::Value;
        case TypeTag::Equation:
        case TypeTag::Function:
        case TypeTag::Expression:
        case TypeTag::ListOfEquation:
        case TypeTag::MapVariableToValue:
        case TypeTag::Boolean:
        case TypeTag::SetOfValue:
        case TypeTag::Absent:
            return TypeTag::Object;
    }
    throw std::logic_error("type tag outside the hierarchy");
}

bool is_subtype(TypeTag candidate, TypeTag required) {
    for (std::optional<TypeTag> t = candidate; t; t = parent_type(*t))
        if (*t == required) return true;
    return false;
}

// ---------------------------------------------------------------------------

TypedValue TypedValue::expression(Expr e) { return {TypeTag::Expression, std::move(e)}; }
TypedValue TypedValue::value(Rational r) { return {TypeTag::Value, r}; }
TypedValue TypedValue::rational(Rational r) { return {TypeTag::Rational, r}; }
TypedValue TypedValue::variable(std::string name) { return {TypeTag::Variable, std::move(name)}; }
TypedValue TypedValue::equation(Equation eq) { return {TypeTag::Equation, std::move(eq)}; }
TypedValue TypedValue::function(Function f) { return {TypeTag::Function, std::move(f)}; }
TypedValue TypedValue::equations(std::vector<Equation> list) { return {TypeTag::ListOfEquation, std::move(list)}; }
TypedValue TypedValue::mapping(VariableMap m) { return {TypeTag::MapVariableToValue, std::move(m)}; }
TypedValue TypedValue::boolean(bool b) { return {TypeTag::Boolean, b}; }

TypedValue TypedValue::set_of_values(std::vector<Rational> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return {TypeTag::SetOfValue, std::move(values)};
}

std::optional<Expr> TypedValue::to_expr() const {
    switch (kind_) {
        case TypeTag::Expression:
            return as_expression_payload();
        case TypeTag::Value:
        case TypeTag::Rational:
            return Expr::number(as_rational());
        case TypeTag::Variable:
            return Expr::symbol(as_variable());
        default:
            return std::nullopt;
    }
}

TypedValue TypedValue::retag(TypeTag kind) const {
    if (kind == kind_) return *this;
    switch (kind) {
        case TypeTag::Expression:
            if (auto e = to_expr()) return expression(*e);
            break;
        case TypeTag::Value:
        case TypeTag::Rational: {
            if (kind_ == TypeTag::Value || kind_ == TypeTag::Rational)
                return kind == TypeTag::Value ? value(as_rational()) : rational(as_rational());
            if (kind_ == TypeTag::Expression && as_expression_payload().is_number())
                return kind == TypeTag::Value ? value(as_expression_payload().value())
                                              : rational(as_expression_payload().value());
            break;
        }
        case TypeTag::Variable:
            if (kind_ == TypeTag::Expression && as_expression_payload().is_symbol())
                return variable(as_expression_payload().name());
            break;
        default:
            break;
    }
    throw TypingError("cannot view " + std::string(type_name(kind_)) + " as " + std::string(type_name(kind)));
}

bool operator==(const TypedValue& a, const TypedValue& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.payload_ == b.payload_) return true;
    return *a.payload_ == *b.payload_;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string join_rationals(const std::vector<Rational>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += values[i].str();
    }
    return out;
}

std::string render_equation(const Equation& eq) { return to_string(eq.lhs) + " = " + to_string(eq.rhs); }

}  // namespace

std::string render(const TypedValue& v) {
    switch (v.kind()) {
        case TypeTag::Absent:
        case TypeTag::Object:
            return "None";
        case TypeTag::Expression:
            return to_string(v.as_expression_payload());
        case TypeTag::Value:
        case TypeTag::Rational:
            return v.as_rational().str();
        case TypeTag::Variable:
            return v.as_variable();
        case TypeTag::Equation:
            return render_equation(v.as_equation());
        case TypeTag::Function: {
            const auto& f = v.as_function();
            return f.name + "(" + f.parameter + ") = " + to_string(f.body);
        }
        case TypeTag::ListOfEquation: {
            std::string out = "[";
            const auto& list = v.as_equations();
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (i) out += ", ";
                out += render_equation(list[i]);
            }
            return out + "]";
        }
        case TypeTag::MapVariableToValue: {
            std::string out = "{";
            bool first = true;
            for (const auto& [name, binding] : v.as_mapping()) {
                if (!first) out += ", ";
                first = false;
                out += name + ": ";
                if (const auto* r = std::get_if<Rational>(&binding))
                    out += r->str();
                else
                    out += "{" + join_rationals(std::get<std::vector<Rational>>(binding)) + "}";
            }
            return out + "}";
        }
        case TypeTag::Boolean:
            return v.as_boolean() ? "True" : "False";
        case TypeTag::SetOfValue:
            return v.as_set().empty() ? "{}" : join_rationals(v.as_set());
    }
    throw std::logic_error("unrenderable value");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view trim(std::string_view s, std::size_t* offset = nullptr) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    if (offset) *offset += b;
    return s.substr(b, e - b);
}

Expr parse_at(std::string_view text, std::size_t offset) {
    try {
        return parse_expr(text);
    } catch (const ParseError& e) {
        throw ParseError(e.detail, e.position + offset);
    }
}

// Splits on `sep` at bracket depth zero; returns (offset, piece) pairs.
std::vector<std::pair<std::size_t, std::string_view>> split_top_level(std::string_view s, char sep) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        else if (c == ')' || c == ']' || c == '}') --depth;
        else if (c == sep && depth == 0) {
            out.emplace_back(start, s.substr(start, i - start));
            start = i + 1;
        }
    }
    out.emplace_back(start, s.substr(start));
    return out;
}

Rational parse_number(std::string_view text, std::size_t offset) {
    std::size_t off = offset;
    const auto t = trim(text, &off);
    const Expr e = parse_at(t, off);
    if (!e.is_number()) throw ParseError("expected a number", off);
    return e.value();
}

std::vector<Rational> parse_number_list(std::string_view text, std::size_t offset) {
    std::vector<Rational> values;
    for (const auto& [at, piece] : split_top_level(text, ',')) values.push_back(parse_number(piece, offset + at));
    return values;
}

Equation parse_equation(std::string_view text, std::size_t offset) {
    const auto sides = split_top_level(text, '=');
    if (sides.size() != 2) throw ParseError("expected exactly one '='", offset);
    std::size_t lo = offset + sides[0].first, ro = offset + sides[1].first;
    const auto l = trim(sides[0].second, &lo);
    const auto r = trim(sides[1].second, &ro);
    if (l.empty() || r.empty()) throw ParseError("empty side of equation", offset);
    return {parse_at(l, lo), parse_at(r, ro)};
}

TypedValue parse_list(std::string_view t, std::size_t offset) {
    if (t.size() < 2 || t.back() != ']') throw ParseError("unterminated list", offset + t.size());
    const auto inner = t.substr(1, t.size() - 2);
    std::vector<Equation> list;
    if (!trim(inner).empty())
        for (const auto& [at, piece] : split_top_level(inner, ','))
            list.push_back(parse_equation(piece, offset + 1 + at));
    return TypedValue::equations(std::move(list));
}

TypedValue parse_braced(std::string_view t, std::size_t offset, bool want_map) {
    if (t.size() < 2 || t.back() != '}') throw ParseError("unterminated braces", offset + t.size());
    const auto inner = t.substr(1, t.size() - 2);
    if (trim(inner).empty()) return want_map ? TypedValue::mapping({}) : TypedValue::set_of_values({});
    if (!want_map) return TypedValue::set_of_values(parse_number_list(inner, offset + 1));
    VariableMap m;
    for (const auto& [at, piece] : split_top_level(inner, ',')) {
        const auto colon = piece.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected ':' in mapping", offset + 1 + at);
        std::size_t ko = offset + 1 + at;
        const auto key = trim(piece.substr(0, colon), &ko);
        const Expr k = parse_at(key, ko);
        if (!k.is_symbol()) throw ParseError("mapping key must be a variable", ko);
        std::size_t vo = offset + 1 + at + colon + 1;
        const auto val = trim(piece.substr(colon + 1), &vo);
        if (!val.empty() && val.front() == '{') {
            if (val.back() != '}') throw ParseError("unterminated set", vo);
            m[k.name()] = parse_number_list(val.substr(1, val.size() - 2), vo + 1);
        } else {
            m[k.name()] = parse_number(val, vo);
        }
    }
    return TypedValue::mapping(std::move(m));
}

bool has_top_level(std::string_view s, char c) { return split_top_level(s, c).size() > 1; }

TypedValue infer(std::string_view t, std::size_t offset) {
    if (t == "None") return TypedValue::absent();
    if (t == "True") return TypedValue::boolean(true);
    if (t == "False") return TypedValue::boolean(false);
    if (t.front() == '[') return parse_list(t, offset);
    if (t.front() == '{') return parse_braced(t, offset, t.find(':') != std::string_view::npos);
    if (has_top_level(t, ',')) return TypedValue::set_of_values(parse_number_list(t, offset));
    if (has_top_level(t, '=')) {
        Equation eq = parse_equation(t, offset);
        const Expr& head = eq.lhs;
        if (head.kind() == ExprKind::Call && head.args().size() == 1 && head.arg(0).is_symbol())
            return TypedValue::function({head.name(), head.arg(0).name(), eq.rhs});
        return TypedValue::equation(std::move(eq));
    }
    const Expr e = parse_at(t, offset);
    if (e.is_symbol()) return TypedValue::variable(e.name());
    if (e.is_number()) {
        static const std::regex rational_literal(R"(^-?\d+\s*/\s*\d+$)");
        static const std::regex plain_literal(R"(^-?\d+(\.\d+)?$)");
        const std::string s(t);
        if (std::regex_match(s, rational_literal)) return TypedValue::rational(e.value());
        if (std::regex_match(s, plain_literal)) return TypedValue::value(e.value());
    }
    return TypedValue::expression(e);
}

}  // namespace

TypedValue parse_value(std::string_view text, std::optional<TypeTag> expected) {
    std::size_t offset = 0;
    const auto t = trim(text, &offset);
    if (t.empty()) throw ParseError("empty value", offset);

    if (!expected || *expected == TypeTag::Object) return infer(t, offset);

    switch (*expected) {
        case TypeTag::ListOfEquation:
            if (t.front() != '[') throw TypingError("expected a list of equations: " + std::string(t));
            return parse_list(t, offset);
        case TypeTag::MapVariableToValue:
            if (t.front() != '{') throw TypingError("expected a mapping: " + std::string(t));
            return parse_braced(t, offset, true);
        case TypeTag::SetOfValue:
            if (t.front() == '{') return parse_braced(t, offset, false);
            return TypedValue::set_of_values(parse_number_list(t, offset));
        case TypeTag::Equation:
            return TypedValue::equation(parse_equation(t, offset));
        default:
            break;
    }

    TypedValue v = infer(t, offset);
    if (*expected == TypeTag::Rational && v.kind() == TypeTag::Value) return v.retag(TypeTag::Rational);
    if (!is_subtype(v.kind(), *expected))
        throw TypingError(std::string(type_name(v.kind())) + " is not a " + std::string(type_name(*expected)) +
                          ": " + std::string(t));
    return v.retag(*expected);
}

}  // namespace mathsynth
