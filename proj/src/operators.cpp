#include "mathsynth/operators.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "mathsynth/poly.hpp"

namespace mathsynth {

std::string OperatorSpec::signature() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].name + ": " + std::string(type_name(params[i].type));
    }
    return out + ") -> " + std::string(type_name(return_type));
}

TypedValue apply_op(const OperatorSpec& op, const std::vector<TypedValue>& args) {
    if (args.size() != op.arity()) return {};
    for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i].is_absent() || !is_subtype(args[i].kind(), op.params[i].type)) return {};
    try {
        TypedValue out = op.eval(args);
        if (!out.is_absent() && !is_subtype(out.kind(), op.return_type)) return {};
        return out;
    } catch (const std::exception&) {
        return {};
    }
}

// ---------------------------------------------------------------------------
// Registry

Registry::Registry(std::vector<OperatorPtr> ops) {
    for (auto& op : ops) *this = with(std::move(op));
}

std::optional<std::size_t> Registry::find(std::string_view name) const {
    for (std::size_t i = 0; i < ops_.size(); ++i)
        if (ops_[i]->name == name) return i;
    return std::nullopt;
}

std::size_t Registry::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw RegistryError("operator not in registry: " + std::string(name));
}

Registry Registry::with(OperatorPtr op) const {
    if (!op || !op->eval) throw RegistryError("operator without evaluation procedure");
    if (op->arity() < 1 || op->arity() > 2)
        throw RegistryError("operator " + op->name + " has unsupported arity " + std::to_string(op->arity()));
    if (find(op->name)) throw RegistryError("duplicate operator name: " + op->name);
    Registry out = *this;
    out.ops_.push_back(std::move(op));
    return out;
}

std::string Registry::manifest() const {
    std::string out;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        out += std::to_string(i) + " " + ops_[i]->signature();
        if (!ops_[i]->expansion.empty()) out += " = " + ops_[i]->expansion;
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integer helpers

bool is_prime_integer(std::int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::int64_t d = 3; d <= n / d; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::vector<std::int64_t> distinct_prime_factors(std::int64_t n) {
    std::vector<std::int64_t> out;
    if (n < 0) n = -n;
    for (std::int64_t d = 2; d <= n / d; ++d) {
        if (n % d) continue;
        out.push_back(d);
        while (n % d == 0) n /= d;
    }
    if (n > 1) out.push_back(n);
    return out;
}

namespace {

using Args = std::vector<TypedValue>;

std::optional<std::int64_t> integer_of(const TypedValue& v) {
    if (v.kind() != TypeTag::Value && v.kind() != TypeTag::Rational) return std::nullopt;
    const Rational& r = v.as_rational();
    if (!r.is_integer() || r.num() == INT64_MIN) return std::nullopt;
    return r.num();
}

Expr expr_of(const TypedValue& v) { return *v.to_expr(); }

TypedValue binding_value(const Binding& b) {
    if (const auto* r = std::get_if<Rational>(&b)) return TypedValue::value(*r);
    return TypedValue::set_of_values(std::get<std::vector<Rational>>(b));
}

std::optional<std::string> sole_variable(const Poly& p) {
    const auto vars = p.variables();
    if (vars.size() > 1) return std::nullopt;
    return vars.empty() ? std::string() : vars[0];
}

// Gauss-Jordan elimination over the rationals; requires a unique solution.
std::optional<VariableMap> solve_linear(const std::vector<Poly>& polys, const std::vector<std::string>& vars) {
    const std::size_t n = vars.size();
    std::vector<std::vector<Rational>> rows;
    for (const auto& p : polys) {
        std::vector<Rational> row(n + 1, Rational(0));
        for (const auto& [mono, c] : p.terms()) {
            if (mono.empty()) {
                row[n] = -c;
                continue;
            }
            const auto it = std::find(vars.begin(), vars.end(), mono[0].first);
            row[static_cast<std::size_t>(it - vars.begin())] = c;
        }
        rows.push_back(std::move(row));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && rows[pivot][col].is_zero()) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        const Rational lead = rows[rank][col];
        for (auto& x : rows[rank]) x /= lead;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col].is_zero()) continue;
            const Rational k = rows[r][col];
            for (std::size_t c = col; c <= n; ++c) rows[r][c] -= k * rows[rank][c];
        }
        ++rank;
    }
    for (std::size_t r = rank; r < rows.size(); ++r)
        if (!rows[r][n].is_zero()) return std::nullopt;
    if (rank < n) return std::nullopt;
    VariableMap out;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t col = 0;
        while (rows[r][col].is_zero()) ++col;
        out[vars[col]] = rows[r][n];
    }
    return out;
}

std::optional<VariableMap> solve_univariate(const std::vector<Poly>& polys, const std::string& var) {
    std::vector<Rational> g;
    for (const auto& p : polys) g = g.empty() ? coefficients(p, var) : poly_gcd(g, coefficients(p, var));
    if (g.size() < 2) return std::nullopt;
    const auto roots = rational_roots(g);
    int found = 0;
    for (const auto& r : roots) found += r.second;
    if (found != static_cast<int>(g.size()) - 1) return std::nullopt;  // not split over Q
    std::vector<Rational> values;
    for (const auto& r : roots) values.push_back(r.first);
    VariableMap out;
    if (values.size() == 1)
        out[var] = values[0];
    else
        out[var] = values;
    return out;
}

TypedValue solve_system(const std::vector<Equation>& eqs) {
    std::vector<Poly> polys;
    std::set<std::string> vars;
    bool linear = true;
    for (const auto& eq : eqs) {
        const auto l = to_poly(eq.lhs), r = to_poly(eq.rhs);
        if (!l || !r) return {};
        Poly p = *l - *r;
        if (p.is_zero()) continue;
        if (p.is_constant()) return {};
        for (const auto& v : p.variables()) vars.insert(v);
        if (p.total_degree() > 1) linear = false;
        polys.push_back(std::move(p));
    }
    if (vars.empty()) return {};
    std::optional<VariableMap> m;
    if (linear)
        m = solve_linear(polys, std::vector<std::string>(vars.begin(), vars.end()));
    else if (vars.size() == 1)
        m = solve_univariate(polys, *vars.begin());
    if (!m) return {};
    return TypedValue::mapping(std::move(*m));
}

// Rational-function normal form used by simplify.
struct RatFunc {
    Poly num, den;
};

std::optional<RatFunc> to_ratfunc(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return RatFunc{Poly(e.value()), Poly(Rational(1))};
        case ExprKind::Symbol:
            return RatFunc{Poly::variable(e.name()), Poly(Rational(1))};
        case ExprKind::Add:
        case ExprKind::Mul: {
            const bool add = e.kind() == ExprKind::Add;
            RatFunc acc{Poly(Rational(add ? 0 : 1)), Poly(Rational(1))};
            for (const auto& a : e.args()) {
                auto t = to_ratfunc(a);
                if (!t) return std::nullopt;
                if (add)
                    acc = {acc.num * t->den + t->num * acc.den, acc.den * t->den};
                else
                    acc = {acc.num * t->num, acc.den * t->den};
            }
            return acc;
        }
        case ExprKind::Div: {
            auto a = to_ratfunc(e.arg(0)), b = to_ratfunc(e.arg(1));
            if (!a || !b || b->num.is_zero()) return std::nullopt;
            return RatFunc{a->num * b->den, a->den * b->num};
        }
        case ExprKind::Pow: {
            const Expr& x = e.arg(1);
            if (!x.is_number() || !x.value().is_integer() || x.value().abs() > Rational(64)) return std::nullopt;
            auto b = to_ratfunc(e.arg(0));
            if (!b) return std::nullopt;
            const auto k = static_cast<int>(x.value().num());
            if (k >= 0) return RatFunc{b->num.pow(k), b->den.pow(k)};
            if (b->num.is_zero()) return std::nullopt;
            return RatFunc{b->den.pow(-k), b->num.pow(-k)};
        }
        case ExprKind::Call:
            return std::nullopt;
    }
    return std::nullopt;
}

Expr simplify_expr(const Expr& e) {
    auto rf = to_ratfunc(e);
    if (!rf) return e;
    Poly num = rf->num, den = rf->den;
    if (den.is_constant()) return to_expr(num * Poly(Rational(1) / den.constant_term()));
    if (num.is_zero()) return Expr::number(0);
    std::set<std::string> vars;
    for (const auto& v : num.variables()) vars.insert(v);
    for (const auto& v : den.variables()) vars.insert(v);
    if (vars.size() == 1) {
        const std::string& v = *vars.begin();
        const auto g = poly_gcd(coefficients(num, v), coefficients(den, v));
        if (g.size() > 1) {
            num = from_coefficients(poly_divmod(coefficients(num, v), g).first, v);
            den = from_coefficients(poly_divmod(coefficients(den, v), g).first, v);
        }
    }
    const Poly scale(Rational(1) / den.leading_coefficient());
    num = num * scale;
    den = den * scale;
    if (den.is_constant()) return to_expr(num * Poly(Rational(1) / den.constant_term()));
    return Expr::div(to_expr(num), to_expr(den));
}

TypedValue keep_kind(const TypedValue& original, const Expr& e) {
    TypedValue out = TypedValue::expression(e);
    if (original.kind() == TypeTag::Expression) return out;
    try {
        return out.retag(original.kind());
    } catch (const TypingError&) {
        return out;
    }
}

TypedValue simplify_value(const TypedValue& v) {
    switch (v.kind()) {
        case TypeTag::Expression:
        case TypeTag::Value:
        case TypeTag::Rational:
        case TypeTag::Variable:
            return keep_kind(v, simplify_expr(expr_of(v)));
        case TypeTag::Equation:
            return TypedValue::equation({simplify_expr(v.as_equation().lhs), simplify_expr(v.as_equation().rhs)});
        case TypeTag::Function: {
            Function f = v.as_function();
            f.body = simplify_expr(f.body);
            return TypedValue::function(std::move(f));
        }
        case TypeTag::ListOfEquation: {
            std::vector<Equation> out;
            for (const auto& eq : v.as_equations()) out.push_back({simplify_expr(eq.lhs), simplify_expr(eq.rhs)});
            return TypedValue::equations(std::move(out));
        }
        default:
            return v;
    }
}

TypedValue substitute_value(const TypedValue& v, const Equation& eq) {
    auto sub = [&](const Expr& e) { return replace_subtree(e, eq.lhs, eq.rhs); };
    switch (v.kind()) {
        case TypeTag::Expression:
        case TypeTag::Value:
        case TypeTag::Rational:
        case TypeTag::Variable: {
            const Expr e = expr_of(v);
            const Expr r = sub(e);
            return r == e ? v : TypedValue::expression(r);
        }
        case TypeTag::Equation:
            return TypedValue::equation({sub(v.as_equation().lhs), sub(v.as_equation().rhs)});
        case TypeTag::Function: {
            Function f = v.as_function();
            f.body = sub(f.body);
            return TypedValue::function(std::move(f));
        }
        case TypeTag::ListOfEquation: {
            std::vector<Equation> out;
            for (const auto& e : v.as_equations()) out.push_back({sub(e.lhs), sub(e.rhs)});
            return TypedValue::equations(std::move(out));
        }
        default:
            return v;
    }
}

TypedValue derivative_of(const Expr& e, std::optional<std::string> var) {
    const auto p = to_poly(e);
    if (!p) return {};
    if (!var) {
        var = sole_variable(*p);
        if (!var) return {};
        if (var->empty()) return TypedValue::expression(Expr::number(0));
    }
    return TypedValue::expression(to_expr(p->derivative(*var)));
}

OperatorPtr make_op(std::string name, std::vector<Param> params, TypeTag ret,
                    std::function<TypedValue(const Args&)> eval) {
    auto op = std::make_shared<OperatorSpec>();
    op->name = std::move(name);
    op->params = std::move(params);
    op->return_type = ret;
    op->eval = std::move(eval);
    return op;
}

std::vector<OperatorPtr> build_builtins() {
    using T = TypeTag;
    std::vector<OperatorPtr> ops;

    ops.push_back(make_op("lookup_value", {{"mapping", T::MapVariableToValue}, {"key", T::Variable}}, T::Object,
                          [](const Args& a) -> TypedValue {
                              const auto& m = a[0].as_mapping();
                              const auto it = m.find(a[1].as_variable());
                              if (it == m.end()) return {};
                              return binding_value(it->second);
                          }));

    ops.push_back(make_op("solve_system", {{"system", T::ListOfEquation}}, T::MapVariableToValue,
                          [](const Args& a) { return solve_system(a[0].as_equations()); }));

    ops.push_back(make_op("append", {{"system", T::ListOfEquation}, {"equation", T::Equation}}, T::ListOfEquation,
                          [](const Args& a) {
                              auto list = a[0].as_equations();
                              list.push_back(a[1].as_equation());
                              return TypedValue::equations(std::move(list));
                          }));

    ops.push_back(make_op("append_to_empty_list", {{"equation", T::Equation}}, T::ListOfEquation,
                          [](const Args& a) { return TypedValue::equations({a[0].as_equation()}); }));

    ops.push_back(make_op("factor", {{"inpt", T::Expression}}, T::Expression, [](const Args& a) -> TypedValue {
        const auto p = to_poly(expr_of(a[0]));
        if (!p) return {};
        const auto var = sole_variable(*p);
        if (!var) return {};
        if (var->empty()) return TypedValue::expression(Expr::number(p->constant_term()));
        return TypedValue::expression(factorization_to_expr(factor_univariate(coefficients(*p, *var)), *var));
    }));

    ops.push_back(make_op("differentiate", {{"expression", T::Expression}}, T::Expression,
                          [](const Args& a) { return derivative_of(expr_of(a[0]), std::nullopt); }));

    ops.push_back(make_op("mod", {{"numerator", T::Value}, {"denominator", T::Value}}, T::Value,
                          [](const Args& a) -> TypedValue {
                              const auto n = integer_of(a[0]), d = integer_of(a[1]);
                              if (!n || !d || *d == 0) return {};
                              std::int64_t r = *n % *d;
                              if (r < 0) r += *d < 0 ? -*d : *d;
                              return TypedValue::value(r);
                          }));

    ops.push_back(make_op("gcd", {{"x", T::Value}, {"y", T::Value}}, T::Value, [](const Args& a) -> TypedValue {
        const auto x = integer_of(a[0]), y = integer_of(a[1]);
        if (!x || !y) return {};
        return TypedValue::value(std::gcd(*x, *y));
    }));

    ops.push_back(make_op("divides", {{"numerator", T::Value}, {"denominator", T::Value}}, T::Boolean,
                          [](const Args& a) -> TypedValue {
                              const auto x = integer_of(a[0]), y = integer_of(a[1]);
                              if (!x || !y || *x == 0) return {};
                              return TypedValue::boolean(*y % *x == 0);
                          }));

    ops.push_back(make_op("is_prime", {{"x", T::Value}}, T::Boolean, [](const Args& a) -> TypedValue {
        const auto x = integer_of(a[0]);
        if (!x) return {};
        return TypedValue::boolean(is_prime_integer(*x));
    }));

    ops.push_back(make_op("lcm", {{"x", T::Value}, {"y", T::Value}}, T::Value, [](const Args& a) -> TypedValue {
        const auto x = integer_of(a[0]), y = integer_of(a[1]);
        if (!x || !y) return {};
        if (*x == 0 || *y == 0) return TypedValue::value(0);
        const std::int64_t g = std::gcd(*x, *y);
        return TypedValue::value(checked::mul(std::abs(*x) / g, std::abs(*y)));
    }));

    ops.push_back(make_op("lcd", {{"x", T::Rational}, {"y", T::Rational}}, T::Value, [](const Args& a) {
        const std::int64_t p = a[0].as_rational().den(), q = a[1].as_rational().den();
        return TypedValue::value(checked::mul(p / std::gcd(p, q), q));
    }));

    ops.push_back(make_op("prime_factors", {{"n", T::Value}}, T::SetOfValue, [](const Args& a) -> TypedValue {
        const auto n = integer_of(a[0]);
        if (!n || *n == 0) return {};
        std::vector<Rational> out;
        for (auto p : distinct_prime_factors(*n)) out.emplace_back(p);
        return TypedValue::set_of_values(std::move(out));
    }));

    ops.push_back(make_op("evaluate_function", {{"function_definition", T::Function}, {"function_argument", T::Expression}},
                          T::Value, [](const Args& a) -> TypedValue {
                              const Function& f = a[0].as_function();
                              Expr arg = expr_of(a[1]);
                              if (arg.kind() == ExprKind::Call) {
                                  if (arg.name() != f.name || arg.args().size() != 1) return {};
                                  arg = arg.arg(0);
                              }
                              const auto p = to_poly(replace_subtree(f.body, Expr::symbol(f.parameter), arg));
                              if (!p || !p->is_constant()) return {};
                              return TypedValue::value(p->constant_term());
                          }));

    ops.push_back(make_op("not_op", {{"x", T::Boolean}}, T::Boolean,
                          [](const Args& a) { return TypedValue::boolean(!a[0].as_boolean()); }));

    ops.push_back(make_op("differentiate_wrt", {{"expression", T::Expression}, {"variable", T::Variable}},
                          T::Expression,
                          [](const Args& a) { return derivative_of(expr_of(a[0]), a[1].as_variable()); }));

    ops.push_back(make_op("make_equation", {{"expression1", T::Expression}, {"expression2", T::Expression}},
                          T::Equation,
                          [](const Args& a) { return TypedValue::equation({expr_of(a[0]), expr_of(a[1])}); }));

    ops.push_back(make_op("simplify", {{"inpt", T::Object}}, T::Object,
                          [](const Args& a) { return simplify_value(a[0]); }));

    ops.push_back(make_op("make_function", {{"expression1", T::Expression}, {"expression2", T::Expression}},
                          T::Function, [](const Args& a) -> TypedValue {
                              const Expr head = expr_of(a[0]);
                              if (head.kind() != ExprKind::Call || head.args().size() != 1 || !head.arg(0).is_symbol())
                                  return {};
                              return TypedValue::function({head.name(), head.arg(0).name(), expr_of(a[1])});
                          }));

    ops.push_back(make_op("replace_arg", {{"function", T::Function}, {"var", T::Variable}}, T::Function,
                          [](const Args& a) -> TypedValue {
                              const Function& f = a[0].as_function();
                              const std::string& v = a[1].as_variable();
                              if (v == f.parameter) return a[0];
                              std::vector<std::string> free;
                              collect_symbols(f.body, free);
                              if (std::find(free.begin(), free.end(), v) != free.end()) return {};
                              return TypedValue::function({f.name, v, rename_symbol(f.body, f.parameter, v)});
                          }));

    ops.push_back(make_op("lookup_value_equation", {{"mapping", T::MapVariableToValue}, {"key", T::Variable}},
                          T::Equation, [](const Args& a) -> TypedValue {
                              const auto& m = a[0].as_mapping();
                              const auto it = m.find(a[1].as_variable());
                              if (it == m.end()) return {};
                              const auto* r = std::get_if<Rational>(&it->second);
                              if (!r) return {};
                              return TypedValue::equation({Expr::symbol(it->first), Expr::number(*r)});
                          }));

    ops.push_back(make_op("extract_isolated_variable", {{"equation", T::Equation}}, T::Variable,
                          [](const Args& a) -> TypedValue {
                              const Equation& eq = a[0].as_equation();
                              if (eq.lhs.is_symbol() == eq.rhs.is_symbol()) return {};
                              return TypedValue::variable(eq.lhs.is_symbol() ? eq.lhs.name() : eq.rhs.name());
                          }));

    ops.push_back(make_op("substitution_left_to_right", {{"arb", T::Object}, {"eq", T::Equation}}, T::Object,
                          [](const Args& a) { return substitute_value(a[0], a[1].as_equation()); }));

    return ops;
}

}  // namespace

const std::vector<OperatorPtr>& builtin_operators() {
    static const std::vector<OperatorPtr> ops = build_builtins();
    return ops;
}

OperatorPtr builtin_operator(std::string_view name) {
    for (const auto& op : builtin_operators())
        if (op->name == name) return op;
    throw RegistryError("unknown operator: " + std::string(name));
}

Registry make_registry(const std::vector<std::string>& names) {
    std::vector<OperatorPtr> ops;
    for (const auto& n : names) ops.push_back(builtin_operator(n));
    return Registry(std::move(ops));
}

const Registry& default_registry() {
    static const Registry r = make_registry({"lookup_value", "solve_system", "append", "append_to_empty_list", "factor",
                                             "differentiate", "mod", "gcd", "divides", "is_prime", "lcm", "lcd",
                                             "prime_factors", "evaluate_function", "not_op"});
    return r;
}

const Registry& full_registry() {
    static const Registry r(builtin_operators());
    return r;
}

}  // namespace mathsynth
