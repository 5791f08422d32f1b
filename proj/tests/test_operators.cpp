#include <random>

#include "doctest.h"
#include "mathsynth/operators.hpp"
#include "mathsynth/poly.hpp"

using namespace mathsynth;

namespace {

TypedValue run(std::string_view op, std::vector<TypedValue> args) {
    return apply_op(*builtin_operator(op), args);
}

TypedValue V(std::int64_t n) { return TypedValue::value(n); }
TypedValue E(const char* text) { return TypedValue::expression(parse_expr(text)); }
TypedValue Var(const char* name) { return TypedValue::variable(name); }
TypedValue Eq(const char* text) { return parse_value(text, TypeTag::Equation); }
TypedValue Fn(const char* text) { return parse_value(text, TypeTag::Function); }

std::string out(std::string_view op, std::vector<TypedValue> args) { return render(run(op, std::move(args))); }

}  // namespace

TEST_CASE("registries") {
    CHECK(builtin_operators().size() == 23);
    const Registry& r = default_registry();
    REQUIRE(r.size() == 15);
    CHECK(r.index_of("lookup_value") == 0);
    CHECK(r.index_of("differentiate") == 5);
    CHECK(r.index_of("not_op") == 14);
    CHECK(full_registry().index_of("substitution_left_to_right") == 22);
    CHECK_THROWS_AS(r.with(builtin_operator("gcd")), RegistryError);
    CHECK_THROWS_AS(builtin_operator("integrate"), RegistryError);
    const std::string manifest = r.manifest();
    CHECK(manifest.find("0 lookup_value(mapping: MapVariableToValue, key: Variable) -> Object\n") == 0);
    CHECK(manifest.find("11 lcd(x: Rational, y: Rational) -> Value") != std::string::npos);
}

TEST_CASE("equation and mapping operators") {
    const auto sys = run("append", {run("append_to_empty_list", {Eq("2*x + y = 3")}), Eq("x - y = 0")});
    CHECK(render(sys) == "[2*x + y = 3, x - y = 0]");
    const auto sol = run("solve_system", {sys});
    CHECK(render(sol) == "{x: 1, y: 1}");
    CHECK(out("lookup_value", {sol, Var("y")}) == "1");
    CHECK(out("lookup_value", {run("solve_system", {run("append_to_empty_list", {Eq("x = 2")})}), Var("y")}) == "None");
    CHECK(out("lookup_value_equation", {sol, Var("y")}) == "y = 1");
    CHECK(out("solve_system", {run("append", {run("append_to_empty_list", {Eq("x = 1")}), Eq("x = 2")})}) == "None");
    CHECK(out("solve_system", {run("append_to_empty_list", {Eq("x**2 - 4 = 0")})}) == "{x: {-2, 2}}");
    CHECK(out("lookup_value", {run("solve_system", {run("append_to_empty_list", {Eq("x**2 - 4 = 0")})}), Var("x")}) ==
          "-2, 2");
    CHECK(out("lookup_value", {run("solve_system", {run("append_to_empty_list", {Eq("x**2 - 4*x + 4 = 0")})}),
                               Var("x")}) == "2");
    CHECK(out("solve_system", {run("append_to_empty_list", {Eq("x**2 - 2 = 0")})}) == "None");
    CHECK(out("solve_system", {run("append_to_empty_list", {Eq("x + y = 1")})}) == "None");
    CHECK(out("solve_system",
              {run("append", {run("append", {run("append_to_empty_list", {Eq("x + y + z = 6")}), Eq("x - y = 0")}),
                              Eq("2*z = 2*x + 2")})}) == "{x: 5/3, y: 5/3, z: 8/3}");
    CHECK(render(run("append_to_empty_list", {Eq("x = 1")})) == "[x = 1]");
    CHECK(out("make_equation", {Var("x"), V(2)}) == "x = 2");
    CHECK(out("make_equation", {E("2*x"), Var("y")}) == "2*x = y");
    CHECK(out("make_equation", {E("x + x"), V(0)}) == "x + x = 0");
    CHECK(out("extract_isolated_variable", {Eq("x = 2*y + 1")}) == "x");
    CHECK(out("extract_isolated_variable", {Eq("2*y + 1 = x")}) == "x");
    CHECK(out("extract_isolated_variable", {Eq("2*x = y + 1")}) == "None");
}

TEST_CASE("polynomial operators") {
    CHECK(out("factor", {E("x**2 - 1")}) == "(x - 1)*(x + 1)");
    CHECK(out("factor", {Var("x")}) == "x");
    CHECK(out("factor", {E("2*x**2 + 2*x")}) == "2*x*(x + 1)");
    CHECK(out("factor", {E("x*y + x")}) == "None");
    CHECK(out("differentiate", {E("6*k**2 - 101*k + 2548")}) == "12*k - 101");
    CHECK(out("differentiate", {V(5)}) == "0");
    CHECK(out("differentiate", {E("x*y")}) == "None");
    const auto once = run("differentiate_wrt", {E("-3*z**5 + 13*z**3 + 41*z**2"), Var("z")});
    CHECK(out("differentiate_wrt", {once, Var("z")}) == "-60*z**3 + 78*z + 82");
    CHECK(out("differentiate_wrt", {E("x*y"), Var("y")}) == "x");
    CHECK(out("differentiate_wrt", {V(7), Var("z")}) == "0");
    CHECK(out("simplify", {E("2*x + x")}) == "3*x");
    CHECK(out("simplify", {V(3)}) == "3");
    CHECK(run("simplify", {V(3)}).kind() == TypeTag::Value);
    CHECK(out("simplify", {E("(x**2 - 1)/(x - 1)")}) == "x + 1");
    CHECK(out("simplify", {E("4*h(j) - v(j)")}) == "4*h(j) - v(j)");
    CHECK(out("simplify", {Eq("x + x = 2*(y + 1)")}) == "2*x = 2*y + 2");
}

TEST_CASE("simplify is idempotent") {
    std::mt19937_64 rng(3);
    const char* samples[] = {"(x + 1)**2 - x", "x/(2*x + 4)", "(2*x**2 - 2)/(4*x - 4)", "1/x + 1/y", "3/(x*y)",
                             "x**-2", "(x - y)/(y - x)", "f(x) + f(x)", "7/2"};
    for (const char* s : samples) {
        const auto once = run("simplify", {E(s)});
        INFO(s, " -> ", render(once));
        CHECK(run("simplify", {once}) == once);
        CHECK(parse_value(render(once), TypeTag::Expression) == once);
    }
}

TEST_CASE("number theory operators") {
    CHECK(out("mod", {V(7), V(3)}) == "1");
    CHECK(out("mod", {V(6), V(3)}) == "0");
    CHECK(out("mod", {V(-7), V(3)}) == "2");
    CHECK(out("mod", {V(7), V(0)}) == "None");
    CHECK(out("mod", {Var("x"), V(3)}) == "None");
    CHECK(out("gcd", {V(12), V(18)}) == "6");
    CHECK(out("divides", {V(10), V(5340)}) == "True");
    CHECK(out("divides", {V(3), V(7)}) == "False");
    CHECK(out("divides", {V(1), V(13)}) == "True");
    CHECK(out("is_prime", {V(10)}) == "False");
    CHECK(out("is_prime", {V(2)}) == "True");
    CHECK(out("is_prime", {V(97)}) == "True");
    CHECK(out("not_op", {run("is_prime", {V(10)})}) == "True");
    CHECK(out("lcm", {V(4), V(6)}) == "12");
    CHECK(out("lcd", {parse_value("1/2"), parse_value("1/3")}) == "6");
    CHECK(out("lcd", {parse_value("1/2"), parse_value("3/2")}) == "2");
    CHECK(out("lcd", {TypedValue::rational(2), parse_value("1/3")}) == "3");
    CHECK(out("lcd", {V(2), parse_value("1/3")}) == "None");  // Value is not a Rational
    CHECK(out("prime_factors", {V(12)}) == "2, 3");
    CHECK(out("prime_factors", {V(7)}) == "7");
    CHECK(out("prime_factors", {V(1)}) == "{}");
    CHECK(out("gcd", {TypedValue::value(Rational(1, 2)), V(4)}) == "None");
    CHECK(out("lcm", {V(INT64_MAX), V(INT64_MAX - 1)}) == "None");
}

TEST_CASE("function operators") {
    CHECK(out("evaluate_function", {Fn("f(x) = 2*x + 1"), E("f(2)")}) == "5");
    CHECK(out("evaluate_function", {Fn("f(x) = x"), V(3)}) == "3");
    CHECK(out("evaluate_function", {Fn("f(x) = 2*x + 1"), E("g(2)")}) == "None");
    CHECK(out("evaluate_function", {Fn("f(x) = 2*x + y"), V(2)}) == "None");
    CHECK(out("make_function", {E("f(x)"), E("2*x")}) == "f(x) = 2*x");
    CHECK(out("make_function", {Var("f"), E("2*x")}) == "None");
    CHECK(out("replace_arg", {Fn("f(t) = t + 1"), Var("x")}) == "f(x) = x + 1");
    CHECK(out("replace_arg", {Fn("f(x) = x"), Var("x")}) == "f(x) = x");
    CHECK(out("replace_arg", {Fn("f(t) = t + x"), Var("x")}) == "None");
    CHECK(out("substitution_left_to_right", {E("x + 1"), Eq("x = 2")}) == "2 + 1");
    CHECK(out("simplify", {run("substitution_left_to_right", {E("x + 1"), Eq("x = 2")})}) == "3");
    CHECK(out("substitution_left_to_right", {Var("y"), Eq("x = 2")}) == "y");
    CHECK(out("substitution_left_to_right", {E("x*x"), Eq("x = t + 1")}) == "(t + 1)*(t + 1)");
}

TEST_CASE("absorption and totality") {
    std::vector<TypedValue> pool = {V(4),          E("x + 1"),          Var("x"),
                                    Eq("x = 2"),   Fn("f(x) = x"),      TypedValue::boolean(true),
                                    parse_value("1/2"), TypedValue::set_of_values({1, 2}), parse_value("[x = 1]"),
                                    parse_value("{x: 1}"), TypedValue::absent()};
    for (const auto& op : builtin_operators()) {
        for (const auto& a : pool) {
            std::vector<TypedValue> args(op->arity(), a);
            const auto r = apply_op(*op, args);
            if (a.is_absent()) CHECK(r.is_absent());
            if (!r.is_absent()) CHECK(is_subtype(r.kind(), op->return_type));
            for (const auto& b : pool) {
                if (op->arity() != 2) continue;
                const auto r2 = apply_op(*op, {a, b});
                if (a.is_absent() || b.is_absent()) CHECK(r2.is_absent());
                if (!r2.is_absent()) CHECK(is_subtype(r2.kind(), op->return_type));
                CHECK(apply_op(*op, {a, b}) == r2);  // purity
            }
        }
        CHECK(apply_op(*op, {}).is_absent());
    }
}

TEST_CASE("docstring examples satisfy declared parameter types") {
    const auto& ef = *builtin_operator("evaluate_function");
    CHECK(is_subtype(parse_value("2").kind(), ef.params[1].type));
    CHECK(is_subtype(parse_value("f(2)").kind(), ef.params[1].type));
    CHECK(is_subtype(parse_value("2*x + y = 3").kind(), builtin_operator("append")->params[1].type));
    CHECK(is_subtype(parse_value("2*x + 1").kind(), builtin_operator("factor")->params[0].type));
    CHECK(is_subtype(parse_value("x").kind(), builtin_operator("factor")->params[0].type));
    CHECK(is_subtype(parse_value("1/2").kind(), builtin_operator("lcd")->params[0].type));
    CHECK(is_subtype(parse_value("10").kind(), builtin_operator("is_prime")->params[0].type));
}

TEST_CASE("number theory cross-checks on 1..2000") {
    const auto& gcd = *builtin_operator("gcd");
    const auto& lcm = *builtin_operator("lcm");
    for (std::int64_t n = 1; n <= 2000; ++n) {
        const auto pf = run("prime_factors", {V(n)});
        CHECK(run("is_prime", {V(n)}).as_boolean() == (pf.as_set() == std::vector<Rational>{Rational(n)}));
    }
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> d(1, 10000);
    for (int i = 0; i < 5000; ++i) {
        const std::int64_t a = d(rng), b = d(rng);
        const Rational g = apply_op(gcd, {V(a), V(b)}).as_rational();
        const Rational l = apply_op(lcm, {V(a), V(b)}).as_rational();
        CHECK(g * l == Rational(a) * Rational(b));
        CHECK(run("divides", {V(a), V(b)}).as_boolean() == run("mod", {V(b), V(a)}).as_rational().is_zero());
    }
}

TEST_CASE("differentiate agrees with an exact difference quotient") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> coef(-20, 20), deg(1, 6), num(-9, 9), den(1, 7);
    for (int trial = 0; trial < 200; ++trial) {
        Poly p;
        for (int k = 0; k <= deg(rng); ++k) p = p + Poly(Rational(coef(rng))) * Poly::variable("t").pow(k);
        const auto d = run("differentiate", {TypedValue::expression(to_expr(p))});
        if (p.is_constant()) {
            CHECK(render(d) == "0");
            continue;
        }
        const Poly dp = *to_poly(d.as_expression_payload());
        for (int i = 0; i < 5; ++i) {
            const Rational x(num(rng), den(rng));
            // (p(x + h) - p(x)) / h at h = 0 is the h-linear coefficient
            const Poly shifted = p.substitute("t", Poly(x) + Poly::variable("h"));
            const auto c = coefficients(shifted, "h");
            const Rational slope = c.size() > 1 ? c[1] : Rational(0);
            CHECK(dp.substitute("t", Poly(x)).constant_term() == slope);
        }
    }
}

TEST_CASE("factor expands back") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> root(-6, 6), lead(-4, 4), count(1, 4), coef(-9, 9);
    for (int trial = 0; trial < 300; ++trial) {
        Poly p(Rational(lead(rng) == 0 ? 1 : lead(rng)));
        const int k = count(rng);
        for (int i = 0; i < k; ++i) p = p * (Poly(Rational(1 + (i % 2))) * Poly::variable("x") - Poly(Rational(root(rng))));
        if (trial % 3 == 0) p = p * (Poly::variable("x").pow(2) + Poly(Rational(1 + (coef(rng) & 7))));
        if (trial % 5 == 0) p = p + Poly(Rational(coef(rng)));
        const auto f = run("factor", {TypedValue::expression(to_expr(p))});
        REQUIRE_FALSE(f.is_absent());
        INFO(render(f));
        CHECK(*to_poly(f.as_expression_payload()) == p);
    }
}
