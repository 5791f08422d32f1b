#include <random>

#include "doctest.h"
#include "mathsynth/graph.hpp"

using namespace mathsynth;

namespace {

OperatorPtr op(std::string_view name) { return full_registry().ptr(full_registry().index_of(name)); }

}  // namespace

TEST_CASE("breadth-first construction of the derivative trajectory") {
    ComputeGraph g;
    CHECK(g.empty());
    CHECK_FALSE(g.complete());
    g.add_operator(op("differentiate"));
    CHECK(g.frontier().size() == 1);
    CHECK(g.evaluate().is_absent());
    g.add_input(TypedValue::expression(parse_expr("6*k**2 - 101*k + 2548")), 0);
    CHECK(g.complete());
    CHECK(render(g.evaluate()) == "12*k - 101");
    CHECK(render(g.evaluate()) == render(g.evaluate()));
}

TEST_CASE("not(is_prime(10))") {
    ComputeGraph g;
    g.add_operator(op("not_op"));
    g.add_operator(op("is_prime"));
    g.add_input(TypedValue::value(10));
    REQUIRE(g.complete());
    CHECK(render(g.evaluate()) == "True");
    CHECK(g.serialize() == "not_op(is_prime(Value('10')))");
}

TEST_CASE("slots fill oldest first") {
    ComputeGraph g;
    g.add_operator(op("gcd"));
    g.add_operator(op("mod"));
    CHECK(g.serialize() == "gcd(mod(_,_),_)");
    g.add_input(TypedValue::value(12));
    CHECK(g.serialize() == "gcd(mod(_,_),Value('12'))");
    g.add_input(TypedValue::value(17));
    g.add_input(TypedValue::value(10));
    CHECK(g.serialize() == "gcd(mod(Value('17'),Value('10')),Value('12'))");
    CHECK(render(g.evaluate()) == "1");
}

TEST_CASE("structural errors") {
    ComputeGraph g(2);
    CHECK_THROWS_AS(g.add_input(TypedValue::value(1)), StructuralError);
    g.add_operator(op("gcd"));
    g.add_input(TypedValue::value(4));
    CHECK_THROWS_AS(g.add_input(TypedValue::value(6)), StructuralError);
    ComputeGraph h;
    h.add_operator(op("is_prime"));
    h.add_input(TypedValue::value(7));
    CHECK_THROWS_AS(h.add_input(TypedValue::value(7)), StructuralError);
}

TEST_CASE("statically ill-typed children give Absent") {
    ComputeGraph g;
    g.add_operator(op("is_prime"));
    g.add_operator(op("differentiate"));
    g.add_input(TypedValue::value(3));
    CHECK(g.complete());
    CHECK(g.evaluate().is_absent());
    ComputeGraph h;
    h.add_operator(op("gcd"));
    h.add_input(TypedValue::variable("x"));
    h.add_input(TypedValue::value(3));
    CHECK(h.evaluate().is_absent());
}

TEST_CASE("serialization of the double derivative listing") {
    ComputeGraph g;
    g.add_operator(op("differentiate_wrt"));
    g.add_operator(op("differentiate_wrt"));
    g.add_input(TypedValue::variable("z"));
    g.add_input(TypedValue::expression(parse_expr("-3*z**5 + 13*z**3 + 41*z**2")));
    g.add_input(TypedValue::variable("z"));
    const std::string text =
        "differentiate_wrt(differentiate_wrt(Expression('-3*z**5 + 13*z**3 + 41*z**2'),Variable('z')),Variable('z'))";
    CHECK(g.serialize() == text);
    const auto back = deserialize_graph(text, full_registry());
    CHECK(back.serialize() == text);
    CHECK(render(back.evaluate()) == "-60*z**3 + 78*z + 82");
}

TEST_CASE("deserialize rejects malformed text") {
    CHECK_THROWS_AS(deserialize_graph("Value('3')", full_registry()), ParseError);
    CHECK_THROWS_AS(deserialize_graph("gcd(Value('3')", full_registry()), ParseError);
    CHECK_THROWS_AS(deserialize_graph("nosuch(Value('3'))", full_registry()), std::exception);
    CHECK_THROWS_AS(deserialize_graph("gcd(Value('3'),Value('4'),Value('5'))", full_registry()), ParseError);
    CHECK_THROWS_AS(deserialize_graph("gcd(_,Value('4'))", full_registry()), ParseError);
}

TEST_CASE("round trip on random graphs") {
    const Registry& reg = full_registry();
    const std::vector<TypedValue> pool = {
        TypedValue::value(12),
        TypedValue::value(-7),
        TypedValue::rational(Rational(3, 4)),
        TypedValue::variable("x"),
        TypedValue::expression(parse_expr("x**2 - 3*x + 2")),
        parse_value("2*x + 3 = 7", TypeTag::Equation),
        parse_value("f(t) = t**2 + 1", TypeTag::Function),
    };
    std::mt19937_64 rng(7);
    int checked = 0;
    while (checked < 1000) {
        ComputeGraph g;
        std::uniform_int_distribution<std::size_t> pick_op(0, reg.size() - 1), pick_in(0, pool.size() - 1);
        g.add_operator(reg.ptr(pick_op(rng)));
        while (!g.complete() && g.size() < g.max_nodes()) {
            if (std::bernoulli_distribution(0.3)(rng) && g.size() + g.frontier().size() < g.max_nodes())
                g.add_operator(reg.ptr(pick_op(rng)));
            else
                g.add_input(pool[pick_in(rng)]);
        }
        const std::string text = g.serialize();
        const auto back = deserialize_graph(text, reg);
        REQUIRE(back.serialize() == text);
        CHECK(back.size() == g.size());
        CHECK(back.complete() == g.complete());
        CHECK(render(back.evaluate()) == render(g.evaluate()));
        ++checked;
    }
}

TEST_CASE("unconstrained sequence count") {
    std::uint64_t n = 1;
    for (int i = 0; i < 7; ++i) n *= 18;
    CHECK(n == 612220032ULL);
}
