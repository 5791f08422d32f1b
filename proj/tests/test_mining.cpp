#include <map>
#include <random>

#include "doctest.h"
#include "mathsynth/mining.hpp"
#include "mathsynth/problems.hpp"
#include "mathsynth/search.hpp"

using namespace mathsynth;

namespace {

const Registry& compact() {
    static const Registry r = make_registry({"differentiate", "differentiate_wrt", "factor", "simplify"});
    return r;
}

EnvConfig multivariate() {
    EnvConfig c;
    c.univariate_differentiate_only = false;
    return c;
}

ComputeGraph build(const std::vector<int>& actions, const Registry& reg, const Problem& p) {
    ComputeGraph g;
    for (int a : actions) apply_action(g, a, reg, p.inputs, 3);
    return g;
}

std::vector<ComputeGraph> double_derivative_corpus(std::size_t n) {
    std::vector<ComputeGraph> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto g = generate_partial_derivative(21, i, 2);
        const auto r = exhaustive_solve(compact(), g.problem, 5, multivariate());
        REQUIRE(r.solution);
        out.push_back(build(*r.solution, compact(), g.problem));
    }
    return out;
}

// Independent count: every subset of operator nodes that is connected through
// parent links, keyed by a separately written printer.
std::map<std::string, std::size_t> brute_force(const std::vector<ComputeGraph>& corpus) {
    std::map<std::string, std::size_t> counts;
    for (const auto& g : corpus) {
        const auto& nodes = g.nodes();
        std::vector<int> parent(nodes.size(), -1);
        std::vector<int> ops;
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            for (int c : nodes[v].children) parent[static_cast<std::size_t>(c)] = static_cast<int>(v);
            if (nodes[v].is_operator()) ops.push_back(static_cast<int>(v));
        }
        for (unsigned mask = 1; mask < (1u << ops.size()); ++mask) {
            std::vector<bool> in(nodes.size(), false);
            for (std::size_t k = 0; k < ops.size(); ++k)
                if (mask >> k & 1) in[static_cast<std::size_t>(ops[k])] = true;
            int tops = 0, top = -1;
            for (std::size_t v = 0; v < nodes.size(); ++v)
                if (in[v] && (parent[v] < 0 || !in[static_cast<std::size_t>(parent[v])])) {
                    ++tops;
                    top = static_cast<int>(v);
                }
            if (tops != 1) continue;
            std::vector<std::string> leaves;
            std::string key;
            auto print = [&](auto&& self, int v) -> void {
                key += nodes[static_cast<std::size_t>(v)].op->name + "(";
                bool first = true;
                for (int c : nodes[static_cast<std::size_t>(v)].children) {
                    if (!first) key += ",";
                    first = false;
                    if (in[static_cast<std::size_t>(c)]) {
                        self(self, c);
                        continue;
                    }
                    const auto text = g.serialize_node(c);
                    auto it = std::find(leaves.begin(), leaves.end(), text);
                    if (it == leaves.end()) it = leaves.insert(leaves.end(), text);
                    key += "p" + std::to_string(it - leaves.begin());
                }
                key += ")";
            };
            print(print, top);
            ++counts[key];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("double derivative corpus yields the shared-variable template") {
    const auto corpus = double_derivative_corpus(12);
    const auto mined = mine(corpus, 10, 2);
    REQUIRE_FALSE(mined.empty());
    const auto& top = mined.front();
    CHECK(top.key == "differentiate_wrt(differentiate_wrt(p0,p1),p1)");
    CHECK(top.support == 12);
    CHECK(top.size == 2);
    CHECK(top.name == "m0_differentiate_wrt");
    REQUIRE(top.spec->arity() == 2);
    CHECK(top.spec->params[0].type == TypeTag::Expression);
    CHECK(top.spec->params[1].type == TypeTag::Variable);
    CHECK(top.spec->return_type == TypeTag::Expression);
    CHECK(top.spec->expansion == top.key);
    CHECK(mine(corpus, 13, 2).empty());
}

TEST_CASE("thresholds and degenerate corpora") {
    CHECK(mine({}, 1, 1).empty());
    std::vector<ComputeGraph> singles;
    for (int i = 0; i < 5; ++i) {
        ComputeGraph g;
        g.add_operator(default_registry().ptr(9));
        g.add_input(TypedValue::value(7 + i));
        singles.push_back(g);
    }
    CHECK(mine(singles, 1, 2).empty());
    const auto one = mine(singles, 5, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].key == "is_prime(p0)");
    CHECK(one[0].support == 5);
}

TEST_CASE("support counts match brute force") {
    const Registry& reg = full_registry();
    const std::vector<TypedValue> pool = {TypedValue::value(12), TypedValue::value(5), TypedValue::variable("x"),
                                          TypedValue::expression(parse_expr("x**2 + 1"))};
    std::mt19937_64 rng(17);
    for (int round = 0; round < 5; ++round) {
        std::vector<ComputeGraph> corpus;
        while (corpus.size() < 50) {
            ComputeGraph g;
            std::uniform_int_distribution<std::size_t> op(0, reg.size() - 1), in(0, pool.size() - 1);
            g.add_operator(reg.ptr(op(rng)));
            while (!g.complete() && g.size() < g.max_nodes()) {
                if (std::bernoulli_distribution(0.45)(rng) && g.size() + g.frontier().size() < g.max_nodes())
                    g.add_operator(reg.ptr(op(rng)));
                else
                    g.add_input(pool[in(rng)]);
            }
            if (g.complete()) corpus.push_back(g);
        }
        const auto counts = template_counts(corpus);
        const auto oracle = brute_force(corpus);
        CHECK(std::map<std::string, std::size_t>(counts.begin(), counts.end()) == oracle);
        for (const auto& m : mine(corpus, 3, 2)) {
            CHECK(oracle.at(m.key) == m.support);
            CHECK(m.support >= 3);
            CHECK(m.size >= 2);
        }
    }
}

TEST_CASE("ranking and determinism") {
    auto corpus = double_derivative_corpus(10);
    ComputeGraph extra;
    extra.add_operator(full_registry().ptr(full_registry().index_of("differentiate_wrt")));
    extra.add_operator(full_registry().ptr(full_registry().index_of("differentiate_wrt")));
    extra.add_input(TypedValue::variable("y"));
    extra.add_input(TypedValue::expression(parse_expr("x*y")));
    extra.add_input(TypedValue::variable("x"));
    corpus.push_back(extra);
    const auto a = mine(corpus, 1, 1), b = mine(corpus, 1, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].key == b[i].key);
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(a[i - 1].support >= a[i].support);
        if (a[i - 1].support == a[i].support) CHECK(a[i - 1].size >= a[i].size);
    }
    bool separate = false;
    for (const auto& m : a) separate |= m.key == "differentiate_wrt(differentiate_wrt(p0,p1),p2)";
    CHECK(separate);
}

TEST_CASE("registration") {
    const auto mined = mine(double_derivative_corpus(10), 10, 2);
    REQUIRE_FALSE(mined.empty());
    const Registry r = register_mined(mined[0], compact());
    CHECK(r.size() == compact().size() + 1);
    CHECK(r.at(4).name == "m0_differentiate_wrt");
    CHECK(r.manifest().find("= differentiate_wrt(differentiate_wrt(p0,p1),p1)") != std::string::npos);
    CHECK_THROWS_AS(register_mined(mined[0], r), RegistryError);
    CHECK_NOTHROW(register_mined(mined[0], r, "diff_wrt_2"));

    std::vector<ComputeGraph> wide;
    for (int i = 0; i < 3; ++i) {
        ComputeGraph g;
        g.add_operator(default_registry().ptr(7));  // gcd
        g.add_operator(default_registry().ptr(7));
        g.add_input(TypedValue::value(3));
        g.add_input(TypedValue::value(4));
        g.add_input(TypedValue::value(5));
        wide.push_back(g);
    }
    const auto three = mine(wide, 3, 2);
    REQUIRE(three.size() == 1);
    CHECK(three[0].spec->arity() == 3);
    CHECK_THROWS_AS(register_mined(three[0], default_registry()), RegistryError);
}

TEST_CASE("mined operator equals its expansion") {
    const auto mined = mine(double_derivative_corpus(10), 10, 2);
    REQUIRE_FALSE(mined.empty());
    const auto& m = mined[0];
    std::mt19937_64 rng(4);
    const std::vector<std::string> vars = {"x", "y", "z"};
    int non_absent = 0;
    for (int i = 0; i < 1000; ++i) {
        std::uniform_int_distribution<int> c(-9, 9), e(0, 4), v(0, 2);
        std::string poly;
        for (int t = 0; t < 3; ++t)
            poly += (t ? " + " : "") + std::to_string(c(rng)) + "*" + vars[static_cast<std::size_t>(v(rng))] + "**" +
                    std::to_string(e(rng)) + "*" + vars[static_cast<std::size_t>(v(rng))];
        std::vector<TypedValue> args = {TypedValue::expression(parse_expr(poly)),
                                        i % 10 == 0 ? TypedValue::value(c(rng)) : TypedValue::variable(vars[static_cast<std::size_t>(v(rng))])};
        const auto direct = apply_op(*m.spec, args);
        std::string text = m.key;
        for (std::size_t p = 0; p < args.size(); ++p) {
            const std::string leaf = std::string(type_name(args[p].kind())) + "('" + render(args[p]) + "')";
            const std::string ph = "p" + std::to_string(p);
            for (auto at = text.find(ph); at != std::string::npos; at = text.find(ph, at + leaf.size()))
                text.replace(at, ph.size(), leaf);
        }
        const auto expanded = deserialize_graph(text, full_registry()).evaluate();
        CHECK(render(direct) == render(expanded));
        non_absent += !direct.is_absent();
    }
    CHECK(non_absent > 800);
}

TEST_CASE("abstraction shortens third derivative solutions") {
    const auto mined = mine(double_derivative_corpus(12), 10, 2);
    REQUIRE_FALSE(mined.empty());
    const Registry extended = register_mined(mined[0], compact());
    for (std::uint64_t i = 0; i < 3; ++i) {
        const auto g = generate_partial_derivative(33, i, 3);
        const auto before = exhaustive_solve(compact(), g.problem, 7, multivariate());
        const auto after = exhaustive_solve(extended, g.problem, 7, multivariate());
        REQUIRE(before.solution);
        REQUIRE(after.solution);
        CHECK(before.solution->size() == 7);
        CHECK(after.solution->size() == 5);
    }
}
