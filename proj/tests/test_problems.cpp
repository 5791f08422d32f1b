#include <set>
#include <sstream>

#include "doctest.h"
#include "mathsynth/problems.hpp"

using namespace mathsynth;

namespace {

std::string signature(const std::vector<TypedValue>& v) {
    std::string out;
    for (const auto& x : v) out += std::string(type_name(x.kind())) + ":" + render(x) + "|";
    return out;
}

int replay(const GeneratedProblem& g) {
    Environment env(default_registry());
    env.reset(g.problem);
    int reward = 0;
    for (int a : g.truth_actions) {
        if (env.done()) return 0;
        REQUIRE(env.compute_mask()[static_cast<std::size_t>(a)]);
        reward = env.step(a).reward;
    }
    return env.done() ? reward : 0;
}

}  // namespace

TEST_CASE("every module: parser closure, truth replay, determinism") {
    for (const auto& module : supported_modules()) {
        CAPTURE(module);
        const auto a = generate(module, 200, 11);
        const auto b = generate(module, 200, 11);
        std::set<int> templates;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& g = a[i];
            CAPTURE(g.problem.question);
            CAPTURE(g.problem.answer);
            CHECK(g.problem.question == b[i].problem.question);
            CHECK(g.problem.module == module);
            CHECK(g.problem.inputs.size() <= 3);
            CHECK(g.truth_actions.size() <= 7);
            CHECK(signature(extract_inputs(g.problem.question, module)) == signature(g.problem.inputs));
            CHECK(replay(g) == 1);
            templates.insert(g.template_id);
        }
        CHECK(static_cast<int>(templates.size()) == template_count(module));
    }
}

TEST_CASE("spot examples") {
    const auto g = generate_one("numbers__gcd", 3, 0, 0);
    CHECK(g.problem.question.find("greatest common divisor of") != std::string::npos);
    CHECK(g.truth_actions == std::vector<int>{7, 15, 16});
    const auto d = generate_one("calculus__differentiate", 3, 0, 3);
    CHECK(d.problem.inputs.size() == 1);
    CHECK(d.truth_actions.back() == 15);
    CHECK(generate_one("numbers__is_prime", 3, 0, 0).truth_actions == std::vector<int>{9, 15});
}

TEST_CASE("unsupported module") {
    CHECK_THROWS_AS(generate("probability__swr_p_sequence", 1, 0), UnsupportedModule);
    CHECK_THROWS_AS(template_count("nope"), UnsupportedModule);
}

TEST_CASE("partial derivative problems") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto g = generate_partial_derivative(5, i, 3);
        CHECK(signature(extract_inputs(g.problem.question, "calculus__differentiate")) == signature(g.problem.inputs));
        CHECK(rejection_reason(g.problem, EnvConfig{}).has_value());
    }
}

TEST_CASE("loader") {
    std::istringstream two("Is 7 prime?\nTrue\n");
    auto r = load_dataset(two, "numbers__is_prime");
    CHECK(r.problems.size() == 1);
    CHECK(r.skipped == 0);

    std::istringstream bad("How tall is the tower?\n30\nIs 8 prime?\nFalse\n");
    r = load_dataset(bad, "numbers__is_prime");
    CHECK(r.problems.size() == 1);
    CHECK(r.skipped == 1);
    CHECK(r.warnings.size() == 1);

    std::istringstream odd("Is 7 prime?\nTrue\nIs 8 prime?\n");
    CHECK_THROWS_AS(load_dataset(odd, "numbers__is_prime"), FormatError);

    std::vector<Problem> ps;
    for (const auto& g : generate("numbers__lcm", 30, 2)) ps.push_back(g.problem);
    std::stringstream io;
    write_dataset(io, ps);
    r = load_dataset(io, "numbers__lcm");
    REQUIRE(r.problems.size() == ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(signature(r.problems[i].inputs) == signature(ps[i].inputs));
    CHECK_THROWS_AS(load_dataset_file("/nonexistent/file.txt", "numbers__lcm"), FormatError);
}

TEST_CASE("split") {
    const std::array<double, 3> ratio{800.0 / 1010, 200.0 / 1010, 10.0 / 1010};
    CHECK(split_sizes(101, ratio) == std::array<std::size_t, 3>{80, 20, 1});
    CHECK(split_sizes(10, {0.5, 0.25, 0.25}) == std::array<std::size_t, 3>{5, 3, 2});
    std::vector<int> items(101);
    for (int i = 0; i < 101; ++i) items[static_cast<std::size_t>(i)] = i;
    const auto s1 = split(items, ratio, 9), s2 = split(items, ratio, 9);
    CHECK(s1.train == s2.train);
    CHECK(s1.test == s2.test);
    CHECK(s1.train.size() == 80);
    std::multiset<int> all(s1.train.begin(), s1.train.end());
    all.insert(s1.validation.begin(), s1.validation.end());
    all.insert(s1.test.begin(), s1.test.end());
    CHECK(all == std::multiset<int>(items.begin(), items.end()));
    CHECK_THROWS_AS(split(std::vector<int>{}, ratio, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_sizes(5, {0.5, 0.5, 0.5}), std::invalid_argument);
}
