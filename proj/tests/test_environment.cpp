#include "doctest.h"
#include "mathsynth/environment.hpp"

using namespace mathsynth;

namespace {

Problem problem(std::string question, std::string answer, std::string module) {
    Problem p{std::move(question), std::move(answer), {}, std::move(module)};
    p.inputs = extract_inputs(p.question, p.module);
    return p;
}

Problem derivative_problem() {
    return problem("What is the first derivative of 6*k**2 - 101*k + 2548?", "12*k - 101", "calculus__differentiate");
}

}  // namespace

TEST_CASE("action space") {
    Environment env(default_registry());
    CHECK(env.action_space_size() == 18);
}

TEST_CASE("derivative trajectory") {
    Environment env(default_registry());
    const auto obs = env.reset(derivative_problem());
    CHECK(obs.history.empty());
    CHECK(obs.text == "What is the first derivative of 6*k**2 - 101*k + 2548?");
    auto r1 = env.step(5);
    CHECK(r1.reward == 0);
    CHECK_FALSE(r1.done);
    CHECK(r1.info.graph == "differentiate(_)");
    CHECK(r1.info.output == "None");
    auto r2 = env.step(15);
    CHECK(r2.reward == 1);
    CHECK(r2.done);
    CHECK(r2.observation.history == std::vector<int>{5, 15});
    CHECK(r2.info.output == "12*k - 101");
    CHECK(r2.info.question == obs.text);
    CHECK_THROWS_AS(env.step(15), UsageError);
}

TEST_CASE("noisy reward case") {
    Environment env(default_registry());
    env.reset(problem("Is 5340 a multiple of 10?", "True", "numbers__is_factor"));
    env.step(14);
    env.step(9);
    const auto r = env.step(16);
    CHECK(r.info.graph == "not_op(is_prime(Value('10')))");
    CHECK(r.reward == 1);
}

TEST_CASE("node limit ends the episode") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    StepResult r;
    for (int i = 0; i < 7; ++i) {
        REQUIRE_FALSE(env.done());
        r = env.step(5);
    }
    CHECK(r.done);
    CHECK(r.reward == 0);
    CHECK(env.history().size() == 7);
}

TEST_CASE("input at the root ends the episode with reward 0") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    const auto r = env.step(15);
    CHECK(r.done);
    CHECK(r.reward == 0);
    CHECK(r.info.output == "None");
}

TEST_CASE("masks") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    auto m = env.compute_mask();
    REQUIRE(m.size() == 18);
    for (int a = 0; a < 15; ++a) CHECK(m[a]);
    for (int a = 15; a < 18; ++a) CHECK_FALSE(m[a]);
    env.step(5);
    m = env.compute_mask();
    CHECK(m[15]);
    CHECK_FALSE(m[16]);
    CHECK_FALSE(m[17]);
    CHECK(m[4]);    // factor returns Expression
    CHECK_FALSE(m[9]);  // is_prime returns Boolean

    // Variable slot: Expression inputs masked, Variable inputs allowed.
    Environment env2(default_registry());
    env2.reset(problem("Solve 2*x + 3 = 7 for x.", "2", "algebra__linear_1d"));
    env2.step(0);
    env2.step(1);
    m = env2.compute_mask();
    CHECK_FALSE(m[15]);
    CHECK(m[16]);
    for (std::size_t a = 0; a < 15; ++a)
        CHECK(m[a] == is_subtype(default_registry().at(a).return_type, TypeTag::Variable));
}

TEST_CASE("masked action permitted and gives None") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    env.step(9);  // is_prime at the root
    const auto r = env.step(15);  // Expression into a Value slot
    CHECK(r.done);
    CHECK(r.reward == 0);
    CHECK(r.info.output == "None");
    CHECK_THROWS_AS(Environment(default_registry()).step(0), UsageError);
    Environment env2(default_registry());
    env2.reset(derivative_problem());
    CHECK_THROWS_AS(env2.step(18), UsageError);
    CHECK_THROWS_AS(env2.step(-1), UsageError);
}

TEST_CASE("missing input positions place Absent") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    env.step(5);
    const auto r = env.step(17);
    CHECK(r.done);
    CHECK(r.reward == 0);
}

TEST_CASE("rejections") {
    Environment env(default_registry());
    CHECK_THROWS_AS(env.reset(problem("Let h(t) = t**3 + t**2 + 1. Let v(d) = 6*d**3 + 24*d**2 + 4. Let w(j) = 4*h(j) - "
                                      "v(j). What is the third derivative of w(x) wrt x?",
                                      "24", "calculus__differentiate")),
                    RejectedProblem);
    const auto multi = problem("What is the second derivative of 2*x**2*y + y wrt x?", "4*y", "calculus__differentiate");
    CHECK_THROWS_AS(env.reset(multi), RejectedProblem);
    EnvConfig open;
    open.univariate_differentiate_only = false;
    Environment env2(full_registry(), open);
    CHECK_NOTHROW(env2.reset(multi));
}

TEST_CASE("encoded observations") {
    const std::vector<std::string> corpus = {derivative_problem().question, "Is 5340 a multiple of 10?"};
    auto codec = std::make_shared<const BpeCodec>(BpeCodec::train(corpus, BpeCodec::base_size(corpus) + 20, 64));
    EnvConfig cfg;
    cfg.encoded_observations = true;
    cfg.max_question_tokens = 64;
    Environment env(default_registry(), cfg, codec);
    const auto obs = env.reset(derivative_problem());
    CHECK(obs.tokens.size() == 64);
    CHECK(obs.tokens.back() == codec->pad_index());
    CHECK(obs.text.empty());
    env.step(5);
    const auto r = env.step(15);
    CHECK(r.observation.tokens == obs.tokens);
    CHECK(r.observation.history == std::vector<int>{5, 15});
    CHECK(r.info.question == derivative_problem().question);
    cfg.max_question_tokens = 4;
    CHECK_THROWS_AS(Environment(default_registry(), cfg, codec), std::invalid_argument);
}

TEST_CASE("reset twice is independent") {
    Environment env(default_registry());
    env.reset(derivative_problem());
    env.step(5);
    const auto obs = env.reset(derivative_problem());
    CHECK(obs.history.empty());
    CHECK(env.graph().empty());
    CHECK_FALSE(env.done());
}
