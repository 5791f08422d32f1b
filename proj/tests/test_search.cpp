#include <cmath>

#include "doctest.h"
#include "mathsynth/problems.hpp"
#include "mathsynth/rl.hpp"
#include "mathsynth/search.hpp"

using namespace mathsynth;

namespace {

Problem problem(std::string question, std::string answer, std::string module) {
    Problem p{std::move(question), std::move(answer), {}, std::move(module)};
    p.inputs = extract_inputs(p.question, p.module);
    return p;
}

Transition step(std::shared_ptr<const QuestionContext> q, int action, double reward, bool done) {
    return Transition{std::move(q), {}, action, reward, done, std::vector<bool>(18, true)};
}

}  // namespace

TEST_CASE("exhaustive search finds shortest masked solutions") {
    const auto d = problem("What is the first derivative of 6*k**2 - 101*k + 2548?", "12*k - 101", "calculus__differentiate");
    auto r = exhaustive_solve(default_registry(), d, 4);
    REQUIRE(r.solution);
    CHECK(*r.solution == std::vector<int>{5, 15});

    const auto p = problem("Is 7919 prime?", "True", "numbers__is_prime");
    r = exhaustive_solve(default_registry(), p, 3);
    REQUIRE(r.solution);
    CHECK(*r.solution == std::vector<int>{9, 15});

    const auto wrong = problem("Is 7919 prime?", "Banana", "numbers__is_prime");
    r = exhaustive_solve(default_registry(), wrong, 3);
    CHECK_FALSE(r.solution);
    CHECK_FALSE(r.budget_exceeded);

    r = exhaustive_solve(default_registry(), wrong, 4, EnvConfig{}, 10);
    CHECK_FALSE(r.solution);
    CHECK(r.budget_exceeded);
}

TEST_CASE("masked counts are far below the unconstrained count") {
    for (const auto& module : supported_modules()) {
        const auto g = generate_one(module, 1, 0);
        const auto n = count_masked_sequences(default_registry(), g.problem, 4);
        CAPTURE(module);
        CHECK(n > 0);
        CHECK(n * 100 <= 18u * 18u * 18u * 18u);
    }
}

TEST_CASE("random rollouts") {
    Environment env(default_registry());
    const auto p = problem("Calculate the greatest common divisor of 12 and 18.", "6", "numbers__gcd");
    std::mt19937_64 a(5), b(5);
    const auto ra = random_rollout(env, p, a), rb = random_rollout(env, p, b);
    CHECK(ra.actions == rb.actions);
    CHECK(ra.graph == rb.graph);
    int hits = 0;
    for (int i = 0; i < 3000; ++i) hits += random_rollout(env, p, a).reward;
    CHECK(hits > 0);
    int unmasked_hits = 0;
    for (int i = 0; i < 3000; ++i) {
        const auto r = random_rollout(env, p, a, false);
        CHECK(r.actions.size() <= 7);
        unmasked_hits += r.reward;
    }
    CHECK(unmasked_hits < hits);
}

TEST_CASE("epsilon schedule") {
    EpsilonSchedule e;
    CHECK(e.value(0) == 0.4);
    CHECK(e.value(14000) == 0.05);
    CHECK(e.value(13999) > 0.05);
    CHECK(e.value(1000000) == 0.05);
    for (std::uint64_t t = 0; t < 20000; t += 97) CHECK(e.value(t + 97) <= e.value(t));
}

TEST_CASE("td target") {
    auto q = std::make_shared<const QuestionContext>("Is 7 prime?");
    LinearQ online(18), target(18);
    CHECK(td_target(step(q, 9, 1, true), 0.99, online, target) == 1.0);

    auto t = step(q, 9, 0, false);
    const auto f = online.features(*q, {9});
    online.update(f, 3, 1.0);   // online prefers action 3
    target.update(f, 3, 0.25);
    target.update(f, 7, 2.0);   // target prefers action 7
    const double q3 = target.value(f, 3), q7 = target.value(f, 7);
    CHECK(td_target(t, 0.5, online, target) == doctest::Approx(0.5 * q3));
    CHECK(td_target(t, 0.5, online, target) != doctest::Approx(0.5 * q7));
    CHECK(td_target(t, 0, online, target) == 0.0);

    t.next_mask.assign(18, false);
    t.next_mask[7] = true;
    CHECK(td_target(t, 0.5, online, target) == doctest::Approx(0.5 * q7));
    t.next_mask.assign(18, false);
    CHECK(td_target(t, 0.5, online, target) == 0.0);
}

TEST_CASE("masked argmax") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> q(18);
        std::vector<bool> mask(18);
        for (std::size_t a = 0; a < 18; ++a) {
            q[a] = n(rng);
            mask[a] = std::bernoulli_distribution(0.3)(rng);
        }
        const int a = masked_argmax(q, mask);
        if (std::find(mask.begin(), mask.end(), true) == mask.end()) {
            CHECK(a == -1);
            continue;
        }
        REQUIRE(a >= 0);
        CHECK(mask[static_cast<std::size_t>(a)]);
        for (std::size_t b = 0; b < 18; ++b)
            if (mask[b]) CHECK(q[b] <= q[static_cast<std::size_t>(a)]);
    }
}

TEST_CASE("prioritized sampling is proportional") {
    ReplayBuffer buf(64);
    auto q = std::make_shared<const QuestionContext>("x");
    for (int i = 0; i < 10; ++i) buf.add_trajectory({step(q, i, i % 2, true)});
    std::vector<std::size_t> slots;
    std::vector<double> errs;
    std::mt19937_64 rng(1);
    for (auto s : buf.random_slots(200, rng))
        if (std::find(slots.begin(), slots.end(), s) == slots.end()) slots.push_back(s);
    REQUIRE(slots.size() == 10);
    for (std::size_t i = 0; i < slots.size(); ++i) errs.push_back(0.5 + static_cast<double>(i));
    buf.update_priorities(slots, errs);
    std::map<std::size_t, int> hits;
    const int draws = 100000;
    const auto sample = buf.sample(draws, rng);
    REQUIRE(sample.slots.size() == static_cast<std::size_t>(draws));
    for (auto s : sample.slots) ++hits[s];
    for (auto s : slots) {
        const double expected = buf.priority(s) / buf.total_priority();
        const double seen = hits[s] / static_cast<double>(draws);
        CHECK(std::abs(seen - expected) <= 0.05 * expected);
    }
}

TEST_CASE("trajectory balance under adversarial insert orders") {
    auto q = std::make_shared<const QuestionContext>("x");
    auto traj = [&](bool positive, std::size_t len) {
        std::vector<Transition> t;
        for (std::size_t i = 0; i < len; ++i) t.push_back(step(q, 0, i + 1 == len && positive, i + 1 == len));
        return t;
    };
    std::mt19937_64 rng(9);
    for (int order = 0; order < 6; ++order) {
        ReplayBuffer buf(order < 3 ? 30 : 1000);
        for (int i = 0; i < 400; ++i) {
            bool positive;
            switch (order % 3) {
                case 0: positive = i < 200; break;                                  // all positive, then all zero
                case 1: positive = (i % 7) == 0; break;                             // rare positives
                default: positive = std::bernoulli_distribution(0.9)(rng); break;  // mostly positive
            }
            buf.add_trajectory(traj(positive, 1 + static_cast<std::size_t>(i % 5)));
            const auto p = static_cast<long>(buf.positive_trajectories()), z = static_cast<long>(buf.zero_trajectories());
            REQUIRE(std::abs(p - z) <= 1);
            REQUIRE(buf.size() <= buf.capacity());
        }
    }
}

TEST_CASE("training is deterministic and checkpoints round trip") {
    std::vector<Problem> train, eval;
    for (const auto& g : generate("numbers__div_remainder", 200, 1)) train.push_back(g.problem);
    for (const auto& g : generate("numbers__div_remainder", 50, 2)) eval.push_back(g.problem);
    TrainConfig c;
    c.total_steps = 3000;
    c.init_size = 500;
    c.buffer_capacity = 3000;
    c.batch_size = 32;
    c.learning_rate = 0.5;
    c.target_sync = 50;
    c.eval_interval = 1000;
    c.hash_bits = 12;
    Trainer a(c, default_registry(), train, eval), b(c, default_registry(), train, eval);
    std::vector<Metrics> ma, mb;
    a.run([&](const Metrics& m) { ma.push_back(m); });
    b.run([&](const Metrics& m) { mb.push_back(m); });
    CHECK(a.checkpoint() == b.checkpoint());
    REQUIRE(ma.size() == mb.size());
    CHECK(ma.back().eval == mb.back().eval);
    CHECK(a.env_steps() >= 3000);
    CHECK(a.buffer().size() <= 3000);

    Trainer r(c, default_registry(), train, eval);
    r.restore(a.checkpoint());
    CHECK(r.checkpoint() == a.checkpoint());
    CHECK(r.env_steps() == a.env_steps());
    const auto q = load_policy(a.checkpoint(), default_registry());
    CHECK(evaluate_policy(q, default_registry(), eval) == evaluate_policy(a.online(), default_registry(), eval));
    CHECK_THROWS(load_policy(a.checkpoint(), full_registry()));
}

TEST_CASE("evaluation reports the mean of module means") {
    std::vector<Problem> ps;
    for (const auto& g : generate("numbers__gcd", 10, 1)) ps.push_back(g.problem);
    for (const auto& g : generate("numbers__is_prime", 30, 1)) ps.push_back(g.problem);
    LinearQ q(18);
    const auto r = evaluate_policy(q, default_registry(), ps);
    CHECK(r.at("mean") == doctest::Approx((r.at("numbers__gcd") + r.at("numbers__is_prime")) / 2));
}
