#include "mathsynth/search.hpp"

#include <functional>

namespace mathsynth {

EpisodeRecord random_rollout(Environment& env, const Problem& problem, std::mt19937_64& rng, bool respect_mask) {
    env.reset(problem);
    EpisodeRecord rec{problem.question, problem.module, {}, "", "None", 0};
    while (!env.done()) {
        std::vector<int> choices;
        const auto mask = env.compute_mask();
        for (std::size_t a = 0; a < mask.size(); ++a)
            if (!respect_mask || mask[a]) choices.push_back(static_cast<int>(a));
        if (choices.empty()) break;
        const int a = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
        const auto r = env.step(a);
        rec.reward = r.reward;
        rec.output = r.info.output;
    }
    rec.actions = env.history();
    rec.graph = env.graph().serialize();
    return rec;
}

namespace {

struct Walker {
    const Registry& registry;
    const Problem& problem;
    std::size_t n_inputs;
    std::uint64_t budget;
    std::uint64_t expanded = 0;
    std::vector<int> path;

    // Calls visit(graph) on every masked sequence of exactly `length` actions
    // or ending complete earlier; visit returns true to stop.
    bool walk(const ComputeGraph& g, std::size_t length, const std::function<bool(const ComputeGraph&)>& visit) {
        if (g.complete() || path.size() == length) return visit(g);
        if (++expanded > budget) return true;
        if (!g.empty() && g.frontier().size() > length - path.size()) return false;
        const auto mask = compute_mask(g, registry, problem.inputs, n_inputs);
        for (std::size_t a = 0; a < mask.size(); ++a) {
            if (!mask[a]) continue;
            ComputeGraph next = g;
            apply_action(next, static_cast<int>(a), registry, problem.inputs, n_inputs);
            path.push_back(static_cast<int>(a));
            const bool stop = walk(next, length, visit);
            path.pop_back();
            if (stop) return true;
        }
        return false;
    }
};

}  // namespace

SearchResult exhaustive_solve(const Registry& registry, const Problem& problem, std::size_t max_nodes,
                              const EnvConfig& config, std::uint64_t budget) {
    SearchResult result;
    Walker w{registry, problem, config.n_inputs, budget, 0, {}};
    for (std::size_t length = 1; length <= max_nodes && !result.solution; ++length) {
        w.walk(ComputeGraph(max_nodes), length, [&](const ComputeGraph& g) {
            if (!g.complete() || w.path.size() != length) return false;
            if (!answer_matches(g.evaluate(), problem.answer)) return false;
            result.solution = w.path;
            return true;
        });
        if (w.expanded > budget) {
            result.budget_exceeded = true;
            break;
        }
    }
    result.expanded = w.expanded;
    return result;
}

std::uint64_t count_masked_sequences(const Registry& registry, const Problem& problem, std::size_t max_nodes,
                                      const EnvConfig& config) {
    std::uint64_t count = 0;
    Walker w{registry, problem, config.n_inputs, UINT64_MAX, 0, {}};
    w.walk(ComputeGraph(max_nodes), max_nodes, [&](const ComputeGraph& g) {
        if (g.complete()) ++count;
        return false;
    });
    return count;
}

}  // namespace mathsynth
