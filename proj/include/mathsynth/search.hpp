#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mathsynth/environment.hpp"

namespace mathsynth {

struct EpisodeRecord {
    std::string question;
    std::string module;
    std::vector<int> actions;
    std::string graph;
    std::string output;
    int reward = 0;
};

// Uniform over unmasked actions (all actions when respect_mask is off) until done.
EpisodeRecord random_rollout(Environment& env, const Problem& problem, std::mt19937_64& rng, bool respect_mask = true);

struct SearchResult {
    std::optional<std::vector<int>> solution;
    bool budget_exceeded = false;
    std::uint64_t expanded = 0;
};

// Masked enumeration by increasing length, lexicographic within a length, so
// the first hit is a shortest solution. `budget` caps expanded partial graphs.
SearchResult exhaustive_solve(const Registry& registry, const Problem& problem, std::size_t max_nodes,
                              const EnvConfig& config = {}, std::uint64_t budget = 20'000'000);

// Masked action sequences of at most `max_nodes` actions that end in a
// complete graph, i.e. the candidate programs an enumerator has to evaluate.
std::uint64_t count_masked_sequences(const Registry& registry, const Problem& problem, std::size_t max_nodes,
                                      const EnvConfig& config = {});

}  // namespace mathsynth
