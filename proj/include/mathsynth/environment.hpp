#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mathsynth/bpe.hpp"
#include "mathsynth/graph.hpp"
#include "mathsynth/question.hpp"

namespace mathsynth {

struct EnvConfig {
    std::size_t n_inputs = 3;
    std::size_t max_nodes = 7;
    bool encoded_observations = false;
    std::size_t max_question_tokens = 128;
    bool univariate_differentiate_only = true;
};

struct Observation {
    std::vector<int> tokens;  // padded question encoding (encoded mode only)
    std::string text;         // raw question (raw mode only)
    std::vector<int> history;
};

struct StepInfo {
    std::string question;
    std::string graph;  // serialized partial graph, open slots as "_"
    std::vector<bool> mask;
    std::string output;  // rendered result once done, "None" before
};

struct StepResult {
    Observation observation;
    int reward = 0;
    bool done = false;
    StepInfo info;
};

struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

struct RejectedProblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Validity mask over operators followed by n_inputs input positions:
// only operators at the root; elsewhere the action's static type must fit the
// next open slot; input positions without an input are never valid.
std::vector<bool> compute_mask(const ComputeGraph& g, const Registry& registry, const std::vector<TypedValue>& inputs,
                               std::size_t n_inputs);

// Places the node chosen by `action`. Input positions past the problem's
// inputs place an Absent leaf. Throws UsageError for indices outside the
// action space and StructuralError for illegal placements.
void apply_action(ComputeGraph& g, int action, const Registry& registry, const std::vector<TypedValue>& inputs,
                  std::size_t n_inputs);

bool answer_matches(const TypedValue& output, std::string_view answer);

// Reason the environment would refuse the problem, if any.
std::optional<std::string> rejection_reason(const Problem& p, const EnvConfig& config);

class Environment {
public:
    explicit Environment(Registry registry, EnvConfig config = {}, std::shared_ptr<const BpeCodec> codec = nullptr);

    Observation reset(Problem problem);
    StepResult step(int action);
    std::vector<bool> compute_mask() const;

    std::size_t action_space_size() const { return registry_.size() + config_.n_inputs; }
    const Registry& registry() const { return registry_; }
    const EnvConfig& config() const { return config_; }
    const Problem& problem() const { return problem_; }
    const ComputeGraph& graph() const { return graph_; }
    const std::vector<int>& history() const { return history_; }
    bool done() const { return done_; }
    StepInfo info() const;

private:
    Observation observe() const;

    Registry registry_;
    EnvConfig config_;
    std::shared_ptr<const BpeCodec> codec_;
    Problem problem_;
    std::vector<int> encoded_;
    ComputeGraph graph_;
    std::vector<int> history_;
    bool started_ = false;
    bool done_ = false;
    TypedValue output_;
};

}  // namespace mathsynth
