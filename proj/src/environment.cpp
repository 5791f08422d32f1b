#include "mathsynth/environment.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace mathsynth {

std::vector<bool> compute_mask(const ComputeGraph& g, const Registry& registry, const std::vector<TypedValue>& inputs,
                               std::size_t n_inputs) {
    const std::size_t n_ops = registry.size();
    std::vector<bool> mask(n_ops + n_inputs, false);
    if (g.complete() || g.size() >= g.max_nodes()) return mask;
    const auto slot = g.next_slot_type();
    for (std::size_t a = 0; a < n_ops; ++a) mask[a] = !slot || is_subtype(registry.at(a).return_type, *slot);
    if (!slot) return mask;
    for (std::size_t i = 0; i < n_inputs && i < inputs.size(); ++i)
        mask[n_ops + i] = !inputs[i].is_absent() && is_subtype(inputs[i].kind(), *slot);
    return mask;
}

void apply_action(ComputeGraph& g, int action, const Registry& registry, const std::vector<TypedValue>& inputs,
                  std::size_t n_inputs) {
    if (action < 0 || static_cast<std::size_t>(action) >= registry.size() + n_inputs)
        throw UsageError("action " + std::to_string(action) + " outside the action space of size " +
                         std::to_string(registry.size() + n_inputs));
    const auto a = static_cast<std::size_t>(action);
    if (a < registry.size()) {
        g.add_operator(registry.ptr(a));
        return;
    }
    const std::size_t i = a - registry.size();
    g.add_input(i < inputs.size() ? inputs[i] : TypedValue::absent(), static_cast<int>(i));
}

bool answer_matches(const TypedValue& output, std::string_view answer) {
    while (!answer.empty() && std::isspace(static_cast<unsigned char>(answer.front()))) answer.remove_prefix(1);
    while (!answer.empty() && std::isspace(static_cast<unsigned char>(answer.back()))) answer.remove_suffix(1);
    return render(output) == answer;
}

std::optional<std::string> rejection_reason(const Problem& p, const EnvConfig& config) {
    if (p.inputs.size() > config.n_inputs)
        return "problem has " + std::to_string(p.inputs.size()) + " inputs, limit is " +
               std::to_string(config.n_inputs);
    if (config.univariate_differentiate_only && p.module.rfind("calculus__differentiate", 0) == 0) {
        for (const auto& in : p.inputs) {
            if (in.kind() != TypeTag::Expression) continue;
            std::vector<std::string> symbols;
            collect_symbols(in.as_expression_payload(), symbols);
            if (std::set<std::string>(symbols.begin(), symbols.end()).size() > 1) return "multivariate derivative problem";
        }
    }
    return std::nullopt;
}

Environment::Environment(Registry registry, EnvConfig config, std::shared_ptr<const BpeCodec> codec)
    : registry_(std::move(registry)), config_(config), codec_(std::move(codec)), graph_(config.max_nodes) {
    if (config_.max_nodes == 0) throw std::invalid_argument("max_nodes must be positive");
    if (config_.encoded_observations && !codec_) throw std::invalid_argument("encoded observations need a codec");
    if (codec_ && codec_->max_len() != config_.max_question_tokens)
        throw std::invalid_argument("codec max_len differs from max_question_tokens");
}

Observation Environment::reset(Problem problem) {
    if (auto why = rejection_reason(problem, config_)) throw RejectedProblem(*why);
    std::vector<int> encoded;
    if (config_.encoded_observations) {
        try {
            encoded = codec_->encode(problem.question);
        } catch (const EncodingError& e) {
            throw RejectedProblem(e.what());
        }
    }
    problem_ = std::move(problem);
    encoded_ = std::move(encoded);
    graph_ = ComputeGraph(config_.max_nodes);
    history_.clear();
    started_ = true;
    done_ = false;
    output_ = TypedValue::absent();
    return observe();
}

Observation Environment::observe() const {
    Observation o;
    if (config_.encoded_observations)
        o.tokens = encoded_;
    else
        o.text = problem_.question;
    o.history = history_;
    return o;
}

std::vector<bool> Environment::compute_mask() const {
    if (done_ || !started_) return std::vector<bool>(action_space_size(), false);
    return mathsynth::compute_mask(graph_, registry_, problem_.inputs, config_.n_inputs);
}

StepInfo Environment::info() const {
    return {problem_.question, graph_.serialize(), compute_mask(), render(output_)};
}

StepResult Environment::step(int action) {
    if (!started_) throw UsageError("step before reset");
    if (done_) throw UsageError("step on a finished episode");
    StepResult r;
    try {
        apply_action(graph_, action, registry_, problem_.inputs, config_.n_inputs);
        history_.push_back(action);
    } catch (const StructuralError&) {
        history_.push_back(action);
        done_ = true;
    }
    if (!done_ && graph_.complete()) {
        output_ = graph_.evaluate();
        r.reward = answer_matches(output_, problem_.answer) ? 1 : 0;
        done_ = true;
    } else if (graph_.size() >= config_.max_nodes) {
        done_ = true;
    }
    r.done = done_;
    r.observation = observe();
    r.info = info();
    return r;
}

}  // namespace mathsynth
