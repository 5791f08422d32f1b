#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "mathsynth/environment.hpp"

namespace mathsynth {

struct EpsilonSchedule {
    double start = 0.4;
    double end = 0.05;
    double decrement = 2.5e-5;
    double value(std::uint64_t t) const;
};

// Word features of a question, computed once per problem and shared by its transitions.
struct QuestionContext {
    std::vector<std::uint64_t> words;  // hashed lowercase unigrams and bigrams, numbers folded to <num>
    explicit QuestionContext(const std::string& question);
};

struct SparseFeatures {
    std::vector<std::uint32_t> index;
    double value = 0;  // shared by every active feature, 1/sqrt(count)
};

// Linear action values over hashed (question word, action history) crosses.
class LinearQ {
public:
    LinearQ(std::size_t n_actions, int hash_bits = 16, std::uint64_t feature_seed = 0);

    SparseFeatures features(const QuestionContext& q, const std::vector<int>& history) const;
    double value(const SparseFeatures& f, std::size_t action) const;
    std::vector<double> values(const SparseFeatures& f) const;
    void update(const SparseFeatures& f, std::size_t action, double step);

    std::size_t n_actions() const { return static_cast<std::size_t>(weights_.rows()); }
    int hash_bits() const { return hash_bits_; }
    std::uint64_t feature_seed() const { return feature_seed_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    Eigen::MatrixXd& weights() { return weights_; }

private:
    int hash_bits_;
    std::uint64_t feature_seed_;
    Eigen::MatrixXd weights_;  // actions x hashed features
};

// Highest-valued unmasked action, lowest index on ties; -1 when nothing is unmasked.
int masked_argmax(const std::vector<double>& q, const std::vector<bool>& mask);

struct Transition {
    std::shared_ptr<const QuestionContext> question;
    std::vector<int> history;  // before the action
    int action = 0;
    double reward = 0;
    bool done = false;
    std::vector<bool> next_mask;
};

// Double-DQN target: the online function picks the next action, the target function values it.
double td_target(const Transition& t, double gamma, const LinearQ& online, const LinearQ& target);

// Proportional sampling over slot priorities.
class SumTree {
public:
    explicit SumTree(std::size_t capacity);
    void set(std::size_t slot, double priority);
    double get(std::size_t slot) const { return tree_[leaves_ + slot]; }
    double total() const { return tree_[1]; }
    // Slot whose cumulative priority interval contains u, for u in [0, total()).
    std::size_t find(double u) const;
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_, leaves_;
    std::vector<double> tree_;
};

// Replay memory of whole trajectories kept in two stores, rewarded and
// unrewarded, whose trajectory counts never differ by more than one. Steps are
// sampled in proportion to priority; new steps get the current maximum.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity_steps, double priority_eps = 1e-3);

    void add_trajectory(std::vector<Transition> steps);

    struct Sample {
        std::vector<std::size_t> slots;
        std::vector<Transition> transitions;
    };
    Sample sample(std::size_t n, std::mt19937_64& rng) const;
    // Uniform over occupied slots.
    std::vector<std::size_t> random_slots(std::size_t n, std::mt19937_64& rng) const;
    Transition at(std::size_t slot) const;
    void update_priorities(const std::vector<std::size_t>& slots, const std::vector<double>& td_errors);

    std::size_t size() const;
    std::size_t positive_trajectories() const;
    std::size_t zero_trajectories() const;
    double priority(std::size_t slot) const;
    double total_priority() const;
    std::size_t capacity() const { return capacity_; }

private:
    void drop_oldest(std::deque<std::vector<std::size_t>>& store);

    std::size_t capacity_;
    double priority_eps_;
    double max_priority_ = 1.0;
    std::vector<Transition> slots_;
    std::vector<std::size_t> free_;
    SumTree tree_;
    std::deque<std::vector<std::size_t>> positive_, zero_;
    std::size_t used_ = 0;
    mutable std::mutex mutex_;
};

struct TrainConfig {
    EnvConfig env;
    std::uint64_t seed = 0;
    std::uint64_t total_steps = 50000;  // environment steps, initial random fill included
    std::size_t init_size = 50000;
    std::size_t buffer_capacity = 50000;
    std::size_t batch_size = 512;
    std::size_t update_every = 4;
    std::size_t target_sync = 500;  // in updates
    std::size_t priority_refresh = 64;
    double gamma = 0.99;
    double learning_rate = 5e-5;
    double priority_eps = 1e-3;
    EpsilonSchedule epsilon;
    int hash_bits = 16;
    std::uint64_t eval_interval = 2000;
};

struct Metrics {
    std::uint64_t step = 0;
    double epsilon = 0;
    double loss = 0;
    std::map<std::string, double> eval;  // per module, plus "mean"
};

// Greedy masked rollouts; mean reward per module and the mean of those means under "mean".
std::map<std::string, double> evaluate_policy(const LinearQ& q, const Registry& registry,
                                              const std::vector<Problem>& problems, const EnvConfig& env = {});

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Trainer {
public:
    Trainer(TrainConfig config, Registry registry, std::vector<Problem> train, std::vector<Problem> eval);

    // Runs until total_steps environment steps; metrics go to `sink` at every eval interval and at the end.
    void run(const std::function<void(const Metrics&)>& sink = {});

    const LinearQ& online() const { return online_; }
    const LinearQ& target() const { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::uint64_t env_steps() const { return env_steps_; }
    std::uint64_t updates() const { return updates_; }

    // JSON with both weight sets (sparse), counters, feature seed and the registry manifest.
    std::string checkpoint() const;
    void restore(const std::string& json);

private:
    struct Episode {
        std::vector<Transition> steps;
        int reward = 0;
    };
    Episode play(const Problem& p, double epsilon);
    double learn();
    Metrics snapshot(double loss);

    TrainConfig config_;
    Registry registry_;
    std::vector<Problem> train_, eval_;
    std::vector<std::shared_ptr<const QuestionContext>> contexts_;
    LinearQ online_, target_;
    ReplayBuffer buffer_;
    Environment env_;
    std::mt19937_64 rng_;
    std::uint64_t env_steps_ = 0, acting_steps_ = 0, updates_ = 0;
    bool initialized_ = false;
};

LinearQ load_policy(const std::string& checkpoint_json, const Registry& registry);

}  // namespace mathsynth
