#include "mathsynth/rl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mathsynth {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_text(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return h;
}

std::vector<std::string> words_of(const std::string& question) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < question.size()) {
        const auto c = static_cast<unsigned char>(question[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (std::isdigit(c)) {
            while (i < question.size() && std::isdigit(static_cast<unsigned char>(question[i]))) ++i;
            out.emplace_back("<num>");
        } else if (std::isalpha(c)) {
            std::string w;
            while (i < question.size() && std::isalnum(static_cast<unsigned char>(question[i])))
                w += static_cast<char>(std::tolower(static_cast<unsigned char>(question[i++])));
            out.push_back(w.size() == 1 ? "<v>" : w);
        } else {
            out.emplace_back(1, question[i++]);
        }
    }
    return out;
}

}  // namespace

double EpsilonSchedule::value(std::uint64_t t) const {
    return std::max(end, start - static_cast<double>(t) * decrement);
}

QuestionContext::QuestionContext(const std::string& question) {
    const auto w = words_of(question);
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < w.size(); ++i) {
        seen.insert(hash_text(w[i]));
        if (i + 1 < w.size()) seen.insert(hash_text(w[i] + " " + w[i + 1]) ^ 0x5bd1e995ULL);
    }
    words.assign(seen.begin(), seen.end());
}

LinearQ::LinearQ(std::size_t n_actions, int hash_bits, std::uint64_t feature_seed)
    : hash_bits_(hash_bits), feature_seed_(feature_seed) {
    if (n_actions == 0) throw std::invalid_argument("LinearQ: no actions");
    if (hash_bits < 4 || hash_bits > 24) throw std::invalid_argument("LinearQ: hash_bits must be in [4, 24]");
    weights_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_actions), Eigen::Index{1} << hash_bits);
}

SparseFeatures LinearQ::features(const QuestionContext& q, const std::vector<int>& history) const {
    const std::uint64_t mask = (std::uint64_t{1} << hash_bits_) - 1;
    std::uint64_t h = mix(feature_seed_ ^ 0x243f6a8885a308d3ULL);
    for (int a : history) h = mix(h ^ static_cast<std::uint64_t>(a + 1));
    h = mix(h ^ history.size());
    SparseFeatures f;
    f.index.reserve(q.words.size() + 2);
    for (auto w : q.words) f.index.push_back(static_cast<std::uint32_t>(mix(w ^ h) & mask));
    f.index.push_back(static_cast<std::uint32_t>(mix(h ^ 0x13198a2e03707344ULL) & mask));
    f.index.push_back(static_cast<std::uint32_t>(mix(feature_seed_ ^ 0xa4093822299f31d0ULL) & mask));
    f.value = 1.0 / std::sqrt(static_cast<double>(f.index.size()));
    return f;
}

double LinearQ::value(const SparseFeatures& f, std::size_t action) const {
    double s = 0;
    for (auto i : f.index) s += weights_(static_cast<Eigen::Index>(action), i);
    return s * f.value;
}

std::vector<double> LinearQ::values(const SparseFeatures& f) const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(weights_.rows());
    for (auto i : f.index) s += weights_.col(i);
    s *= f.value;
    return {s.data(), s.data() + s.size()};
}

void LinearQ::update(const SparseFeatures& f, std::size_t action, double step) {
    for (auto i : f.index) weights_(static_cast<Eigen::Index>(action), i) += step * f.value;
}

int masked_argmax(const std::vector<double>& q, const std::vector<bool>& mask) {
    int best = -1;
    for (std::size_t a = 0; a < q.size() && a < mask.size(); ++a)
        if (mask[a] && (best < 0 || q[a] > q[static_cast<std::size_t>(best)])) best = static_cast<int>(a);
    return best;
}

double td_target(const Transition& t, double gamma, const LinearQ& online, const LinearQ& target) {
    if (t.done) return t.reward;
    auto next = t.history;
    next.push_back(t.action);
    const auto f = online.features(*t.question, next);
    const int a = masked_argmax(online.values(f), t.next_mask);
    if (a < 0) return t.reward;
    return t.reward + gamma * target.value(f, static_cast<std::size_t>(a));
}

SumTree::SumTree(std::size_t capacity) : capacity_(capacity), leaves_(1) {
    if (capacity == 0) throw std::invalid_argument("SumTree: zero capacity");
    while (leaves_ < capacity) leaves_ <<= 1;
    tree_.assign(2 * leaves_, 0.0);
}

void SumTree::set(std::size_t slot, double priority) {
    std::size_t i = leaves_ + slot;
    tree_[i] = priority;
    for (i >>= 1; i; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

std::size_t SumTree::find(double u) const {
    std::size_t i = 1;
    while (i < leaves_) {
        if (u < tree_[2 * i] || tree_[2 * i + 1] <= 0) {
            i = 2 * i;
        } else {
            u -= tree_[2 * i];
            i = 2 * i + 1;
        }
    }
    return std::min(i - leaves_, capacity_ - 1);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity_steps, double priority_eps)
    : capacity_(capacity_steps), priority_eps_(priority_eps), slots_(capacity_steps), tree_(capacity_steps) {
    if (priority_eps <= 0) throw std::invalid_argument("priority_eps must be positive");
    for (std::size_t i = capacity_steps; i-- > 0;) free_.push_back(i);
}

void ReplayBuffer::drop_oldest(std::deque<std::vector<std::size_t>>& store) {
    for (auto s : store.front()) {
        tree_.set(s, 0);
        slots_[s] = {};
        free_.push_back(s);
    }
    used_ -= store.front().size();
    store.pop_front();
}

void ReplayBuffer::add_trajectory(std::vector<Transition> steps) {
    if (steps.empty()) return;
    if (steps.size() > capacity_) throw std::invalid_argument("trajectory longer than the buffer");
    std::lock_guard lock(mutex_);
    const bool positive = steps.back().reward > 0;
    auto& mine = positive ? positive_ : zero_;
    auto& other = positive ? zero_ : positive_;
    if (mine.size() > other.size()) drop_oldest(mine);
    while (free_.size() < steps.size()) drop_oldest(other.size() > mine.size() ? other : mine);
    std::vector<std::size_t> ids;
    for (auto& t : steps) {
        const std::size_t s = free_.back();
        free_.pop_back();
        slots_[s] = std::move(t);
        tree_.set(s, max_priority_);
        ids.push_back(s);
    }
    used_ += ids.size();
    mine.push_back(std::move(ids));
}

ReplayBuffer::Sample ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
    std::lock_guard lock(mutex_);
    Sample out;
    if (used_ == 0) return out;
    std::uniform_real_distribution<double> u(0, tree_.total());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = tree_.find(u(rng));
        if (tree_.get(s) <= 0) continue;
        out.slots.push_back(s);
        out.transitions.push_back(slots_[s]);
    }
    return out;
}

std::vector<std::size_t> ReplayBuffer::random_slots(std::size_t n, std::mt19937_64& rng) const {
    std::lock_guard lock(mutex_);
    std::vector<std::size_t> out;
    if (used_ == 0) return out;
    std::uniform_int_distribution<std::size_t> pick(0, capacity_ - 1);
    for (std::size_t tries = 0; out.size() < n && tries < 20 * n; ++tries)
        if (const auto s = pick(rng); tree_.get(s) > 0) out.push_back(s);
    return out;
}

Transition ReplayBuffer::at(std::size_t slot) const {
    std::lock_guard lock(mutex_);
    return slots_.at(slot);
}

void ReplayBuffer::update_priorities(const std::vector<std::size_t>& slots, const std::vector<double>& td_errors) {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < slots.size() && i < td_errors.size(); ++i) {
        if (tree_.get(slots[i]) <= 0) continue;  // evicted meanwhile
        const double p = std::abs(td_errors[i]) + priority_eps_;
        tree_.set(slots[i], p);
        max_priority_ = std::max(max_priority_, p);
    }
}

std::size_t ReplayBuffer::size() const {
    std::lock_guard lock(mutex_);
    return used_;
}
std::size_t ReplayBuffer::positive_trajectories() const {
    std::lock_guard lock(mutex_);
    return positive_.size();
}
std::size_t ReplayBuffer::zero_trajectories() const {
    std::lock_guard lock(mutex_);
    return zero_.size();
}
double ReplayBuffer::priority(std::size_t slot) const {
    std::lock_guard lock(mutex_);
    return tree_.get(slot);
}
double ReplayBuffer::total_priority() const {
    std::lock_guard lock(mutex_);
    return tree_.total();
}

std::map<std::string, double> evaluate_policy(const LinearQ& q, const Registry& registry,
                                              const std::vector<Problem>& problems, const EnvConfig& config) {
    Environment env(registry, config);
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& p : problems) {
        try {
            env.reset(p);
        } catch (const RejectedProblem&) {
            continue;
        }
        const QuestionContext ctx(p.question);
        int reward = 0;
        while (!env.done()) {
            const int a = masked_argmax(q.values(q.features(ctx, env.history())), env.compute_mask());
            if (a < 0) break;
            reward = env.step(a).reward;
        }
        auto& [s, n] = sums[p.module];
        s += reward;
        ++n;
    }
    std::map<std::string, double> out;
    double total = 0;
    for (const auto& [m, sn] : sums) {
        out[m] = sn.first / static_cast<double>(sn.second);
        total += out[m];
    }
    if (!sums.empty()) out["mean"] = total / static_cast<double>(sums.size());
    return out;
}

Trainer::Trainer(TrainConfig config, Registry registry, std::vector<Problem> train, std::vector<Problem> eval)
    : config_(config),
      registry_(std::move(registry)),
      train_(std::move(train)),
      eval_(std::move(eval)),
      online_(registry_.size() + config.env.n_inputs, config.hash_bits, config.seed),
      target_(online_),
      buffer_(config.buffer_capacity, config.priority_eps),
      env_(registry_, config.env),
      rng_(config.seed) {
    if (train_.empty()) throw std::invalid_argument("trainer: no training problems");
    if (config_.batch_size == 0 || config_.update_every == 0 || config_.target_sync == 0)
        throw std::invalid_argument("trainer: batch_size, update_every and target_sync must be positive");
    for (const auto& p : train_) contexts_.push_back(std::make_shared<const QuestionContext>(p.question));
}

Trainer::Episode Trainer::play(const Problem& p, double epsilon) {
    Episode ep;
    const auto index = static_cast<std::size_t>(&p - train_.data());
    const auto& ctx = contexts_[index];
    env_.reset(p);
    std::uniform_real_distribution<double> coin(0, 1);
    auto mask = env_.compute_mask();
    while (!env_.done()) {
        std::vector<int> choices;
        if (coin(rng_) < epsilon) {
            for (std::size_t a = 0; a < mask.size(); ++a)
                if (mask[a]) choices.push_back(static_cast<int>(a));
        } else {
            const auto q = online_.values(online_.features(*ctx, env_.history()));
            const int best = masked_argmax(q, mask);
            for (std::size_t a = 0; best >= 0 && a < q.size(); ++a)
                if (mask[a] && q[a] >= q[static_cast<std::size_t>(best)] - 1e-12) choices.push_back(static_cast<int>(a));
        }
        if (choices.empty()) break;
        const int a = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng_)];
        Transition t{ctx, env_.history(), a, 0, false, {}};
        const auto r = env_.step(a);
        ++env_steps_;
        mask = env_.compute_mask();
        t.reward = r.reward;
        t.done = r.done;
        t.next_mask = mask;
        ep.steps.push_back(std::move(t));
        ep.reward = r.reward;
    }
    return ep;
}

double Trainer::learn() {
    auto batch = buffer_.sample(config_.batch_size, rng_);
    if (batch.slots.empty()) return 0;
    double loss = 0;
    std::vector<double> errors;
    errors.reserve(batch.slots.size());
    for (const auto& t : batch.transitions) {
        const auto f = online_.features(*t.question, t.history);
        const double delta = td_target(t, config_.gamma, online_, target_) - online_.value(f, static_cast<std::size_t>(t.action));
        loss += delta * delta;
        online_.update(f, static_cast<std::size_t>(t.action), config_.learning_rate * delta);
        errors.push_back(delta);
    }
    loss /= static_cast<double>(batch.slots.size());
    if (!std::isfinite(loss)) throw DivergenceError("non-finite loss at update " + std::to_string(updates_));
    for (std::size_t i = 0; i < batch.slots.size(); ++i) {
        const auto& t = batch.transitions[i];
        errors[i] = td_target(t, config_.gamma, online_, target_) -
                    online_.value(online_.features(*t.question, t.history), static_cast<std::size_t>(t.action));
    }
    buffer_.update_priorities(batch.slots, errors);
    auto extra = buffer_.random_slots(config_.priority_refresh, rng_);
    std::vector<double> extra_errors;
    for (auto s : extra) {
        const auto t = buffer_.at(s);
        extra_errors.push_back(td_target(t, config_.gamma, online_, target_) -
                               online_.value(online_.features(*t.question, t.history), static_cast<std::size_t>(t.action)));
    }
    buffer_.update_priorities(extra, extra_errors);
    if (++updates_ % config_.target_sync == 0) target_ = online_;
    return loss;
}

Metrics Trainer::snapshot(double loss) {
    Metrics m;
    m.step = env_steps_;
    m.epsilon = config_.epsilon.value(acting_steps_);
    m.loss = loss;
    if (!eval_.empty()) m.eval = evaluate_policy(online_, registry_, eval_, config_.env);
    return m;
}

void Trainer::run(const std::function<void(const Metrics&)>& sink) {
    std::uniform_int_distribution<std::size_t> pick(0, train_.size() - 1);
    auto draw = [&]() -> Episode {
        for (int tries = 0; tries < 100; ++tries) {
            try {
                return play(train_[pick(rng_)], initialized_ ? config_.epsilon.value(acting_steps_) : 1.0);
            } catch (const RejectedProblem&) {
            }
        }
        throw std::invalid_argument("trainer: training problems are rejected by the environment");
    };
    const std::uint64_t init_end = env_steps_ + config_.init_size;
    while (!initialized_ && env_steps_ < init_end && env_steps_ < config_.total_steps) {
        auto ep = draw();
        buffer_.add_trajectory(std::move(ep.steps));
    }
    initialized_ = true;
    double loss_sum = 0;
    std::size_t loss_n = 0;
    std::uint64_t next_eval = (env_steps_ / config_.eval_interval + 1) * config_.eval_interval;
    std::uint64_t pending = 0, last_emit = UINT64_MAX;
    while (env_steps_ < config_.total_steps) {
        const auto before = env_steps_;
        auto ep = draw();
        const auto taken = env_steps_ - before;
        acting_steps_ += taken;
        pending += taken;
        buffer_.add_trajectory(std::move(ep.steps));
        for (; pending >= config_.update_every; pending -= config_.update_every) {
            loss_sum += learn();
            ++loss_n;
        }
        if (env_steps_ >= next_eval) {
            if (sink) sink(snapshot(loss_n ? loss_sum / static_cast<double>(loss_n) : 0));
            last_emit = env_steps_;
            loss_sum = 0;
            loss_n = 0;
            next_eval = (env_steps_ / config_.eval_interval + 1) * config_.eval_interval;
        }
    }
    if (sink && last_emit != env_steps_) sink(snapshot(loss_n ? loss_sum / static_cast<double>(loss_n) : 0));
}

namespace {

nlohmann::json sparse(const Eigen::MatrixXd& w) {
    auto out = nlohmann::json::array();
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            if (w(r, c) != 0) out.push_back({r, c, w(r, c)});
    return out;
}

void fill(Eigen::MatrixXd& w, const nlohmann::json& entries) {
    w.setZero();
    for (const auto& e : entries) {
        const auto r = e.at(0).get<Eigen::Index>(), c = e.at(1).get<Eigen::Index>();
        if (r < 0 || r >= w.rows() || c < 0 || c >= w.cols()) throw std::runtime_error("checkpoint: weight index out of range");
        w(r, c) = e.at(2).get<double>();
    }
}

void check_header(const nlohmann::json& j, const Registry& registry) {
    if (j.value("format", "") != "mathsynth-checkpoint" || j.value("version", 0) != 1)
        throw std::runtime_error("checkpoint: unknown format");
    if (j.at("registry").get<std::string>() != registry.manifest())
        throw std::runtime_error("checkpoint: registry differs from the configured one");
}

}  // namespace

std::string Trainer::checkpoint() const {
    std::ostringstream rng;
    rng << rng_;
    nlohmann::json j = {
        {"format", "mathsynth-checkpoint"},
        {"version", 1},
        {"registry", registry_.manifest()},
        {"n_actions", online_.n_actions()},
        {"hash_bits", online_.hash_bits()},
        {"feature_seed", online_.feature_seed()},
        {"env_steps", env_steps_},
        {"acting_steps", acting_steps_},
        {"updates", updates_},
        {"rng", rng.str()},
        {"online", sparse(online_.weights())},
        {"target", sparse(target_.weights())},
    };
    return j.dump();
}

void Trainer::restore(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    check_header(j, registry_);
    if (j.at("n_actions").get<std::size_t>() != online_.n_actions() || j.at("hash_bits").get<int>() != online_.hash_bits() ||
        j.at("feature_seed").get<std::uint64_t>() != online_.feature_seed())
        throw std::runtime_error("checkpoint: model shape or feature seed differs from the configuration");
    fill(online_.weights(), j.at("online"));
    fill(target_.weights(), j.at("target"));
    env_steps_ = j.at("env_steps").get<std::uint64_t>();
    acting_steps_ = j.at("acting_steps").get<std::uint64_t>();
    updates_ = j.at("updates").get<std::uint64_t>();
    std::istringstream rng(j.at("rng").get<std::string>());
    rng >> rng_;
    initialized_ = false;  // the replay buffer is not saved; it is refilled on resume
}

LinearQ load_policy(const std::string& text, const Registry& registry) {
    const auto j = nlohmann::json::parse(text);
    check_header(j, registry);
    LinearQ q(j.at("n_actions").get<std::size_t>(), j.at("hash_bits").get<int>(), j.at("feature_seed").get<std::uint64_t>());
    fill(q.weights(), j.at("online"));
    return q;
}

}  // namespace mathsynth
