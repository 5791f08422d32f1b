#include "mathsynth/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mathsynth/question.hpp"

namespace mathsynth {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T integer(const std::string& v, T lo, T hi) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("expected an integer");
    if (out < lo || out > hi)
        throw std::invalid_argument("must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return out;
}

double real(const std::string& v, double lo, double hi) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number");
    }
    if (used != v.size()) throw std::invalid_argument("expected a number");
    if (!(out >= lo && out <= hi)) {
        std::ostringstream msg;
        msg << "must be in [" << lo << ", " << hi << "]";
        throw std::invalid_argument(msg.str());
    }
    return out;
}

bool boolean(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true or false");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

std::string num(double d) {
    std::ostringstream s;
    s.precision(17);
    s << d;
    return s.str();
}

const std::vector<std::tuple<std::string, Setter, Getter>>& keys() {
    constexpr auto big = std::uint64_t{1} << 40;
    static const std::vector<std::tuple<std::string, Setter, Getter>> table = {
        {"modules",
         [](RunConfig& c, const std::string& v) {
             c.modules = split_list(v);
             if (c.modules.empty()) throw std::invalid_argument("needs at least one module");
             for (const auto& m : c.modules)
                 if (!is_supported_module(m)) throw std::invalid_argument("unsupported module '" + m + "'");
         },
         [](const RunConfig& c) {
             std::string s;
             for (const auto& m : c.modules) s += (s.empty() ? "" : ",") + m;
             return s;
         }},
        {"seed", [](RunConfig& c, const std::string& v) { c.train.seed = integer<std::uint64_t>(v, 0, big); },
         [](const RunConfig& c) { return std::to_string(c.train.seed); }},
        {"seeds", [](RunConfig& c, const std::string& v) { c.seeds = integer<std::size_t>(v, 1, 100); },
         [](const RunConfig& c) { return std::to_string(c.seeds); }},
        {"data_seed", [](RunConfig& c, const std::string& v) { c.data_seed = integer<std::uint64_t>(v, 0, big); },
         [](const RunConfig& c) { return std::to_string(c.data_seed); }},
        {"eval_seed", [](RunConfig& c, const std::string& v) { c.eval_seed = integer<std::uint64_t>(v, 0, big); },
         [](const RunConfig& c) { return std::to_string(c.eval_seed); }},
        {"train_count", [](RunConfig& c, const std::string& v) { c.train_count = integer<std::size_t>(v, 1, 10'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train_count); }},
        {"eval_count", [](RunConfig& c, const std::string& v) { c.eval_count = integer<std::size_t>(v, 1, 1'000'000); },
         [](const RunConfig& c) { return std::to_string(c.eval_count); }},
        {"bpe_merges", [](RunConfig& c, const std::string& v) { c.bpe_merges = integer<std::size_t>(v, 1, 100'000); },
         [](const RunConfig& c) { return std::to_string(c.bpe_merges); }},
        {"n_inputs", [](RunConfig& c, const std::string& v) { c.train.env.n_inputs = integer<std::size_t>(v, 1, 16); },
         [](const RunConfig& c) { return std::to_string(c.train.env.n_inputs); }},
        {"max_nodes", [](RunConfig& c, const std::string& v) { c.train.env.max_nodes = integer<std::size_t>(v, 1, 32); },
         [](const RunConfig& c) { return std::to_string(c.train.env.max_nodes); }},
        {"max_question_tokens",
         [](RunConfig& c, const std::string& v) { c.train.env.max_question_tokens = integer<std::size_t>(v, 8, 4096); },
         [](const RunConfig& c) { return std::to_string(c.train.env.max_question_tokens); }},
        {"univariate_differentiate_only",
         [](RunConfig& c, const std::string& v) { c.train.env.univariate_differentiate_only = boolean(v); },
         [](const RunConfig& c) { return std::string(c.train.env.univariate_differentiate_only ? "true" : "false"); }},
        {"total_steps", [](RunConfig& c, const std::string& v) { c.train.total_steps = integer<std::uint64_t>(v, 1, big); },
         [](const RunConfig& c) { return std::to_string(c.train.total_steps); }},
        {"init_size", [](RunConfig& c, const std::string& v) { c.train.init_size = integer<std::size_t>(v, 0, 100'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.init_size); }},
        {"buffer_capacity",
         [](RunConfig& c, const std::string& v) { c.train.buffer_capacity = integer<std::size_t>(v, 32, 100'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.buffer_capacity); }},
        {"batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = integer<std::size_t>(v, 1, 1'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.batch_size); }},
        {"update_every", [](RunConfig& c, const std::string& v) { c.train.update_every = integer<std::size_t>(v, 1, 1'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.update_every); }},
        {"target_sync", [](RunConfig& c, const std::string& v) { c.train.target_sync = integer<std::size_t>(v, 1, 100'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.target_sync); }},
        {"priority_refresh",
         [](RunConfig& c, const std::string& v) { c.train.priority_refresh = integer<std::size_t>(v, 0, 1'000'000); },
         [](const RunConfig& c) { return std::to_string(c.train.priority_refresh); }},
        {"gamma", [](RunConfig& c, const std::string& v) { c.train.gamma = real(v, 0, 1); },
         [](const RunConfig& c) { return num(c.train.gamma); }},
        {"learning_rate", [](RunConfig& c, const std::string& v) { c.train.learning_rate = real(v, 1e-12, 10); },
         [](const RunConfig& c) { return num(c.train.learning_rate); }},
        {"priority_eps", [](RunConfig& c, const std::string& v) { c.train.priority_eps = real(v, 1e-12, 1); },
         [](const RunConfig& c) { return num(c.train.priority_eps); }},
        {"epsilon_start", [](RunConfig& c, const std::string& v) { c.train.epsilon.start = real(v, 0, 1); },
         [](const RunConfig& c) { return num(c.train.epsilon.start); }},
        {"epsilon_end", [](RunConfig& c, const std::string& v) { c.train.epsilon.end = real(v, 0, 1); },
         [](const RunConfig& c) { return num(c.train.epsilon.end); }},
        {"epsilon_decrement", [](RunConfig& c, const std::string& v) { c.train.epsilon.decrement = real(v, 0, 1); },
         [](const RunConfig& c) { return num(c.train.epsilon.decrement); }},
        {"hash_bits", [](RunConfig& c, const std::string& v) { c.train.hash_bits = integer<int>(v, 4, 24); },
         [](const RunConfig& c) { return std::to_string(c.train.hash_bits); }},
        {"eval_interval",
         [](RunConfig& c, const std::string& v) { c.train.eval_interval = integer<std::uint64_t>(v, 1, big); },
         [](const RunConfig& c) { return std::to_string(c.train.eval_interval); }},
    };
    return table;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, sep);)
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
    RunConfig c;
    std::set<std::string> seen;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno) + ": ";
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto it = std::find_if(keys().begin(), keys().end(), [&](const auto& k) { return std::get<0>(k) == key; });
        if (it == keys().end()) throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        try {
            std::get<1>(*it)(c, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    if (c.train.epsilon.end > c.train.epsilon.start) throw ConfigError(source + ": epsilon_end exceeds epsilon_start");
    if (c.train.buffer_capacity < c.train.env.max_nodes)
        throw ConfigError(source + ": buffer_capacity must hold at least one episode");
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return parse_run_config(in, path);
}

std::string dump_run_config(const RunConfig& c) {
    std::string out;
    for (const auto& [key, set, get] : keys()) out += key + "=" + get(c) + "\n";
    return out;
}

}  // namespace mathsynth
