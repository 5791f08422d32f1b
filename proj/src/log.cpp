#include "mathsynth/log.hpp"

#include <istream>

#include "json.hpp"
#include "mathsynth/problems.hpp"

namespace mathsynth {

using nlohmann::json;

std::string episode_to_json(const EpisodeRecord& e) {
    return json{{"question", e.question}, {"module", e.module}, {"actions", e.actions},
                {"graph", e.graph},       {"output", e.output}, {"reward", e.reward}}
        .dump();
}

EpisodeRecord episode_from_json(const std::string& line) {
    try {
        const auto j = json::parse(line);
        EpisodeRecord e;
        e.question = j.at("question").get<std::string>();
        e.module = j.value("module", "");
        e.actions = j.at("actions").get<std::vector<int>>();
        e.graph = j.at("graph").get<std::string>();
        e.output = j.value("output", "");
        e.reward = j.at("reward").get<int>();
        return e;
    } catch (const json::exception& ex) {
        throw FormatError(std::string("bad episode record: ") + ex.what());
    }
}

std::string metrics_to_json(const Metrics& m) {
    return json{{"step", m.step}, {"epsilon", m.epsilon}, {"loss", m.loss}, {"eval", m.eval}}.dump();
}

Metrics metrics_from_json(const std::string& line) {
    try {
        const auto j = json::parse(line);
        Metrics m;
        m.step = j.at("step").get<std::uint64_t>();
        m.epsilon = j.at("epsilon").get<double>();
        m.loss = j.at("loss").get<double>();
        m.eval = j.at("eval").get<std::map<std::string, double>>();
        return m;
    } catch (const json::exception& ex) {
        throw FormatError(std::string("bad metrics record: ") + ex.what());
    }
}

std::vector<EpisodeRecord> read_episode_log(std::istream& in) {
    std::vector<EpisodeRecord> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(episode_from_json(line));
        } catch (const FormatError& e) {
            throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ComputeGraph> rewarded_graphs(const std::vector<EpisodeRecord>& log, const Registry& registry) {
    std::vector<ComputeGraph> out;
    for (const auto& e : log) {
        if (e.reward != 1) continue;
        auto g = deserialize_graph(e.graph, registry, 64);
        if (g.complete()) out.push_back(std::move(g));
    }
    return out;
}

}  // namespace mathsynth
