#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mathsynth/rl.hpp"
#include "mathsynth/search.hpp"

namespace mathsynth {

// One JSON object per line.
std::string episode_to_json(const EpisodeRecord& e);
EpisodeRecord episode_from_json(const std::string& line);
std::string metrics_to_json(const Metrics& m);
Metrics metrics_from_json(const std::string& line);

// Blank lines are skipped; a malformed line throws FormatError naming it.
std::vector<EpisodeRecord> read_episode_log(std::istream& in);

// Complete graphs of the rewarded episodes in a log.
std::vector<ComputeGraph> rewarded_graphs(const std::vector<EpisodeRecord>& log, const Registry& registry);

}  // namespace mathsynth
