#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mathsynth/rl.hpp"

namespace mathsynth {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// key=value run configuration; '#' starts a comment.
struct RunConfig {
    std::vector<std::string> modules{"numbers__div_remainder"};
    std::size_t seeds = 1;  // independent training runs, seeds seed..seed+seeds-1
    std::uint64_t data_seed = 1;
    std::uint64_t eval_seed = 2;
    std::size_t train_count = 2000;  // generated problems per module
    std::size_t eval_count = 200;
    std::size_t bpe_merges = 200;
    TrainConfig train;
};

// Unknown keys, malformed values and out-of-range values are errors naming the line.
RunConfig parse_run_config(std::istream& in, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);

// Every key with its effective value, parseable by parse_run_config.
std::string dump_run_config(const RunConfig& c);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace mathsynth
