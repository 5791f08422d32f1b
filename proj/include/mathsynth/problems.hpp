#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsynth/environment.hpp"
#include "mathsynth/question.hpp"

namespace mathsynth {

struct GeneratedProblem {
    Problem problem;
    std::vector<int> truth_actions;  // action indices under the default registry
    int template_id = 0;
    int difficulty = 0;  // largest operand digit count or polynomial degree
};

struct UnsupportedModule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Number of phrasing templates of a module.
int template_count(std::string_view module);

// Deterministic in (module, seed, index); template_id < 0 picks one at random.
GeneratedProblem generate_one(std::string_view module, std::uint64_t seed, std::uint64_t index, int template_id = -1);
std::vector<GeneratedProblem> generate(std::string_view module, std::size_t count, std::uint64_t seed);

// `count` per module, dropping problems the environment would reject.
std::vector<Problem> generate_usable(const std::vector<std::string>& modules, std::size_t count, std::uint64_t seed,
                                     const EnvConfig& config = {});

// "What is the <order> derivative of P wrt v?" over a polynomial in two or
// three variables. Not one of the generated modules; the truth graph is left
// empty because the default registry cannot express it.
GeneratedProblem generate_partial_derivative(std::uint64_t seed, std::uint64_t index, int order);

struct LoadResult {
    std::vector<Problem> problems;
    std::size_t skipped = 0;
    std::vector<std::string> warnings;
};

// Alternating question/answer lines. Problems failing extraction or rejected
// under `config` are skipped and counted.
LoadResult load_dataset(std::istream& in, const std::string& module, const EnvConfig& config = {});
LoadResult load_dataset_file(const std::string& path, const std::string& module, const EnvConfig& config = {});
void write_dataset(std::ostream& out, const std::vector<Problem>& problems);

// Part sizes by largest-remainder rounding of n * fraction.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);

template <class T>
struct Split {
    std::vector<T> train, validation, test;
};

// Seeded shuffle followed by a cut at split_sizes.
template <class T>
Split<T> split(std::vector<T> items, const std::array<double, 3>& fractions, std::uint64_t seed) {
    if (items.empty()) throw std::invalid_argument("split: no items");
    const auto sizes = split_sizes(items.size(), fractions);
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(items[i - 1], items[pick(rng)]);
    }
    Split<T> out;
    auto it = std::make_move_iterator(items.begin());
    out.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
    it += static_cast<std::ptrdiff_t>(sizes[0]);
    out.validation.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
    it += static_cast<std::ptrdiff_t>(sizes[1]);
    out.test.assign(it, std::make_move_iterator(items.end()));
    return out;
}

}  // namespace mathsynth
