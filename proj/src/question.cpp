#include "mathsynth/question.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

namespace mathsynth {

const std::vector<std::string>& supported_modules() {
    static const std::vector<std::string> modules = {
        "numbers__is_factor", "numbers__is_prime",   "numbers__list_prime_factors", "calculus__differentiate",
        "polynomials__evaluate", "numbers__div_remainder", "numbers__gcd",     "numbers__lcm",
        "algebra__linear_1d",  "algebra__polynomial_roots", "algebra__linear_2d",
    };
    return modules;
}

bool is_supported_module(std::string_view module) {
    const auto& m = supported_modules();
    return std::find(m.begin(), m.end(), module) != m.end();
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct ModuleTemplates {
    std::string module;
    std::vector<std::regex> patterns;
};

const std::vector<ModuleTemplates>& templates() {
    static const std::vector<ModuleTemplates> table = [] {
        const std::string var = "([A-Za-z][A-Za-z0-9_]*)";
        const std::string ask = "(?:What is|Calculate|Find|Give|Determine)";
        const std::string nth = "(?:first|second|third|[0-9]+(?:st|nd|rd|th))";
        std::vector<std::pair<std::string, std::vector<std::string>>> raw = {
            {"numbers__is_factor",
             {"^Is (.+) a multiple of (.+)$", "^Does (.+) divide (.+)$", "^Is (.+) a factor of (.+)$",
              "^Is (.+) divisible by (.+)$"}},
            {"numbers__is_prime", {"^Is (.+) a prime number$", "^Is (.+) prime$", "^Is (.+) composite$"}},
            {"numbers__list_prime_factors", {"^(?:List|What are) the prime factors of (.+)$"}},
            {"calculus__differentiate",
             {"^" + ask + " the " + nth + " derivative of (.+) wrt " + var + "$",
              "^" + ask + " the " + nth + " derivative of (.+) with respect to " + var + "$",
              "^" + ask + " the " + nth + " derivative of (.+)$", "^Differentiate (.+) with respect to " + var + "$",
              "^Differentiate (.+) wrt " + var + "$", "^Differentiate (.+)$"}},
            {"polynomials__evaluate", {"^" + ask + " (.+)$"}},
            {"numbers__div_remainder",
             {"^" + ask + " the remainder when (.+) is divided by (.+)$", "^" + ask + " the remainder when (.+) divides (.+)$"}},
            {"numbers__gcd",
             {"^" + ask + " the (?:greatest common divisor|highest common factor|greatest common factor) of (.+) and (.+)$"}},
            {"numbers__lcm",
             {"^" + ask + " the (?:least|smallest|lowest) common multiple of (.+) and (.+)$",
              "^" + ask + " the (?:lowest |least )?common denominator of (.+) and (.+)$"}},
            {"algebra__linear_1d", {"^Solve (.+) for " + var + "$", "^Find " + var + " such that (.+)$"}},
            {"algebra__polynomial_roots",
             {"^Solve (.+) for " + var + "$", "^Find " + var + " such that (.+)$", "^Factor (.+)$"}},
            {"algebra__linear_2d",
             {"^Solve ([^,]+), ([^,]+) for " + var + "$", "^Solve (.+) and (.+) for " + var + "$",
              "^" + ask + " " + var + "$"}},
        };
        std::vector<ModuleTemplates> out;
        for (auto& [m, pats] : raw) {
            ModuleTemplates t{m, {}};
            for (auto& p : pats) t.patterns.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
            out.push_back(std::move(t));
        }
        return out;
    }();
    return table;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Splits "A, B and C" into its top-level parts.
std::vector<std::string> split_conjunction(std::string_view text) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (depth) continue;
        if (c == ',') {
            parts.emplace_back(trim(text.substr(start, i - start)));
            start = i + 1;
        } else if (text.substr(i, 5) == " and ") {
            parts.emplace_back(trim(text.substr(start, i - start)));
            start = i + 5;
            i += 4;
        }
    }
    parts.emplace_back(trim(text.substr(start)));
    return parts;
}

std::optional<std::vector<TypedValue>> match_final(const std::string& sentence, const ModuleTemplates& t) {
    for (const auto& re : t.patterns) {
        std::smatch m;
        if (!std::regex_match(sentence, m, re)) continue;
        std::vector<TypedValue> values;
        try {
            for (std::size_t g = 1; g < m.size(); ++g) values.push_back(parse_value(trim(m.str(g))));
        } catch (const std::exception&) {
            continue;
        }
        return values;
    }
    return std::nullopt;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view question) {
    std::vector<std::string> out;
    std::string_view q = trim(question);
    std::size_t start = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const char c = q[i];
        if (c != '.' && c != '?' && c != '!') continue;
        const bool at_end = i + 1 == q.size();
        if (!at_end && q[i + 1] != ' ') continue;
        const auto s = trim(q.substr(start, i - start));
        if (!s.empty()) out.emplace_back(s);
        start = i + 1;
    }
    const auto tail = trim(q.substr(std::min(start, q.size())));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

std::vector<TypedValue> extract_inputs(std::string_view question, std::string_view module) {
    const auto sentences = split_sentences(question);
    if (sentences.empty()) throw ExtractionError("empty question", std::string(question));
    std::vector<TypedValue> inputs;
    for (std::size_t i = 0; i + 1 < sentences.size(); ++i) {
        const std::string& s = sentences[i];
        try {
            if (starts_with(s, "Let ")) {
                inputs.push_back(parse_value(trim(std::string_view(s).substr(4))));
                continue;
            }
            if (starts_with(s, "Suppose ")) {
                for (const auto& part : split_conjunction(std::string_view(s).substr(8)))
                    inputs.push_back(parse_value(part));
                continue;
            }
        } catch (const std::exception&) {
        }
        throw ExtractionError("unrecognized statement", s);
    }

    const std::string& last = sentences.back();
    const auto& table = templates();
    std::vector<const ModuleTemplates*> order;
    for (const auto& t : table)
        if (t.module == module) order.push_back(&t);
    for (const auto& t : table)
        if (t.module != module) order.push_back(&t);
    for (const auto* t : order) {
        if (auto found = match_final(last, *t)) {
            inputs.insert(inputs.end(), found->begin(), found->end());
            return inputs;
        }
    }
    throw ExtractionError("unrecognized question phrasing", last);
}

}  // namespace mathsynth
