#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsynth/value.hpp"

namespace mathsynth {

struct Problem {
    std::string question;
    std::string answer;
    std::vector<TypedValue> inputs;  // order of first appearance in the question
    std::string module;
};

struct ExtractionError : std::runtime_error {
    ExtractionError(const std::string& what, std::string span)
        : std::runtime_error(what + ": \"" + span + "\""), span(std::move(span)) {}
    std::string span;
};

// The eleven uncomposed modules with generators and phrasing templates.
const std::vector<std::string>& supported_modules();
bool is_supported_module(std::string_view module);

// Rule-based input extraction. Leading "Let ..." sentences contribute a
// Function or Equation, "Suppose A, B" sentences one Equation each, and the
// final sentence is matched against the module's phrasing templates (falling
// back to every other module's templates). Captured fragments are typed by
// parse_value.
std::vector<TypedValue> extract_inputs(std::string_view question, std::string_view module = {});

// Sentences of a question, split on ". ", "? " and the end of text; a
// decimal point is never a boundary. Terminal punctuation is dropped.
std::vector<std::string> split_sentences(std::string_view question);

}  // namespace mathsynth
