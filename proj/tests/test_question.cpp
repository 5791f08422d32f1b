#include "doctest.h"
#include "mathsynth/bpe.hpp"
#include "mathsynth/question.hpp"

using namespace mathsynth;

namespace {

std::vector<std::string> kinds(const std::vector<TypedValue>& v) {
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(std::string(type_name(x.kind())) + ":" + render(x));
    return out;
}

}  // namespace

TEST_CASE("sentences") {
    CHECK(split_sentences("Let x = 2.5. What is x?") == std::vector<std::string>{"Let x = 2.5", "What is x"});
    CHECK(split_sentences("Is 7 prime?") == std::vector<std::string>{"Is 7 prime"});
}

TEST_CASE("third derivative question yields five inputs") {
    const auto in = extract_inputs(
        "Let h(t) = t**3 + t**2 + 1. Let v(d) = 6*d**3 + 24*d**2 + 4. Let w(j) = 4*h(j) - v(j). "
        "What is the third derivative of w(x) wrt x?",
        "calculus__differentiate");
    CHECK(kinds(in) == std::vector<std::string>{"Function:h(t) = t**3 + t**2 + 1", "Function:v(d) = 6*d**3 + 24*d**2 + 4",
                                                "Function:w(j) = 4*h(j) - v(j)", "Expression:w(x)", "Variable:x"});
}

TEST_CASE("first derivative question") {
    const auto in = extract_inputs("What is the first derivative of 6*k**2 - 101*k + 2548?", "calculus__differentiate");
    CHECK(kinds(in) == std::vector<std::string>{"Expression:6*k**2 - 101*k + 2548"});
}

TEST_CASE("is_factor question") {
    CHECK(kinds(extract_inputs("Is 5340 a multiple of 10?", "numbers__is_factor")) ==
          std::vector<std::string>{"Value:5340", "Value:10"});
    CHECK(kinds(extract_inputs("Is 5340 a multiple of 10?")) == std::vector<std::string>{"Value:5340", "Value:10"});
}

TEST_CASE("other phrasings") {
    CHECK(kinds(extract_inputs("Calculate the greatest common divisor of 12 and 18.", "numbers__gcd")) ==
          std::vector<std::string>{"Value:12", "Value:18"});
    CHECK(kinds(extract_inputs("What is the common denominator of -7/12 and 5/18?", "numbers__lcm")) ==
          std::vector<std::string>{"Rational:-7/12", "Rational:5/18"});
    CHECK(kinds(extract_inputs("Suppose 3*a + 2*b = 7, a - b = -1. What is a?", "algebra__linear_2d")) ==
          std::vector<std::string>{"Equation:3*a + 2*b = 7", "Equation:a - b = -1", "Variable:a"});
    CHECK(kinds(extract_inputs("Solve 2*x + 3 = 0.5 for x.", "algebra__linear_1d")) ==
          std::vector<std::string>{"Equation:2*x + 3 = 1/2", "Variable:x"});
    CHECK(kinds(extract_inputs("Let f(y) = y**2 - 3. Give f(-2).", "polynomials__evaluate")) ==
          std::vector<std::string>{"Function:f(y) = y**2 - 3", "Expression:f(-2)"});
}

TEST_CASE("unrecognised phrasing names the span") {
    try {
        extract_inputs("How many legs does a spider have?", "numbers__gcd");
        FAIL("expected an extraction error");
    } catch (const ExtractionError& e) {
        CHECK(e.span == "How many legs does a spider have");
    }
}

TEST_CASE("bpe: most frequent pair merges first") {
    const std::vector<std::string> corpus = {"aaab", "aaac"};
    const auto codec = BpeCodec::train(corpus, BpeCodec::base_size(corpus) + 1);
    REQUIRE(codec.merges().size() == 1);
    CHECK(codec.merges()[0] == std::pair<std::string, std::string>{"a", "a"});
}

TEST_CASE("bpe: single character corpus has no merges") {
    const auto codec = BpeCodec::train({"x"}, BpeCodec::base_size({"x"}) + 10);
    CHECK(codec.merges().empty());
}

TEST_CASE("bpe: vocab too small") {
    CHECK_THROWS_AS(BpeCodec::train({"abc"}, BpeCodec::base_size({"abc"})), std::invalid_argument);
    CHECK_THROWS_AS(BpeCodec::train({}, 500), std::invalid_argument);
}

TEST_CASE("bpe: round trip, padding, determinism, serialization") {
    const std::vector<std::string> corpus = {
        "What is the first derivative of 6*k**2 - 101*k + 2548?",
        "Is 5340 a multiple of 10?",
        "Calculate the greatest common divisor of 12 and 18.",
        "Let f(y) = y**2 - 3. Give f(-2).",
        "What is the remainder when 100 is divided by 7?",
    };
    const auto base = BpeCodec::base_size(corpus);
    const auto a = BpeCodec::train(corpus, base + 60, 64);
    const auto b = BpeCodec::train(corpus, base + 60, 64);
    CHECK(a.merges() == b.merges());
    CHECK(a.merges().size() == 60);
    for (const auto& q : corpus) {
        const auto ids = a.encode(q);
        CHECK(ids.size() == 64);
        CHECK(ids.back() == a.pad_index());
        CHECK(a.decode(ids) == q);
        CHECK(a.tokenize(q).size() < q.size());
    }
    const auto c = BpeCodec::deserialize(a.serialize());
    CHECK(c.merges() == a.merges());
    for (const auto& q : corpus) CHECK(c.encode(q) == a.encode(q));
    CHECK(a.decode(a.encode("  two  spaces ")) == "  two  spaces ");
    CHECK_THROWS_AS(a.encode(std::string(200, 'z')), EncodingError);
}
