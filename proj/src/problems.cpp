#include "mathsynth/problems.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "mathsynth/operators.hpp"
#include "mathsynth/poly.hpp"

namespace mathsynth {

namespace {

using Rng = std::mt19937_64;

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::int64_t nonzero(Rng& rng, std::int64_t lo, std::int64_t hi) {
    for (;;)
        if (auto v = uniform(rng, lo, hi); v != 0) return v;
}

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(items.size()) - 1))];
}

int digits(std::int64_t n) { return static_cast<int>(std::to_string(n < 0 ? -n : n).size()); }

bool prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::string var_name(Rng& rng) {
    static const std::vector<std::string> names = {"a", "b", "c", "d", "g", "h", "j", "k", "l", "m", "n",
                                                   "o", "p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z"};
    return pick(rng, names);
}

std::string ask(Rng& rng) { return pick(rng, std::vector<std::string>{"What is", "Calculate", "Find", "Give", "Determine"}); }

std::string text(const Poly& p) { return to_string(to_expr(p)); }

Poly dense(const std::vector<std::int64_t>& coeffs, const std::string& var) {
    std::vector<Rational> c(coeffs.begin(), coeffs.end());
    return from_coefficients(c, var);
}

// Random polynomial of exact degree `degree`, some lower coefficients zero.
std::vector<std::int64_t> random_coeffs(Rng& rng, int degree, std::int64_t bound) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(degree) + 1, 0);
    for (int k = 0; k < degree; ++k)
        if (chance(rng, 0.7)) c[static_cast<std::size_t>(k)] = uniform(rng, -bound, bound);
    c.back() = nonzero(rng, -bound, bound);
    return c;
}

struct Builder {
    int in0 = static_cast<int>(default_registry().size());
    GeneratedProblem g;

    int input(TypedValue v) {
        g.problem.inputs.push_back(std::move(v));
        return in0 + static_cast<int>(g.problem.inputs.size()) - 1;
    }
};

GeneratedProblem is_factor(Rng& rng, int t) {
    Builder b;
    const std::int64_t d = uniform(rng, 2, 99);
    std::int64_t n;
    if (chance(rng, 0.5)) {
        n = d * uniform(rng, 1, 10000 / d);
    } else {
        do n = uniform(rng, d + 1, 10000);
        while (n % d == 0);
    }
    const std::string N = std::to_string(n), D = std::to_string(d);
    auto& p = b.g.problem;
    if (t == 0 || t == 3) {
        p.question = t == 0 ? "Is " + N + " a multiple of " + D + "?" : "Is " + N + " divisible by " + D + "?";
        const int ni = b.input(TypedValue::value(n)), di = b.input(TypedValue::value(d));
        b.g.truth_actions = {8, di, ni};
    } else {
        p.question = t == 1 ? "Does " + D + " divide " + N + "?" : "Is " + D + " a factor of " + N + "?";
        const int di = b.input(TypedValue::value(d)), ni = b.input(TypedValue::value(n));
        b.g.truth_actions = {8, di, ni};
    }
    p.answer = n % d == 0 ? "True" : "False";
    b.g.difficulty = digits(n);
    return b.g;
}

GeneratedProblem is_prime_problem(Rng& rng, int t) {
    Builder b;
    const bool want_prime = chance(rng, 0.5);
    std::int64_t n;
    do n = uniform(rng, 2, 10000);
    while (prime(n) != want_prime);
    const std::string N = std::to_string(n);
    auto& p = b.g.problem;
    const int ni = b.input(TypedValue::value(n));
    if (t == 2) {
        p.question = "Is " + N + " composite?";
        p.answer = want_prime ? "False" : "True";
        b.g.truth_actions = {14, 9, ni};
    } else {
        p.question = t == 0 ? "Is " + N + " prime?" : "Is " + N + " a prime number?";
        p.answer = want_prime ? "True" : "False";
        b.g.truth_actions = {9, ni};
    }
    b.g.difficulty = digits(n);
    return b.g;
}

GeneratedProblem list_prime_factors(Rng& rng, int t) {
    Builder b;
    const std::int64_t n = uniform(rng, 2, 10000);
    auto& p = b.g.problem;
    p.question = (t == 0 ? "List the prime factors of " : "What are the prime factors of ") + std::to_string(n) + ".";
    if (t == 1) p.question.back() = '?';
    std::string answer;
    std::int64_t rest = n;
    for (std::int64_t d = 2; d <= rest; ++d) {
        if (rest % d) continue;
        answer += (answer.empty() ? "" : ", ") + std::to_string(d);
        while (rest % d == 0) rest /= d;
    }
    p.answer = answer;
    b.g.truth_actions = {12, b.input(TypedValue::value(n))};
    b.g.difficulty = digits(n);
    return b.g;
}

const char* ordinal(int k) { return k == 1 ? "first" : k == 2 ? "second" : "third"; }

GeneratedProblem differentiate(Rng& rng, int t) {
    Builder b;
    const std::string v = var_name(rng);
    const int degree = static_cast<int>(uniform(rng, 2, 5));
    auto c = random_coeffs(rng, degree, 60);
    const int order = t == 2 ? 1 : static_cast<int>(uniform(rng, 1, 2));
    const Poly poly = dense(c, v);
    for (int k = 0; k < order; ++k) {
        std::vector<std::int64_t> next;
        for (std::size_t e = 1; e < c.size(); ++e) next.push_back(c[e] * static_cast<std::int64_t>(e));
        c = next.empty() ? std::vector<std::int64_t>{0} : next;
    }
    auto& p = b.g.problem;
    const std::string P = text(poly);
    switch (t) {
        case 0: p.question = ask(rng) + " the " + ordinal(order) + " derivative of " + P + " wrt " + v + "?"; break;
        case 1: p.question = "Find the " + std::string(ordinal(order)) + " derivative of " + P + " with respect to " + v + "."; break;
        case 2: p.question = "Differentiate " + P + " with respect to " + v + "."; break;
        default: p.question = ask(rng) + " the " + ordinal(order) + " derivative of " + P + "?"; break;
    }
    const int pi = b.input(TypedValue::expression(to_expr(poly)));
    if (t != 3) b.input(TypedValue::variable(v));
    b.g.truth_actions.assign(static_cast<std::size_t>(order), 5);
    b.g.truth_actions.push_back(pi);
    p.answer = text(dense(c, v));
    b.g.difficulty = degree;
    return b.g;
}

GeneratedProblem evaluate(Rng& rng, int t) {
    Builder b;
    static const std::vector<std::string> fnames = {"f", "g", "h", "j", "k", "l", "m", "n", "p", "q", "r", "s", "u", "v", "w"};
    const std::string f = pick(rng, fnames);
    std::string v;
    do v = var_name(rng);
    while (v == f);
    const int degree = static_cast<int>(uniform(rng, 1, 3));
    const auto c = random_coeffs(rng, degree, 9);
    const std::int64_t at = uniform(rng, -9, 9);
    std::int64_t value = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) value = value * at + *it;
    const Poly body = dense(c, v);
    auto& p = b.g.problem;
    const std::string call = f + "(" + std::to_string(at) + ")";
    const std::string let = "Let " + f + "(" + v + ") = " + text(body) + ". ";
    p.question = let + (t == 0 ? "What is " + call + "?" : t == 1 ? "Calculate " + call + "." : "Give " + call + ".");
    const int fi = b.input(TypedValue::function(Function{f, v, to_expr(body)}));
    const int ci = b.input(TypedValue::expression(Expr::call(f, {Expr::number(at)})));
    b.g.truth_actions = {13, fi, ci};
    p.answer = std::to_string(value);
    b.g.difficulty = degree;
    return b.g;
}

GeneratedProblem div_remainder(Rng& rng, int t) {
    Builder b;
    const std::int64_t n = uniform(rng, 10, 10000);
    const std::int64_t d = uniform(rng, 2, std::min<std::int64_t>(n - 1, 999));
    const std::string N = std::to_string(n), D = std::to_string(d);
    auto& p = b.g.problem;
    if (t == 0) {
        p.question = ask(rng) + " the remainder when " + N + " is divided by " + D + ".";
        const int ni = b.input(TypedValue::value(n)), di = b.input(TypedValue::value(d));
        b.g.truth_actions = {6, ni, di};
    } else {
        p.question = ask(rng) + " the remainder when " + D + " divides " + N + ".";
        const int di = b.input(TypedValue::value(d)), ni = b.input(TypedValue::value(n));
        b.g.truth_actions = {6, ni, di};
    }
    p.answer = std::to_string(n % d);
    b.g.difficulty = digits(n);
    return b.g;
}

GeneratedProblem gcd_problem(Rng& rng, int t) {
    Builder b;
    const std::int64_t g = uniform(rng, 1, 100);
    const std::int64_t x = g * uniform(rng, 1, 10000 / g), y = g * uniform(rng, 1, 10000 / g);
    static const char* names[] = {"greatest common divisor", "highest common factor", "greatest common factor"};
    auto& p = b.g.problem;
    p.question = ask(rng) + " the " + names[t] + " of " + std::to_string(x) + " and " + std::to_string(y) + ".";
    const int xi = b.input(TypedValue::value(x)), yi = b.input(TypedValue::value(y));
    b.g.truth_actions = {7, xi, yi};
    p.answer = std::to_string(std::gcd(x, y));
    b.g.difficulty = digits(std::max(x, y));
    return b.g;
}

GeneratedProblem lcm_problem(Rng& rng, int t) {
    Builder b;
    auto& p = b.g.problem;
    if (t < 2) {
        const std::int64_t x = uniform(rng, 2, 1000), y = uniform(rng, 2, 1000);
        p.question = ask(rng) + " the " + (t == 0 ? "least" : "smallest") + " common multiple of " + std::to_string(x) +
                     " and " + std::to_string(y) + ".";
        const int xi = b.input(TypedValue::value(x)), yi = b.input(TypedValue::value(y));
        b.g.truth_actions = {10, xi, yi};
        p.answer = std::to_string(std::lcm(x, y));
        b.g.difficulty = digits(std::max(x, y));
        return b.g;
    }
    auto fraction = [&] {
        const std::int64_t q = uniform(rng, 2, 60);
        std::int64_t n;
        do n = nonzero(rng, -99, 99);
        while (std::gcd(n, q) != 1);
        return Rational(n, q);
    };
    const Rational x = fraction(), y = fraction();
    p.question = ask(rng) + " the common denominator of " + x.str() + " and " + y.str() + ".";
    const int xi = b.input(TypedValue::rational(x)), yi = b.input(TypedValue::rational(y));
    b.g.truth_actions = {11, xi, yi};
    p.answer = std::to_string(std::lcm(x.den(), y.den()));
    b.g.difficulty = digits(std::max(x.den(), y.den()));
    return b.g;
}

// Truth graph lookup_value(solve_system(append_to_empty_list(eq)), var).
void solve_for(Builder& b, int t, const Equation& eq, const std::string& v) {
    auto& p = b.g.problem;
    const std::string E = render(TypedValue::equation(eq));
    if (t == 0) {
        p.question = "Solve " + E + " for " + v + ".";
        const int ei = b.input(TypedValue::equation(eq)), vi = b.input(TypedValue::variable(v));
        b.g.truth_actions = {0, 1, vi, 3, ei};
    } else {
        p.question = "Find " + v + " such that " + E + ".";
        const int vi = b.input(TypedValue::variable(v)), ei = b.input(TypedValue::equation(eq));
        b.g.truth_actions = {0, 1, vi, 3, ei};
    }
}

GeneratedProblem linear_1d(Rng& rng, int t) {
    Builder b;
    const std::string v = var_name(rng);
    const std::int64_t x0 = uniform(rng, -20, 20), a = nonzero(rng, -12, 12), bb = uniform(rng, -50, 50);
    const Poly x = Poly::variable(v);
    Equation eq;
    switch (uniform(rng, 0, 2)) {
        case 0:
            eq = {to_expr(Poly(Rational(a)) * x + Poly(Rational(bb))), to_expr(Poly(Rational(a * x0 + bb)))};
            break;
        case 1: {
            std::int64_t c;
            do c = uniform(rng, -12, 12);
            while (c == a);
            const std::int64_t d = a * x0 + bb - c * x0;
            eq = {to_expr(Poly(Rational(a)) * x + Poly(Rational(bb))), to_expr(Poly(Rational(c)) * x + Poly(Rational(d)))};
            break;
        }
        default:
            eq = {to_expr(Poly(Rational(a * x0 + bb))), to_expr(Poly(Rational(a)) * x + Poly(Rational(bb)))};
    }
    solve_for(b, t, eq, v);
    b.g.problem.answer = std::to_string(x0);
    b.g.difficulty = digits(std::max({std::abs(a), std::abs(bb), std::abs(x0)}));
    return b.g;
}

GeneratedProblem polynomial_roots(Rng& rng, int t) {
    Builder b;
    const std::string v = var_name(rng);
    const int n_roots = static_cast<int>(uniform(rng, 2, 3));
    std::map<Rational, int> roots;
    for (int i = 0; i < n_roots; ++i) {
        if (chance(rng, 0.2)) {
            const std::int64_t q = uniform(rng, 2, 3);
            std::int64_t n;
            do n = nonzero(rng, -9, 9);
            while (std::gcd(n, q) != 1);
            ++roots[Rational(n, q)];
        } else {
            ++roots[Rational(uniform(rng, -9, 9))];
        }
    }
    const std::int64_t k = nonzero(rng, -5, 5);
    Factorization f{Rational(k), {}};
    Poly poly{Rational(k)};
    for (const auto& [r, m] : roots) {
        f.factors.push_back({{-Rational(r.num()), Rational(r.den())}, m});
        poly = poly * (Poly(Rational(r.den())) * Poly::variable(v) - Poly(Rational(r.num()))).pow(m);
    }
    std::sort(f.factors.begin(), f.factors.end(), [](const auto& a, const auto& c) {
        const bool ax = a.first[0].is_zero(), cx = c.first[0].is_zero();
        if (ax != cx) return ax;
        return a.first < c.first;
    });
    auto& p = b.g.problem;
    if (t == 2) {
        p.question = "Factor " + text(poly) + ".";
        b.g.truth_actions = {4, b.input(TypedValue::expression(to_expr(poly)))};
        p.answer = to_string(factorization_to_expr(f, v));
    } else {
        solve_for(b, t, Equation{to_expr(poly), Expr::number(0)}, v);
        std::vector<Rational> distinct;
        for (const auto& [r, m] : roots) distinct.push_back(r);
        p.answer = distinct.size() == 1 ? render(TypedValue::value(distinct[0])) : render(TypedValue::set_of_values(distinct));
    }
    b.g.difficulty = poly.total_degree();
    return b.g;
}

GeneratedProblem linear_2d(Rng& rng, int t) {
    Builder b;
    const std::string u = var_name(rng);
    std::string w;
    do w = var_name(rng);
    while (w == u);
    const std::int64_t x0 = uniform(rng, -10, 10), y0 = uniform(rng, -10, 10);
    std::int64_t a, c, d, e;
    do {
        a = uniform(rng, -9, 9), c = uniform(rng, -9, 9), d = uniform(rng, -9, 9), e = uniform(rng, -9, 9);
    } while (a * e - c * d == 0);
    const Poly U = Poly::variable(u), W = Poly::variable(w);
    auto equation = [&](std::int64_t p, std::int64_t q) {
        const std::int64_t rhs = p * x0 + q * y0;
        if (p != 0 && q != 0 && chance(rng, 0.3))
            return Equation{to_expr(Poly(Rational(p)) * U), to_expr(Poly(Rational(-q)) * W + Poly(Rational(rhs)))};
        return Equation{to_expr(Poly(Rational(p)) * U + Poly(Rational(q)) * W), to_expr(Poly(Rational(rhs)))};
    };
    const Equation e1 = equation(a, c), e2 = equation(d, e);
    const bool first = chance(rng, 0.5);
    const std::string target = first ? u : w;
    auto& p = b.g.problem;
    const std::string E1 = render(TypedValue::equation(e1)), E2 = render(TypedValue::equation(e2));
    p.question = t == 0 ? "Solve " + E1 + ", " + E2 + " for " + target + "."
                        : "Suppose " + E1 + ", " + E2 + ". " + ask(rng) + " " + target + ".";
    const int i1 = b.input(TypedValue::equation(e1)), i2 = b.input(TypedValue::equation(e2));
    const int vi = b.input(TypedValue::variable(target));
    b.g.truth_actions = {0, 1, vi, 2, 3, i2, i1};
    p.answer = std::to_string(first ? x0 : y0);
    b.g.difficulty = 2;
    return b.g;
}

struct ModuleGenerator {
    int templates;
    std::function<GeneratedProblem(Rng&, int)> make;
};

const std::map<std::string, ModuleGenerator, std::less<>>& generators() {
    static const std::map<std::string, ModuleGenerator, std::less<>> table = {
        {"numbers__is_factor", {4, is_factor}},
        {"numbers__is_prime", {3, is_prime_problem}},
        {"numbers__list_prime_factors", {2, list_prime_factors}},
        {"calculus__differentiate", {4, differentiate}},
        {"polynomials__evaluate", {3, evaluate}},
        {"numbers__div_remainder", {2, div_remainder}},
        {"numbers__gcd", {3, gcd_problem}},
        {"numbers__lcm", {3, lcm_problem}},
        {"algebra__linear_1d", {2, linear_1d}},
        {"algebra__polynomial_roots", {3, polynomial_roots}},
        {"algebra__linear_2d", {2, linear_2d}},
    };
    return table;
}

const ModuleGenerator& generator(std::string_view module) {
    const auto it = generators().find(module);
    if (it == generators().end()) throw UnsupportedModule("no generator for module '" + std::string(module) + "'");
    return it->second;
}

Rng seeded(std::string_view tag, std::uint64_t seed, std::uint64_t index) {
    std::uint32_t h = 2166136261u;
    for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 16777619u;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), h};
    return Rng(seq);
}

}  // namespace

int template_count(std::string_view module) { return generator(module).templates; }

GeneratedProblem generate_one(std::string_view module, std::uint64_t seed, std::uint64_t index, int template_id) {
    const auto& gen = generator(module);
    if (template_id >= gen.templates)
        throw std::invalid_argument("template " + std::to_string(template_id) + " out of range for " + std::string(module));
    Rng rng = seeded(module, seed, index);
    const int t = template_id >= 0 ? template_id : static_cast<int>(uniform(rng, 0, gen.templates - 1));
    GeneratedProblem g = gen.make(rng, t);
    g.problem.module = std::string(module);
    g.template_id = t;
    return g;
}

std::vector<GeneratedProblem> generate(std::string_view module, std::size_t count, std::uint64_t seed) {
    generator(module);
    std::vector<GeneratedProblem> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_one(module, seed, i));
    return out;
}

GeneratedProblem generate_partial_derivative(std::uint64_t seed, std::uint64_t index, int order) {
    if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
    Rng rng = seeded("partial", seed, index);
    std::vector<std::string> vars;
    const int n_vars = static_cast<int>(uniform(rng, 2, 3));
    while (static_cast<int>(vars.size()) < n_vars) {
        auto v = var_name(rng);
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    const std::string v = vars[0];
    Poly poly;
    for (int term = 0; term < 4; ++term) {
        Poly m(Rational(nonzero(rng, -30, 30)));
        for (const auto& name : vars) m = m * Poly::variable(name).pow(static_cast<int>(uniform(rng, 0, 3)));
        poly = poly + m;
    }
    poly = poly + Poly(Rational(nonzero(rng, -9, 9))) * Poly::variable(v).pow(order + 1) *
                      Poly::variable(vars[1]).pow(static_cast<int>(uniform(rng, 1, 2)));
    std::sort(vars.begin(), vars.end());
    Poly d = poly;
    for (int k = 0; k < order; ++k) d = d.derivative(v);
    GeneratedProblem g;
    g.problem.question = "What is the " + std::string(ordinal(order)) + " derivative of " + text(poly) + " wrt " + v + "?";
    g.problem.answer = text(d);
    g.problem.inputs = {TypedValue::expression(to_expr(poly)), TypedValue::variable(v)};
    g.problem.module = "calculus__differentiate";
    g.difficulty = poly.total_degree();
    return g;
}

LoadResult load_dataset(std::istream& in, const std::string& module, const EnvConfig& config) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() % 2) throw FormatError("dataset has an odd number of lines (" + std::to_string(lines.size()) + ")");
    LoadResult out;
    for (std::size_t i = 0; i < lines.size(); i += 2) {
        Problem p{lines[i], lines[i + 1], {}, module};
        try {
            p.inputs = extract_inputs(p.question, module);
        } catch (const std::exception& e) {
            ++out.skipped;
            out.warnings.push_back("line " + std::to_string(i + 1) + ": " + e.what());
            continue;
        }
        if (auto why = rejection_reason(p, config)) {
            ++out.skipped;
            out.warnings.push_back("line " + std::to_string(i + 1) + ": " + *why);
            continue;
        }
        out.problems.push_back(std::move(p));
    }
    return out;
}

LoadResult load_dataset_file(const std::string& path, const std::string& module, const EnvConfig& config) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return load_dataset(in, module, config);
}

void write_dataset(std::ostream& out, const std::vector<Problem>& problems) {
    for (const auto& p : problems) out << p.question << '\n' << p.answer << '\n';
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
    double total = 0;
    for (double f : fractions) {
        if (!(f >= 0)) throw std::invalid_argument("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t used = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(n) * fractions[i];
        sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        rem[i] = exact - static_cast<double>(sizes[i]);
        used += sizes[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; used < n; ++k, ++used) ++sizes[order[k % 3]];
    return sizes;
}

std::vector<Problem> generate_usable(const std::vector<std::string>& modules, std::size_t count, std::uint64_t seed,
                                     const EnvConfig& config) {
    std::vector<Problem> out;
    for (const auto& m : modules)
        for (auto& g : generate(m, count, seed))
            if (!rejection_reason(g.problem, config)) out.push_back(std::move(g.problem));
    return out;
}

}  // namespace mathsynth
