#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mathsynth/config.hpp"
#include "mathsynth/log.hpp"
#include "mathsynth/mining.hpp"
#include "mathsynth/problems.hpp"
#include "mathsynth/rl.hpp"
#include "mathsynth/search.hpp"

namespace fs = std::filesystem;
using namespace mathsynth;

namespace {

enum Exit { ok = 0, usage = 2, data = 3, internal = 4 };

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::out | mode);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

Registry pick_registry(const std::string& spec) {
    if (spec == "default") return default_registry();
    if (spec == "full") return full_registry();
    try {
        return make_registry(split_list(spec));
    } catch (const RegistryError& e) {
        throw UsageError(e.what());
    }
}

std::vector<int> parse_actions(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_list(text)) {
        std::size_t used = 0;
        int a = 0;
        try {
            a = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw UsageError("bad action '" + item + "'");
        out.push_back(a);
    }
    return out;
}

std::string join(const std::vector<int>& v, const char* sep = ", ") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

std::vector<std::string> resolve_modules(const std::vector<std::string>& given, const RunConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& g : given)
        for (const auto& m : split_list(g)) out.push_back(m);
    if (out.empty()) out = cfg.modules;
    if (out.size() == 1 && out[0] == "all") out = supported_modules();
    for (const auto& m : out)
        if (!is_supported_module(m)) throw UsageError("unsupported module '" + m + "'");
    return out;
}

// generate

struct GenerateArgs {
    std::vector<std::string> modules;
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    std::string out;
    bool split = false;
};

int run_generate(const GenerateArgs& a, const RunConfig& cfg) {
    const auto modules = resolve_modules(a.modules, cfg);
    const fs::path dir(a.out);
    std::vector<std::string> questions;
    for (const auto& m : modules) {
        const auto gen = generate(m, a.count, a.seed);
        std::vector<Problem> problems;
        auto truth = open_out(dir / (m + ".truth"));
        for (const auto& g : gen) {
            problems.push_back(g.problem);
            questions.push_back(g.problem.question);
            truth << g.template_id << '\t' << g.difficulty << '\t' << join(g.truth_actions, ",") << '\n';
        }
        auto out = open_out(dir / (m + ".txt"));
        write_dataset(out, problems);
        if (a.split) {
            const auto parts = split(problems, {800.0 / 1010, 200.0 / 1010, 10.0 / 1010}, a.seed);
            for (const auto& [suffix, part] :
                 {std::pair{".train.txt", &parts.train}, {".valid.txt", &parts.validation}, {".test.txt", &parts.test}}) {
                auto f = open_out(dir / (m + suffix));
                write_dataset(f, *part);
            }
        }
        std::cout << m << ": " << gen.size() << " problems\n";
    }
    const auto codec = BpeCodec::train(questions, BpeCodec::base_size(questions) + cfg.bpe_merges,
                                       cfg.train.env.max_question_tokens);
    open_out(dir / "codec.bpe") << codec.serialize();
    std::cout << "codec: " << codec.vocab_size() << " tokens\n";
    return ok;
}

// episode

struct EpisodeArgs {
    std::string module;
    std::string question, answer, file;
    std::uint64_t seed = 0, index = 0;
    std::string actions;
    std::string operators = "default";
    std::string log;
    bool multivariate = false;
};

int run_episode(const EpisodeArgs& a, const RunConfig& cfg) {
    Problem p;
    if (!a.question.empty()) {
        if (a.answer.empty()) throw UsageError("--question needs --answer");
        p.question = a.question;
        p.answer = a.answer;
        p.module = a.module;
        try {
            p.inputs = extract_inputs(p.question, p.module);
        } catch (const ExtractionError& e) {
            throw DataError(e.what());
        }
    } else if (!a.file.empty()) {
        if (a.module.empty()) throw UsageError("--file needs --module");
        const auto loaded = load_dataset_file(a.file, a.module, cfg.train.env);
        if (a.index >= loaded.problems.size()) throw UsageError("--index past the end of the dataset");
        p = loaded.problems[a.index];
    } else {
        if (a.module.empty()) throw UsageError("give --question, --file or --module");
        p = generate_one(a.module, a.seed, a.index).problem;
    }
    EnvConfig env = cfg.train.env;
    if (a.multivariate) env.univariate_differentiate_only = false;
    Environment e(pick_registry(a.operators), env);
    e.reset(p);
    const auto actions = parse_actions(a.actions);
    std::vector<int> taken;
    std::cout << "state  t=0 : " << p.question << ";\n";
    int reward = 0;
    for (std::size_t t = 0; t < actions.size() && !e.done(); ++t) {
        std::cout << "action t=" << t << " : " << actions[t] << '\n';
        const auto r = e.step(actions[t]);
        taken.push_back(actions[t]);
        reward = r.reward;
        std::cout << "state  t=" << t + 1 << " : " << p.question << "; " << join(taken) << '\n';
        std::cout << "reward t=" << t + 1 << " : " << r.reward << '\n';
    }
    const auto info = e.info();
    std::cout << "graph      : " << info.graph << '\n';
    std::cout << "output     : " << info.output << '\n';
    std::cout << "answer     : " << p.answer << '\n';
    if (!a.log.empty()) {
        auto out = open_out(a.log, std::ios::app);
        out << episode_to_json({p.question, p.module, taken, info.graph, info.output, reward}) << '\n';
    }
    return ok;
}

// train

struct TrainArgs {
    std::string out;
    std::string checkpoint;
    std::optional<std::uint64_t> seed;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

int run_train(const TrainArgs& a, RunConfig cfg) {
    if (a.seed) cfg.train.seed = *a.seed;
    if (!a.checkpoint.empty() && cfg.seeds != 1) throw UsageError("--checkpoint resumes a single-seed run");
    const fs::path dir(a.out);
    open_out(dir / "config.txt") << dump_run_config(cfg);
    const auto train = generate_usable(cfg.modules, cfg.train_count, cfg.data_seed, cfg.train.env);
    const auto eval = generate_usable(cfg.modules, cfg.eval_count, cfg.eval_seed, cfg.train.env);
    if (train.empty() || eval.empty()) throw DataError("no usable problems for the configured modules");

    std::vector<std::map<std::string, double>> finals;
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
        TrainConfig tc = cfg.train;
        tc.seed = cfg.train.seed + k;
        const fs::path run_dir = cfg.seeds == 1 ? dir : dir / ("seed_" + std::to_string(tc.seed));
        Trainer trainer(tc, default_registry(), train, eval);
        const bool resume = !a.checkpoint.empty();
        if (resume) {
            const auto text = read_file(a.checkpoint);
            try {
                trainer.restore(text);
            } catch (const std::exception& e) {
                throw DataError(a.checkpoint + ": " + e.what());
            }
        }
        auto metrics = open_out(run_dir / "metrics.jsonl", resume ? std::ios::app : std::ios::trunc);
        const fs::path ckpt = run_dir / "checkpoint.json";
        Metrics last;
        trainer.run([&](const Metrics& m) {
            metrics << metrics_to_json(m) << '\n' << std::flush;
            open_out(ckpt) << trainer.checkpoint();
            std::cout << "seed " << tc.seed << " step " << m.step << " eps " << std::fixed << std::setprecision(3)
                      << m.epsilon << " loss " << std::setprecision(5) << m.loss << " eval "
                      << std::setprecision(3) << m.eval.at("mean") << '\n'
                      << std::defaultfloat;
            last = m;
        });
        open_out(ckpt) << trainer.checkpoint();
        finals.push_back(last.eval);
    }

    auto summary = open_out(dir / "summary.tsv");
    summary << "seed";
    for (const auto& [name, v] : finals[0]) summary << '\t' << name;
    summary << '\n';
    for (std::size_t k = 0; k < finals.size(); ++k) {
        summary << cfg.train.seed + k;
        for (const auto& [name, v] : finals[k]) summary << '\t' << v;
        summary << '\n';
    }
    summary << "median";
    for (const auto& [name, v] : finals[0]) {
        std::vector<double> col;
        for (const auto& f : finals) col.push_back(f.at(name));
        summary << '\t' << median(col);
    }
    summary << '\n';
    std::vector<double> means;
    for (const auto& f : finals) means.push_back(f.at("mean"));
    std::cout << "final mean reward (median over " << finals.size() << " seed" << (finals.size() > 1 ? "s" : "")
              << "): " << std::fixed << std::setprecision(3) << median(means) << '\n';
    return ok;
}

// eval

struct EvalArgs {
    std::string checkpoint;
    std::string policy = "checkpoint";
    std::vector<std::string> modules;
    std::string file;
    std::optional<std::size_t> count;
    std::optional<std::uint64_t> seed;
};

void print_table(const std::vector<std::pair<std::string, double>>& rows) {
    std::size_t width = std::string("Mean Reward across Modules").size();
    for (const auto& [m, v] : rows) width = std::max(width, m.size());
    std::cout << std::left << std::setw(static_cast<int>(width)) << "Module" << "  Reward\n";
    std::cout << std::string(width + 8, '-') << '\n';
    double sum = 0;
    for (const auto& [m, v] : rows) {
        std::cout << std::left << std::setw(static_cast<int>(width)) << m << "  " << std::fixed << std::setprecision(3)
                  << v << '\n';
        sum += v;
    }
    std::cout << std::string(width + 8, '-') << '\n';
    std::cout << std::left << std::setw(static_cast<int>(width)) << "Mean Reward across Modules" << "  " << std::fixed
              << std::setprecision(3) << (rows.empty() ? 0.0 : sum / static_cast<double>(rows.size())) << '\n';
}

int run_eval(const EvalArgs& a, const RunConfig& cfg) {
    const auto modules = resolve_modules(a.modules, cfg);
    const EnvConfig& env = cfg.train.env;
    std::vector<std::pair<std::string, double>> rows;
    std::optional<LinearQ> q;
    if (a.policy == "checkpoint") {
        if (a.checkpoint.empty()) throw UsageError("--checkpoint is required for the checkpoint policy");
        const auto text = read_file(a.checkpoint);
        try {
            q = load_policy(text, default_registry());
        } catch (const std::exception& e) {
            throw DataError(a.checkpoint + ": " + e.what());
        }
    } else if (a.policy != "truth" && a.policy != "random") {
        throw UsageError("--policy must be checkpoint, truth or random");
    }
    const std::size_t count = a.count.value_or(cfg.eval_count);
    const std::uint64_t seed = a.seed.value_or(cfg.eval_seed);
    for (const auto& m : modules) {
        std::vector<Problem> problems;
        std::vector<std::vector<int>> truth;
        if (!a.file.empty()) {
            if (a.policy == "truth") throw UsageError("--policy truth needs generated problems");
            problems = load_dataset_file(a.file, m, env).problems;
        } else {
            for (auto& g : generate(m, count, seed)) {
                if (rejection_reason(g.problem, env)) continue;
                problems.push_back(std::move(g.problem));
                truth.push_back(std::move(g.truth_actions));
            }
        }
        if (problems.empty()) throw DataError("no usable problems for " + m);
        double total = 0;
        if (q) {
            total = evaluate_policy(*q, default_registry(), problems, env).at(m) * static_cast<double>(problems.size());
        } else {
            Environment e(default_registry(), env);
            std::mt19937_64 rng(seed);
            for (std::size_t i = 0; i < problems.size(); ++i) {
                if (a.policy == "random") {
                    total += random_rollout(e, problems[i], rng).reward;
                    continue;
                }
                e.reset(problems[i]);
                int r = 0;
                for (int act : truth[i])
                    if (!e.done()) r = e.step(act).reward;
                total += r;
            }
        }
        rows.emplace_back(m, total / static_cast<double>(problems.size()));
    }
    print_table(rows);
    return ok;
}

// solve

struct SolveArgs {
    std::vector<std::string> modules;
    int partial_order = 0;
    std::size_t count = 10;
    std::uint64_t seed = 0;
    std::size_t max_nodes = 5;
    std::string operators = "default";
    bool multivariate = false;
    std::string out;
    std::uint64_t budget = 20'000'000;
};

int run_solve(const SolveArgs& a, const RunConfig& cfg) {
    const Registry reg = pick_registry(a.operators);
    EnvConfig env = cfg.train.env;
    env.max_nodes = std::max(env.max_nodes, a.max_nodes);
    if (a.multivariate) env.univariate_differentiate_only = false;
    std::vector<Problem> problems;
    if (a.partial_order > 0) {
        for (std::size_t i = 0; i < a.count; ++i)
            problems.push_back(generate_partial_derivative(a.seed, i, a.partial_order).problem);
    } else {
        for (const auto& m : resolve_modules(a.modules, cfg))
            for (auto& g : generate(m, a.count, a.seed)) problems.push_back(std::move(g.problem));
    }
    std::ofstream log;
    if (!a.out.empty()) log = open_out(a.out, std::ios::app);
    std::size_t solved = 0;
    for (const auto& p : problems) {
        const auto r = exhaustive_solve(reg, p, a.max_nodes, env, a.budget);
        std::cout << p.question << '\n';
        if (!r.solution) {
            std::cout << "  " << (r.budget_exceeded ? "budget exceeded" : "no solution") << " after " << r.expanded
                      << " expansions\n";
            continue;
        }
        ++solved;
        Environment e(reg, env);
        e.reset(p);
        int reward = 0;
        for (int act : *r.solution) reward = e.step(act).reward;
        const auto info = e.info();
        std::cout << "  actions " << join(*r.solution) << "  ->  " << info.graph << " = " << info.output << '\n';
        if (log.is_open())
            log << episode_to_json({p.question, p.module, *r.solution, info.graph, info.output, reward}) << '\n';
    }
    std::cout << "solved " << solved << " of " << problems.size() << '\n';
    return ok;
}

// mine

struct MineArgs {
    std::string episodes;
    std::string operators = "full";
    std::size_t min_support = 10, min_size = 2, top = 20;
    std::string out;
};

int run_mine(const MineArgs& a) {
    std::ifstream in(a.episodes);
    if (!in) throw DataError("cannot read " + a.episodes);
    const auto log = read_episode_log(in);
    const Registry reg = pick_registry(a.operators);
    std::vector<ComputeGraph> corpus;
    try {
        corpus = rewarded_graphs(log, reg);
    } catch (const std::exception& e) {
        throw DataError(std::string("episode graph: ") + e.what());
    }
    const auto mined = mine(corpus, a.min_support, a.min_size);
    std::cout << corpus.size() << " rewarded graphs, " << mined.size() << " templates\n";
    std::ofstream out;
    if (!a.out.empty()) out = open_out(a.out);
    for (std::size_t i = 0; i < mined.size() && i < a.top; ++i) {
        const auto& m = mined[i];
        const std::string line = m.spec->signature() + " = " + m.key;
        std::cout << line << "  [support " << m.support << ", size " << m.size << "]\n";
        if (out.is_open()) out << line << '\t' << m.support << '\t' << m.size << '\n';
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Math word problems as typed program synthesis"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "key=value run configuration")->check(CLI::ExistingFile);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "write generated datasets, truth graphs and a codec");
    g->add_option("--module", gen.modules, "module name(s), or all");
    g->add_option("--count", gen.count, "problems per module")->check(CLI::Range(1, 10'000'000));
    g->add_option("--seed", gen.seed);
    g->add_option("--out", gen.out, "output directory")->required();
    g->add_flag("--split", gen.split, "also write train/valid/test parts");

    EpisodeArgs ep;
    auto* e = app.add_subcommand("episode", "step an environment through given actions");
    e->add_option("--module", ep.module);
    e->add_option("--question", ep.question);
    e->add_option("--answer", ep.answer);
    e->add_option("--file", ep.file, "dataset with alternating question and answer lines");
    e->add_option("--index", ep.index, "problem index in the file or generator");
    e->add_option("--seed", ep.seed);
    e->add_option("--actions", ep.actions, "comma separated action indices")->required();
    e->add_option("--operators", ep.operators, "default, full or a comma separated list");
    e->add_flag("--multivariate", ep.multivariate, "allow differentiate on several variables");
    e->add_option("--log", ep.log, "append the episode to a JSONL log");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train a policy");
    t->add_option("--out", tr.out, "run directory")->required();
    t->add_option("--checkpoint", tr.checkpoint, "resume from this checkpoint")->check(CLI::ExistingFile);
    t->add_option("--seed", tr.seed, "override the configured seed");

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "per-module mean reward");
    v->add_option("--checkpoint", ev.checkpoint)->check(CLI::ExistingFile);
    v->add_option("--policy", ev.policy, "checkpoint, truth or random");
    v->add_option("--module", ev.modules);
    v->add_option("--file", ev.file, "evaluate on this dataset instead of generated problems")->check(CLI::ExistingFile);
    v->add_option("--count", ev.count);
    v->add_option("--seed", ev.seed);

    SolveArgs so;
    auto* s = app.add_subcommand("solve", "exhaustive search for shortest programs");
    s->add_option("--module", so.modules);
    s->add_option("--partial-order", so.partial_order, "solve partial derivative problems of this order")
        ->check(CLI::Range(1, 6));
    s->add_option("--count", so.count);
    s->add_option("--seed", so.seed);
    s->add_option("--max-nodes", so.max_nodes)->check(CLI::Range(1, 12));
    s->add_option("--operators", so.operators, "default, full or a comma separated list");
    s->add_flag("--multivariate", so.multivariate);
    s->add_option("--budget", so.budget, "cap on expanded partial graphs per problem");
    s->add_option("--out", so.out, "append solutions to a JSONL episode log");

    MineArgs mi;
    auto* m = app.add_subcommand("mine", "frequent subgraphs of rewarded episodes");
    m->add_option("--episodes", mi.episodes, "JSONL episode log")->required();
    m->add_option("--operators", mi.operators, "registry the logged graphs use");
    m->add_option("--min-support", mi.min_support);
    m->add_option("--min-size", mi.min_size);
    m->add_option("--top", mi.top);
    m->add_option("--out", mi.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? ok : usage;
    }

    try {
        const RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (*g) return run_generate(gen, cfg);
        if (*e) return run_episode(ep, cfg);
        if (*t) return run_train(tr, cfg);
        if (*v) return run_eval(ev, cfg);
        if (*s) return run_solve(so, cfg);
        if (*m) return run_mine(mi);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return usage;
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return usage;
    } catch (const UnsupportedModule& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return usage;
    } catch (const DataError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const FormatError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const ExtractionError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const ParseError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const EncodingError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return internal;
    }
    return internal;
}
