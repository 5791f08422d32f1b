#include "mathsynth/mining.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace mathsynth {

namespace {

using NodeSet = std::vector<int>;

// Every connected set of operator nodes whose topmost node is `v`.
std::vector<NodeSet> rooted_sets(const ComputeGraph& g, int v) {
    std::vector<NodeSet> acc{{v}};
    for (int c : g.nodes()[static_cast<std::size_t>(v)].children) {
        if (c < 0 || !g.nodes()[static_cast<std::size_t>(c)].is_operator()) continue;
        const auto sub = rooted_sets(g, c);
        std::vector<NodeSet> next = acc;  // child cut
        for (const auto& a : acc)
            for (const auto& s : sub) {
                NodeSet u = a;
                u.insert(u.end(), s.begin(), s.end());
                next.push_back(std::move(u));
            }
        acc = std::move(next);
    }
    return acc;
}

struct Occurrence {
    std::string key;
    std::vector<TemplateNode> nodes;
    std::vector<std::optional<TypeTag>> param_types;  // nullopt when slot types conflict
    std::size_t size = 0;
};

TypeTag meet(TypeTag a, TypeTag b, bool& ok) {
    if (is_subtype(a, b)) return a;
    if (is_subtype(b, a)) return b;
    ok = false;
    return a;
}

Occurrence describe(const ComputeGraph& g, int root, const NodeSet& included) {
    Occurrence occ;
    std::map<std::string, int> leaf_ids;
    auto in = [&](int n) { return std::find(included.begin(), included.end(), n) != included.end(); };
    auto walk = [&](auto&& self, int v) -> int {
        const auto& node = g.nodes()[static_cast<std::size_t>(v)];
        const int idx = static_cast<int>(occ.nodes.size());
        occ.nodes.push_back({node.op, -1, {}});
        ++occ.size;
        occ.key += node.op->name + "(";
        for (std::size_t k = 0; k < node.children.size(); ++k) {
            if (k) occ.key += ",";
            const int c = node.children[k];
            const TypeTag slot = node.op->params[k].type;
            if (in(c)) {
                const int ci = self(self, c);
                occ.nodes[static_cast<std::size_t>(idx)].children.push_back(ci);
                continue;
            }
            const std::string text = g.serialize_node(c);
            auto [it, fresh] = leaf_ids.emplace(text, static_cast<int>(leaf_ids.size()));
            if (fresh) {
                occ.param_types.emplace_back(slot);
            } else {
                bool ok = true;
                auto& t = occ.param_types[static_cast<std::size_t>(it->second)];
                if (t) t = meet(*t, slot, ok);
                if (!ok) t.reset();
            }
            const int li = static_cast<int>(occ.nodes.size());
            occ.nodes.push_back({nullptr, it->second, {}});
            occ.nodes[static_cast<std::size_t>(idx)].children.push_back(li);
            occ.key += "p" + std::to_string(it->second);
        }
        occ.key += ")";
        return idx;
    };
    walk(walk, root);
    return occ;
}

template <class F>
void for_each_occurrence(const std::vector<ComputeGraph>& corpus, F&& f) {
    for (const auto& g : corpus) {
        if (!g.complete()) continue;
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (!g.nodes()[v].is_operator()) continue;
            for (const auto& set : rooted_sets(g, static_cast<int>(v))) f(describe(g, static_cast<int>(v), set));
        }
    }
}

TypedValue run_template(const std::vector<TemplateNode>& t, int i, const std::vector<TypedValue>& args) {
    const auto& node = t[static_cast<std::size_t>(i)];
    if (!node.op) return args.at(static_cast<std::size_t>(node.placeholder));
    std::vector<TypedValue> vals;
    for (std::size_t k = 0; k < node.children.size(); ++k) {
        const auto& child = t[static_cast<std::size_t>(node.children[k])];
        if (child.op && !is_subtype(child.op->return_type, node.op->params[k].type)) return TypedValue::absent();
        vals.push_back(run_template(t, node.children[k], args));
    }
    return apply_op(*node.op, vals);
}

}  // namespace

std::vector<std::pair<std::string, std::size_t>> template_counts(const std::vector<ComputeGraph>& corpus) {
    std::map<std::string, std::size_t> counts;
    for_each_occurrence(corpus, [&](const Occurrence& o) { ++counts[o.key]; });
    return {counts.begin(), counts.end()};
}

std::vector<MinedOperator> mine(const std::vector<ComputeGraph>& corpus, std::size_t min_support, std::size_t min_size) {
    std::map<std::string, std::pair<Occurrence, std::size_t>> found;
    for_each_occurrence(corpus, [&](Occurrence o) {
        if (o.size < min_size) return;
        auto it = found.find(o.key);
        if (it != found.end()) {
            ++it->second.second;
            return;
        }
        std::string key = o.key;
        found.emplace(std::move(key), std::make_pair(std::move(o), std::size_t{1}));
    });
    std::vector<MinedOperator> out;
    for (auto& [key, entry] : found) {
        auto& [occ, support] = entry;
        if (support < min_support) continue;
        if (std::any_of(occ.param_types.begin(), occ.param_types.end(), [](const auto& t) { return !t; })) continue;
        MinedOperator m;
        m.key = key;
        m.support = support;
        m.size = occ.size;
        m.nodes = occ.nodes;
        out.push_back(std::move(m));
        auto spec = std::make_shared<OperatorSpec>();
        spec->return_type = occ.nodes[0].op->return_type;
        for (std::size_t p = 0; p < occ.param_types.size(); ++p)
            spec->params.push_back({"p" + std::to_string(p), *occ.param_types[p]});
        spec->expansion = key;
        spec->eval = [nodes = occ.nodes](const std::vector<TypedValue>& args) { return run_template(nodes, 0, args); };
        out.back().spec = spec;
    }
    std::sort(out.begin(), out.end(), [](const MinedOperator& a, const MinedOperator& b) {
        if (a.support != b.support) return a.support > b.support;
        if (a.size != b.size) return a.size > b.size;
        return a.key < b.key;
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].name = "m" + std::to_string(i) + "_" + out[i].nodes[0].op->name;
        auto spec = std::make_shared<OperatorSpec>(*out[i].spec);
        spec->name = out[i].name;
        out[i].spec = spec;
    }
    return out;
}

Registry register_mined(const MinedOperator& mined, const Registry& registry, const std::string& name) {
    if (!mined.spec) throw RegistryError("mined operator has no specification");
    if (name.empty()) return registry.with(mined.spec);
    auto spec = std::make_shared<OperatorSpec>(*mined.spec);
    spec->name = name;
    return registry.with(spec);
}

}  // namespace mathsynth
