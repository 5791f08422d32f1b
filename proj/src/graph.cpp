#include "mathsynth/graph.hpp"

#include <cctype>

namespace mathsynth {

void ComputeGraph::place(GraphNode node) {
    if (complete()) throw StructuralError("graph is already complete");
    if (nodes_.size() >= max_nodes_) throw StructuralError("node limit of " + std::to_string(max_nodes_) + " reached");
    const int index = static_cast<int>(nodes_.size());
    if (!nodes_.empty()) {
        const Slot s = frontier_.front();
        frontier_.pop_front();
        nodes_[static_cast<std::size_t>(s.node)].children[s.param] = index;
    }
    const std::size_t arity = node.is_operator() ? node.op->arity() : 0;
    node.children.assign(arity, -1);
    nodes_.push_back(std::move(node));
    for (std::size_t p = 0; p < arity; ++p) frontier_.push_back({index, p});
}

void ComputeGraph::add_operator(OperatorPtr op) {
    if (!op) throw StructuralError("null operator");
    GraphNode n;
    n.op = std::move(op);
    place(std::move(n));
}

void ComputeGraph::add_input(TypedValue value, int input_index) {
    if (nodes_.empty()) throw StructuralError("the root must be an operator");
    GraphNode n;
    n.value = std::move(value);
    n.input_index = input_index;
    place(std::move(n));
}

std::optional<TypeTag> ComputeGraph::next_slot_type() const {
    if (frontier_.empty()) return std::nullopt;
    const Slot& s = frontier_.front();
    return nodes_[static_cast<std::size_t>(s.node)].op->params[s.param].type;
}

TypedValue ComputeGraph::evaluate_node(int index) const {
    const GraphNode& n = nodes_.at(static_cast<std::size_t>(index));
    if (!n.is_operator()) return n.value;
    std::vector<TypedValue> args;
    for (std::size_t p = 0; p < n.children.size(); ++p) {
        const int c = n.children[p];
        if (c < 0) return {};
        if (!is_subtype(nodes_[static_cast<std::size_t>(c)].declared_type(), n.op->params[p].type)) return {};
        args.push_back(evaluate_node(c));
        if (args.back().is_absent()) return {};
    }
    return apply_op(*n.op, args);
}

TypedValue ComputeGraph::evaluate() const {
    if (!complete()) return {};
    return evaluate_node(0);
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

}  // namespace

std::string ComputeGraph::serialize_node(int index) const {
    if (index < 0) return "_";
    const GraphNode& n = nodes_.at(static_cast<std::size_t>(index));
    if (!n.is_operator()) return std::string(type_name(n.value.kind())) + "(" + quote(render(n.value)) + ")";
    std::string out = n.op->name + "(";
    for (std::size_t p = 0; p < n.children.size(); ++p) {
        if (p) out += ",";
        out += serialize_node(n.children[p]);
    }
    return out + ")";
}

std::string ComputeGraph::serialize() const { return nodes_.empty() ? "_" : serialize_node(0); }

namespace {

struct ParsedNode {
    bool hole = false;
    std::string name;
    std::optional<TypedValue> value;
    std::vector<ParsedNode> children;
};

class GraphParser {
public:
    explicit GraphParser(std::string_view text) : text_(text) {}

    ParsedNode parse() {
        ParsedNode n = node();
        skip();
        if (pos_ != text_.size()) fail("trailing characters");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError("graph: " + what, pos_); }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    ParsedNode node() {
        skip();
        ParsedNode n;
        if (pos_ < text_.size() && text_[pos_] == '_') {
            ++pos_;
            n.hole = true;
            return n;
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected a name");
        n.name = std::string(text_.substr(start, pos_ - start));
        expect('(');
        skip();
        if (pos_ < text_.size() && text_[pos_] == '\'') {
            const std::size_t at = pos_;
            const std::string literal = quoted();
            const auto kind = type_from_name(n.name);
            if (!kind) throw ParseError("graph: unknown input kind " + n.name, start);
            try {
                n.value = parse_value(literal, *kind);
            } catch (const ParseError& e) {
                throw ParseError("graph: bad literal: " + e.detail, at + 1 + e.position);
            }
            expect(')');
            return n;
        }
        skip();
        if (pos_ < text_.size() && text_[pos_] == ')') fail("operator without arguments");
        while (true) {
            n.children.push_back(node());
            skip();
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            expect(')');
            return n;
        }
    }

    std::string quoted() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '\'') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
            out += text_[pos_++];
        }
        if (pos_ >= text_.size()) fail("unterminated literal");
        ++pos_;
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

ComputeGraph deserialize_graph(std::string_view text, const Registry& registry, std::size_t max_nodes) {
    const ParsedNode root = GraphParser(text).parse();
    if (root.hole) return ComputeGraph(max_nodes);
    if (root.value) throw ParseError("graph: the root must be an operator", 0);

    ComputeGraph g(max_nodes);
    std::deque<const ParsedNode*> queue{&root};
    bool seen_hole = false;
    while (!queue.empty()) {
        const ParsedNode* n = queue.front();
        queue.pop_front();
        if (n->hole) {
            seen_hole = true;
            continue;
        }
        if (seen_hole) throw ParseError("graph: open slot before a filled one in breadth-first order", 0);
        try {
            if (n->value) {
                g.add_input(*n->value);
                continue;
            }
            const auto idx = registry.find(n->name);
            if (!idx) throw ParseError("graph: unknown operator " + n->name, 0);
            if (registry.at(*idx).arity() != n->children.size())
                throw ParseError("graph: wrong argument count for " + n->name, 0);
            g.add_operator(registry.ptr(*idx));
        } catch (const StructuralError& e) {
            throw ParseError(std::string("graph: ") + e.what(), 0);
        }
        for (const auto& c : n->children) queue.push_back(&c);
    }
    return g;
}

}  // namespace mathsynth
