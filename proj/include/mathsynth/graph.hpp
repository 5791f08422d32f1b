#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsynth/operators.hpp"

namespace mathsynth {

// Illegal construction step: input at the root, node limit, or a full graph.
struct StructuralError : std::logic_error {
    using std::logic_error::logic_error;
};

struct GraphNode {
    OperatorPtr op;             // null for input leaves
    TypedValue value;           // payload of an input leaf
    int input_index = -1;       // position among the problem inputs, when known
    std::vector<int> children;  // one per parameter; -1 while unfilled

    bool is_operator() const { return op != nullptr; }
    // Static type used for slot checks: an operator's return type or the input's kind.
    TypeTag declared_type() const { return op ? op->return_type : value.kind(); }
};

struct Slot {
    int node;
    std::size_t param;
};

// Rooted operator tree built breadth first: every new node fills the oldest
// open parameter slot, and an operator's own slots join the back of the queue.
class ComputeGraph {
public:
    explicit ComputeGraph(std::size_t max_nodes = 7) : max_nodes_(max_nodes) {}

    void add_operator(OperatorPtr op);
    void add_input(TypedValue value, int input_index = -1);

    bool empty() const { return nodes_.empty(); }
    bool complete() const { return !nodes_.empty() && frontier_.empty(); }
    std::size_t size() const { return nodes_.size(); }
    std::size_t max_nodes() const { return max_nodes_; }
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::deque<Slot>& frontier() const { return frontier_; }

    // Parameter type of the slot the next node will fill; nullopt at the root or when complete.
    std::optional<TypeTag> next_slot_type() const;

    // Bottom-up evaluation. Unfilled slots, statically ill-typed children and
    // Absent subresults all give Absent.
    TypedValue evaluate() const;
    TypedValue evaluate_node(int index) const;

    // Nested call notation, e.g. not_op(is_prime(Value('10'))); open slots print as "_".
    std::string serialize() const;
    std::string serialize_node(int index) const;

private:
    void place(GraphNode node);

    std::size_t max_nodes_;
    std::vector<GraphNode> nodes_;
    std::deque<Slot> frontier_;
};

// Inverse of serialize for complete graphs, or graphs whose open slots are the
// last ones in breadth-first order. Operator names resolve through `registry`.
ComputeGraph deserialize_graph(std::string_view text, const Registry& registry, std::size_t max_nodes = 7);

}  // namespace mathsynth
