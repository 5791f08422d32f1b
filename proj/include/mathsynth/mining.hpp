#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mathsynth/graph.hpp"

namespace mathsynth {

// Operator tree with parameter placeholders at the leaves.
struct TemplateNode {
    OperatorPtr op;          // null for a placeholder
    int placeholder = -1;
    std::vector<int> children;
};

struct MinedOperator {
    std::string name;  // e.g. m0_differentiate_wrt
    std::string key;   // e.g. differentiate_wrt(differentiate_wrt(p0,p1),p1)
    std::size_t support = 0;
    std::size_t size = 0;  // operator nodes
    std::vector<TemplateNode> nodes;  // nodes[0] is the root
    OperatorPtr spec;  // params p0.., return type of the root, expansion = key
};

// Rooted subtree templates of complete graphs. Each occurrence is an operator
// node together with any choice, per operator child, of including that child
// or cutting it into a leaf; leaf subtrees that print the same within one
// occurrence share a placeholder, numbered in pre-order. Templates with at
// least min_size operators and min_support occurrences are returned, ranked
// by support, then size, then key. Templates whose shared placeholder has
// incompatible slot types are dropped.
std::vector<MinedOperator> mine(const std::vector<ComputeGraph>& corpus, std::size_t min_support = 10,
                                std::size_t min_size = 2);

// All templates with their occurrence counts, before thresholds and typing.
std::vector<std::pair<std::string, std::size_t>> template_counts(const std::vector<ComputeGraph>& corpus);

// Registry extended by the mined operator, optionally renamed. Throws
// RegistryError for unsupported arity or a name already present.
Registry register_mined(const MinedOperator& mined, const Registry& registry, const std::string& name = {});

}  // namespace mathsynth
