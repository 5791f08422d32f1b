#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsynth/value.hpp"

namespace mathsynth {

struct Param {
    std::string name;
    TypeTag type;
};

struct OperatorSpec {
    std::string name;
    std::vector<Param> params;
    TypeTag return_type = TypeTag::Object;
    // Receives arguments already checked against `params` and never Absent.
    std::function<TypedValue(const std::vector<TypedValue>&)> eval;
    // Template text for operators minted by abstraction; empty for built-ins.
    std::string expansion;

    std::size_t arity() const { return params.size(); }
    std::string signature() const;
};

using OperatorPtr = std::shared_ptr<const OperatorSpec>;

// Total evaluation: Absent arguments, arity or type mismatches and arithmetic
// failures all produce Absent. A result outside the declared return type is
// also reported as Absent.
TypedValue apply_op(const OperatorSpec& op, const std::vector<TypedValue>& args);

struct RegistryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered, immutable operator table; an operator's position is its action index.
class Registry {
public:
    Registry() = default;
    explicit Registry(std::vector<OperatorPtr> ops);

    std::size_t size() const { return ops_.size(); }
    const OperatorSpec& at(std::size_t i) const { return *ops_.at(i); }
    const OperatorPtr& ptr(std::size_t i) const { return ops_.at(i); }
    const std::vector<OperatorPtr>& operators() const { return ops_; }
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;  // throws RegistryError

    // Copy with `op` appended at the next index.
    Registry with(OperatorPtr op) const;

    // One line per operator: "<index> <signature>[ = <expansion>]".
    std::string manifest() const;

private:
    std::vector<OperatorPtr> ops_;
};

// All 23 predefined operators, in their canonical order.
const std::vector<OperatorPtr>& builtin_operators();
OperatorPtr builtin_operator(std::string_view name);

// The 15-operator experiment registry (lookup_value = 0 ... not_op = 14).
const Registry& default_registry();
const Registry& full_registry();
Registry make_registry(const std::vector<std::string>& names);

// Integer helpers shared with the problem generators' oracles.
bool is_prime_integer(std::int64_t n);
std::vector<std::int64_t> distinct_prime_factors(std::int64_t n);

}  // namespace mathsynth
